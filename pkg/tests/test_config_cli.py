import hashlib
from pathlib import Path

import numpy as np
import pytest

from trunclap.cli import main
from trunclap.config import (
    ConfigError,
    coefficient_from_spec,
    domain_from_config,
    parse_config_text,
)


def test_parse_basic():
    cfg = parse_config_text("""
# comment
R = 1.0
center=0,0
center = 0.3, 0   # second ball
h=0.05
""")
    assert cfg["R"] == "1.0"
    assert cfg["center"] == ["0,0", "0.3, 0"]
    assert cfg["h"] == "0.05"


def test_parse_error_with_line_number():
    with pytest.raises(ConfigError, match=":3:"):
        parse_config_text("a=1\nb=2\nnot a pair\n", source="<config>")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("p=1\np=2\n")


def test_missing_key_named():
    from trunclap.config import get_float

    with pytest.raises(ConfigError, match="'p'"):
        get_float({}, "p")


def test_domain_from_config():
    cfg = parse_config_text("R=1\ncenter=0.3,0\ncenter=-0.3,0\n")
    dom = domain_from_config(cfg)
    assert dom.radius == 1.0
    assert dom.centers.shape == (2, 2)
    with pytest.raises(ConfigError, match="center"):
        domain_from_config({"R": "1"})
    with pytest.raises(ConfigError):
        domain_from_config({"R": "1", "center": ["0,0", "0,0,0"]})


def test_coefficient_specs():
    const, bounds = coefficient_from_spec("1")
    assert const == 1.0 and bounds == (1.0, 1.0)
    coeff, bounds = coefficient_from_spec("sin:0.5:1")
    assert bounds == (0.5, 1.5)
    pts = np.array([[0.5, 0.0], [-0.5, 0.0]])
    vals = coeff(pts)
    assert abs(vals[0] - 1.5) <= 1e-12 and abs(vals[1] - 0.5) <= 1e-12
    with pytest.raises(ConfigError):
        coefficient_from_spec("cos:1")
    with pytest.raises(ConfigError):
        coefficient_from_spec("const:-1")


# ---------------------------------------------------------------------------
# CLI behavior
# ---------------------------------------------------------------------------

def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_solve_roundtrip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=pminus\nk=1\np=0.5\nR=1\ncenter=0,0\nh=0.125\n")
    rc = main(["solve", "--config", cfg, "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "overall: PASS" in out
    solution = (tmp_path / "out" / "solution.csv").read_text().strip().splitlines()
    assert solution[0] == "x,y,u"
    # one row per interior node
    from trunclap.geometry import CRDomain
    from trunclap.solver import discretize

    disc = discretize(CRDomain(1.0, [[0.0, 0.0]]), 0.125)
    assert len(solution) - 1 == disc.n_nodes
    assert (tmp_path / "out" / "report.csv").exists()


def test_cli_missing_key_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=pminus\nR=1\ncenter=0,0\nh=0.125\n")
    rc = main(["solve", "--config", cfg])
    err = capsys.readouterr().err
    assert rc == 2
    assert "'p'" in err


def test_cli_rejects_sublinear_superlinear_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "p=0.5\n")
    rc = main(["superlinear-pplus", "--config", cfg])
    assert rc == 2
    assert "sublinear" in capsys.readouterr().err


def test_cli_deterministic_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "n_trials=60\n")

    def run(out):
        rc = main(["matrix-check", "--config", cfg, "--seed", "7", "--out", out])
        assert rc == 0
        return hashlib.sha256(Path(out, "matrix_check_margins.csv").read_bytes()).hexdigest()

    h1 = run(str(tmp_path / "a"))
    h2 = run(str(tmp_path / "b"))
    capsys.readouterr()
    assert h1 == h2


def test_cli_seed_changes_battery(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "n_trials=40\n")
    rc1 = main(["matrix-check", "--config", cfg, "--seed", "1",
                "--out", str(tmp_path / "s1")])
    rc2 = main(["matrix-check", "--config", cfg, "--seed", "2",
                "--out", str(tmp_path / "s2")])
    capsys.readouterr()
    assert rc1 == 0 and rc2 == 0
    a = Path(tmp_path, "s1", "matrix_check_margins.csv").read_text()
    b = Path(tmp_path, "s2", "matrix_check_margins.csv").read_text()
    assert a != b


def test_cli_unknown_operator(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=laplace\np=0.5\nR=1\ncenter=0,0\nh=0.25\n")
    rc = main(["solve", "--config", cfg])
    assert rc == 2
    assert "operator" in capsys.readouterr().err


def test_cli_solve_artifacts_byte_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=pminus\nk=1\np=0.5\nR=1\ncenter=0,0\nh=0.125\n")

    def run(out):
        rc = main(["solve", "--config", cfg, "--out", out])
        assert rc == 0
        return hashlib.sha256(Path(out, "solution.csv").read_bytes()).hexdigest()

    h1 = run(str(tmp_path / "r1"))
    h2 = run(str(tmp_path / "r2"))
    capsys.readouterr()
    assert h1 == h2


def test_cli_solve_init_and_dt_keys(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=pminus\nk=1\np=0.5\nR=1\ncenter=0,0\n"
                              "h=0.125\ninit=super_envelope\ndt=0.001\n")
    rc = main(["solve", "--config", cfg])
    capsys.readouterr()
    assert rc == 0
    bad = write_cfg(tmp_path, "operator=pminus\nk=1\np=0.5\nR=1\ncenter=0,0\n"
                              "h=0.125\ninit=super_envelope\ndt=0.5\n", "bad.cfg")
    rc = main(["solve", "--config", bad])
    err = capsys.readouterr().err
    assert rc == 2
    assert "stable step" in err


def test_cli_solve_init_mode_validation(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "operator=pminus\nk=1\np=0.5\nR=1\ncenter=0,0\n"
                              "h=0.125\ninit=bogus\n")
    rc = main(["solve", "--config", cfg])
    assert rc == 2
    assert "init" in capsys.readouterr().err
