import pytest

from trunclap import experiments


def small_disk_kwargs():
    return {"h": 1.0 / 16.0, "order": 2}


def test_matrix_check_battery():
    report = experiments.cmd_matrix_check(seed=3, n_trials=120)
    assert report.overall_pass
    names = {c.name for c in report.checks}
    for key in ("duality", "monotonicity", "homogeneity", "subsuperadditivity",
                "lipschitz", "concavity", "ordering"):
        assert any(key in n for n in names)
    # every check reports a tolerance and a source
    assert all(c.tolerance for c in report.checks)
    assert all(c.source in ("closed form", "derived oracle", "trivial")
               for c in report.checks)


def test_oracle_check_battery():
    report = experiments.cmd_oracle_check(n_points=300, seed=2)
    assert report.overall_pass


def test_critical_exponent_dichotomy_small():
    report = experiments.cmd_critical_exponent(
        p_list=(0.5, 1.2), h=1.0 / 16.0, order=2)
    assert report.overall_pass
    collapse = [c for c in report.checks if "collapse" in c.name]
    positive = [c for c in report.checks if "interior minimum" in c.name]
    assert len(collapse) == 1 and len(positive) == 1


def test_anti_hopf_empty_fit_window_skips():
    # collapsed window leaves no usable fit samples: skipped with a notice
    report = experiments.cmd_anti_hopf(h=1.0 / 8.0, order=2, fit_min=0.3,
                                       fit_max=0.1)
    note = [c for c in report.checks if "skipped" in c.note]
    assert note


def test_anti_hopf_p075_ball_rate():
    from trunclap.experiments import formula_boundary_exponent

    rate = formula_boundary_exponent(0.75, 1)
    assert abs(rate - 4.0) <= 0.15 * 4.0


def test_ordering_small():
    report = experiments.cmd_ordering(**small_disk_kwargs())
    assert report.overall_pass


def test_superlinear_rejects_sublinear_p():
    with pytest.raises(ValueError):
        experiments.cmd_superlinear_pplus(p=0.5)


def test_superlinear_small():
    report = experiments.cmd_superlinear_pplus(p=2.0, **small_disk_kwargs())
    assert report.overall_pass
    sups = [c for c in report.checks if "sup norm" in c.name]
    assert sups and sups[0].passed  # reported, never asserted


def test_sandwich_constant_coefficient_reduces_to_extremes():
    report = experiments.cmd_sandwich(a=None, a_bounds=(1.0, 1.0),
                                      **small_disk_kwargs())
    assert report.overall_pass


def test_rescaling_exact_ball_only():
    report = experiments.cmd_rescaling(p_list=(0.5, 0.75), h_div=24, order=2)
    exact_checks = [c for c in report.checks if "exact-ball" in c.name]
    assert all(c.passed for c in exact_checks)


def test_rescaling_budget_truncation():
    # tiny node budget cannot be configured through the cmd; emulate by a
    # huge h_div on a big domain through the solver budget default: instead
    # verify the skip path directly
    report = experiments.cmd_rescaling(p_list=(0.9,), h_div=3000, order=2)
    skipped = [c for c in report.checks if "skipped" in c.note]
    lens_checks = [c for c in report.checks if "lens" in c.name]
    assert skipped or all(c.passed for c in lens_checks)


def test_jobs_parallel_matches_serial():
    kwargs = dict(p_list=(0.5, 1.2), h=1.0 / 16.0, order=2)
    serial = experiments.cmd_critical_exponent(jobs=1, **kwargs)
    parallel = experiments.cmd_critical_exponent(jobs=2, **kwargs)
    assert [c.measured for c in serial.checks] == [c.measured for c in parallel.checks]


def test_report_overall_fail_on_any_check():
    report = experiments.cmd_matrix_check(seed=1, n_trials=10)
    report.add("forced", 0.0, 1.0, 0.0, False, "trivial")
    assert not report.overall_pass
