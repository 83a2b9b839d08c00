"""Experiment reports: named checks with explicit targets and tolerances."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckRecord:
    name: str
    target: str
    measured: str
    tolerance: str
    passed: bool
    source: str  # 'closed form' | 'derived oracle' | 'trivial'
    note: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    elapsed: float = 0.0

    def add(self, name, target, measured, tolerance, passed, source, note=""):
        self.checks.append(CheckRecord(
            name, _fmt(target), _fmt(measured), _fmt(tolerance), bool(passed),
            source, note))

    def skip(self, name, note, source="trivial"):
        self.checks.append(CheckRecord(name, "-", "-", "-", True, source,
                                       f"skipped: {note}"))

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        out = [f"experiment: {self.experiment}"]
        for key in sorted(self.params):
            out.append(f"  param {key} = {self.params[key]}")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = (f"  [{status}] {c.name}: measured={c.measured} "
                    f"target={c.target} tol={c.tolerance} ({c.source})")
            if c.note:
                line += f" [{c.note}]"
            out.append(line)
        for a in self.artifacts:
            out.append(f"  artifact: {a}")
        out.append(f"  overall: {'PASS' if self.overall_pass else 'FAIL'} "
                   f"({self.elapsed:.1f}s)")
        return out

    def write_csv(self, path):
        """Deterministic report table (no wall clock)."""
        with open(path, "w") as fh:
            fh.write("name,target,measured,tolerance,passed,source,note\n")
            for c in self.checks:
                row = [c.name, c.target, c.measured, c.tolerance,
                       str(c.passed), c.source, c.note]
                fh.write(",".join(v.replace(",", ";") for v in row) + "\n")
        self.artifacts.append(str(path))


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_table_csv(path, header, rows):
    """Small deterministic CSV writer: floats via repr."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, int)) and not isinstance(v, bool)
                              else str(v) for v in row) + "\n")
