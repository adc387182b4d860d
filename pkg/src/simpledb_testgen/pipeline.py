"""End-to-end test generation: paths, symbolic execution, solving, replay.

A :class:`TestSuite` never holds an unverified Sat input: replay failures
raise :class:`SoundnessError` instead of being recorded.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .frontend import load_model
from .frontend.checker import CheckedModel
from .interpreter import ExecError, InvalidInput, TestInput, run
from .paths import Path, PathBounds, build_cfg, enumerate_paths, path_of_trace
from .solver import SAT, UNSAT, Scope, solve
from .symexec import symexec


class SoundnessError(RuntimeError):
    """A solver-produced input does not drive the program along its path."""


# ---------------------------------------------------------------- verification


@dataclass(frozen=True)
class Verdict:
    ok: bool
    index: Optional[int] = None  # first divergent step
    expected: Optional[str] = None
    observed: Optional[str] = None
    reason: str = ""

    def to_json(self) -> dict:
        if self.ok:
            return {"verdict": "pass"}
        return {"verdict": "fail", "index": self.index, "expected": self.expected,
                "observed": self.observed, "reason": self.reason}

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return f"fail at step {self.index}: expected {self.expected}, observed {self.observed}" + \
            (f" ({self.reason})" if self.reason else "")


def _first_divergence(expected: Path, observed: Path) -> Verdict:
    for i, (a, b) in enumerate(zip(expected.steps, observed.steps)):
        if a != b:
            return Verdict(False, i, str(a), str(b))
    n = min(len(expected.steps), len(observed.steps))
    exp = str(expected.steps[n]) if n < len(expected.steps) else expected.terminal
    obs = str(observed.steps[n]) if n < len(observed.steps) else observed.terminal
    return Verdict(False, n, exp, obs)


def verify_input(model: CheckedModel, path: Path, inp: TestInput, bitwidth: int = 4) -> Verdict:
    """Replay ``inp`` and compare the observed trace with ``path``, terminal included."""
    try:
        res = run(model, inp, bitwidth)
    except InvalidInput as exc:
        return Verdict(False, 0, str(path.steps[0]) if path.steps else path.terminal, "invalid input",
                       str(exc))
    except ExecError as exc:
        observed = Path(tuple(exc.trace or ()), "error")
        v = _first_divergence(path, observed)
        return Verdict(False, v.index, v.expected, v.observed, str(exc))
    observed = path_of_trace(res.trace)
    if observed == path:
        return Verdict(True)
    return _first_divergence(path, observed)


def verify(model_file: str, path_file: str, input_file: str, bitwidth: int = 4) -> Verdict:
    with open(model_file) as fh:
        model = load_model(fh.read(), bitwidth)
    with open(path_file) as fh:
        path = Path.from_json(json.load(fh))
    with open(input_file) as fh:
        inp = TestInput.from_json(json.load(fh))
    return verify_input(model, path, inp, bitwidth)


# ---------------------------------------------------------------- suites


@dataclass
class SuiteEntry:
    index: int
    path: Path
    status: str
    stage: str
    test_input: Optional[TestInput]
    verdict: Optional[Verdict]
    symvars: int
    facts: int
    millis: float

    def to_json(self) -> dict:
        out = {"index": self.index, "path": self.path.to_json(), "status": self.status,
               "stage": self.stage, "symvars": self.symvars, "facts": self.facts}
        if self.status == UNSAT:
            out["scope_independent"] = self.stage == "presolve"
        if self.test_input is not None:
            out["input"] = self.test_input.to_json()
            out["verification"] = self.verdict.to_json()
        return out


@dataclass
class TestSuite:
    model: str
    lines: int
    bounds: PathBounds
    scope: Scope
    entries: List[SuiteEntry] = field(default_factory=list)
    truncated: bool = False

    __test__ = False

    @property
    def sat_count(self) -> int:
        return sum(e.status == SAT for e in self.entries)

    def to_json(self, timings: bool = True) -> dict:
        out = {
            "model": self.model,
            "lines": self.lines,
            "bounds": {"max_loop_iterations": self.bounds.max_loop_iterations,
                       "include_exception_paths": self.bounds.include_exception_paths,
                       "max_paths": self.bounds.max_paths},
            "scope": {"bitwidth": self.scope.bitwidth, "max_rows": self.scope.max_rows,
                      "max_list_len": self.scope.max_list_len, "seed": self.scope.seed},
            "truncated": self.truncated,
            "tests": [e.to_json() for e in self.entries],
        }
        if timings:
            out["timings"] = {"solve_ms": [round(e.millis, 3) for e in self.entries]}
        return out

    def dumps(self, timings: bool = True) -> str:
        return json.dumps(self.to_json(timings), indent=2, sort_keys=True) + "\n"


def _code_lines(source: str) -> int:
    return sum(1 for line in source.splitlines() if line.strip())


def generate_tests(model: Union[str, CheckedModel], bounds: PathBounds = PathBounds(),
                   scope: Scope = Scope(), name: Optional[str] = None, source: Optional[str] = None,
                   paths: Optional[Sequence[Path]] = None) -> TestSuite:
    """Solve every path of ``model`` (a file name or a checked model) and replay each Sat input.

    Raises :class:`SoundnessError` if a replay diverges.
    """
    if isinstance(model, str):
        with open(model) as fh:
            source = fh.read()
        model = load_model(source, scope.bitwidth)
    truncated = False
    if paths is None:
        ps = enumerate_paths(build_cfg(model), bounds)
        paths, truncated = list(ps), ps.truncated
    suite = TestSuite(name or model.name, _code_lines(source) if source else 0, bounds, scope,
                      truncated=truncated)
    for i, p in enumerate(paths):
        cs = symexec(model, p)
        res = solve(cs, scope)
        verdict = None
        if res.sat:
            verdict = verify_input(model, p, res.test_input, scope.bitwidth)
            if not verdict.ok:
                raise SoundnessError(f"path {i} ({p}): solver input {res.test_input.dumps()} "
                                     f"does not follow the path: {verdict}")
        suite.entries.append(SuiteEntry(i, p, res.status, res.stage, res.test_input, verdict,
                                        res.stats["symvars"], res.stats["facts"], res.millis))
    return suite


# ---------------------------------------------------------------- report

HEADER = ("Model", "Lines", "Paths", "SymVars min", "SymVars max", "Facts min", "Facts max",
          "SolveTime min", "SolveTime max")


def _row(s: TestSuite) -> Tuple[str, ...]:
    def span(vals, fmt=str):
        return (fmt(min(vals)), fmt(max(vals))) if vals else ("-", "-")

    ms = lambda v: f"{v:,.1f} ms"  # noqa: E731
    return (s.model, str(s.lines), str(len(s.entries)),
            *span([e.symvars for e in s.entries]), *span([e.facts for e in s.entries]),
            *span([e.millis for e in s.entries], ms))


def report(suites: Sequence[TestSuite], fmt: str = "text") -> str:
    """Statistics table with one row per suite; ``fmt`` is text, csv or tsv."""
    rows = [HEADER] + [_row(s) for s in suites]
    if fmt in ("csv", "tsv"):
        buf = io.StringIO()
        csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n").writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    widths = [max(len(r[i]) for r in rows) for i in range(len(HEADER))]
    lines = []
    for k, r in enumerate(rows):
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
                     .rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def outcome_summary(s: TestSuite) -> str:
    """One line per suite: how many paths were Sat, Unsat within scope, Unsat outright, or exhausted."""
    unsat_any = sum(e.status == UNSAT and e.stage == "presolve" for e in s.entries)
    unsat_scope = sum(e.status == UNSAT and e.stage != "presolve" for e in s.entries)
    other = len(s.entries) - s.sat_count - unsat_any - unsat_scope
    line = (f"{s.model}: {s.sat_count} sat (verified), {unsat_scope} unsat within scope, "
            f"{unsat_any} infeasible at any scope")
    if other:
        line += f", {other} resource exhausted"
    if s.truncated:
        line += f" [path enumeration truncated at {s.bounds.max_paths}]"
    return line


def write_figure(suites: Sequence[TestSuite], out_file: str) -> None:
    """Bar chart of per-path solve time, one panel per suite."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = max(1, len(suites))
    fig, axes = plt.subplots(n, 1, figsize=(7, 2.4 * n), squeeze=False)
    for ax, s in zip(axes[:, 0], suites):
        colors = ["tab:green" if e.status == SAT else "tab:gray" if e.status == UNSAT else "tab:red"
                  for e in s.entries]
        ax.bar([e.index for e in s.entries], [e.millis for e in s.entries], color=colors)
        ax.set_title(f"{s.model} ({len(s.entries)} paths, {s.sat_count} sat)")
        ax.set_xlabel("path")
        ax.set_ylabel("solve ms")
    fig.tight_layout()
    fig.savefig(out_file, dpi=100)
    plt.close(fig)
