"""Bounded model finding for constraint systems."""
from __future__ import annotations

import time
from typing import Mapping, Optional

from ..constraints import ir as I
from ..constraints.evaluate import Assignment, evaluate
from ..interpreter import TestInput
from .encode import run_z3
from .presolve import presolve
from .scope import SAT, UNSAT, Scope, SolveResult


class SolverSelfCheckError(AssertionError):
    """The backend returned a model that violates a fact."""


def check_model(cs: I.ConstraintSystem, a: Assignment, bitwidth: int = 4) -> bool:
    return all(evaluate(f, a, bitwidth) for f in cs.facts)


def extract_test_input(cs: I.ConstraintSystem, a: Assignment) -> TestInput:
    """Input tables sorted by primary key, READ ints and LOAD lists in path order."""
    tables = {}
    reads = []
    loads = []
    for v in cs.inputs:
        if v.is_table:
            pk = cs.table(v.table).pk_index
            tables[v.table] = tuple(sorted(a.values[v.name], key=lambda r: r[pk]))
        elif v.sort == I.LIST:
            loads.append(tuple(a.values[v.name]))
        else:
            reads.append(a.values[v.name])
    ordered = {t.name: tables[t.name] for t in cs.tables if t.name in tables}
    return TestInput(ordered, tuple(reads), tuple(loads))


def solve(cs: I.ConstraintSystem, scope: Scope = Scope(),
          pinned: Optional[Mapping[str, object]] = None) -> SolveResult:
    """Sat with a checked model, Unsat within ``scope``, or resource exhaustion.

    ``pinned`` fixes chosen variables (by name) to given values.
    """
    start = time.perf_counter()
    nvars, nfacts = cs.stats()
    stats = {"symvars": nvars, "facts": nfacts}
    culprit = presolve(cs, scope.bitwidth)
    if culprit is not None:
        from ..constraints.emit import formula_str
        stats["conflict"] = formula_str(culprit)
        return SolveResult(UNSAT, stage="presolve", millis=(time.perf_counter() - start) * 1000.0,
                           stats=stats)
    status, assignment, extra = run_z3(cs, scope, pinned)
    stats.update(extra)
    res = SolveResult(status, stage="search", stats=stats)
    if status == SAT:
        if not check_model(cs, assignment, scope.bitwidth):
            bad = next(f for f in cs.facts if not evaluate(f, assignment, scope.bitwidth))
            from ..constraints.emit import formula_str
            raise SolverSelfCheckError(f"model violates fact {formula_str(bad)}")
        res.assignment = assignment
        res.test_input = extract_test_input(cs, assignment)
    res.millis = (time.perf_counter() - start) * 1000.0
    return res
