import pytest
from hypothesis import given, settings, strategies as st

from simpledb_testgen.constraints import ir as I
from simpledb_testgen.constraints.evaluate import Assignment
from simpledb_testgen.frontend import load_model
from simpledb_testgen.interpreter import TestInput, run
from simpledb_testgen.paths import PathBounds, build_cfg, enumerate_paths, path_of_trace
from simpledb_testgen.solver import (EXHAUSTED, SAT, UNSAT, Scope, brute_force_oracle, check_model,
                                     solve)
from simpledb_testgen.symexec import symexec

from conftest import CORPUS


def _system(*facts, sort=I.INT):
    cs = I.ConstraintSystem("m", ())
    x = cs.declare(I.SymVar("x", sort, I.INPUT))
    for f in facts:
        cs.add(f(I.Var(x)))
    return cs


def test_trivial_sat():
    res = solve(_system(lambda x: I.Cmp("=", x, I.Lit(3))))
    assert res.status == SAT and res.assignment.values["x"] == 3
    assert res.test_input == TestInput({}, (3,), ())


def test_contradiction_is_unsat():
    res = solve(_system(lambda x: I.Cmp("=", x, I.Lit(1)), lambda x: I.Cmp("=", x, I.Lit(2))))
    assert res.status == UNSAT


def test_wraparound_is_modelled():
    # only wrapping makes x + 1 < x true
    res = solve(_system(lambda x: I.Cmp("<", I.Arith("add", x, I.Lit(1)), x)), Scope(bitwidth=4))
    assert res.sat and res.assignment.values["x"] == 7


def test_list_length_scope():
    third = lambda x: I.ListHead(I.ListTail(I.ListTail(x)))  # noqa: E731
    cs = _system(lambda x: I.Cmp("=", third(x), third(x)), sort=I.LIST)
    assert solve(cs, Scope(max_list_len=2)).unsat
    res = solve(cs, Scope(max_list_len=3))
    assert res.sat and len(res.assignment.values["x"]) == 3


def test_worked_path_sat(example, worked_path):
    res = solve(symexec(example, worked_path))
    assert res.sat
    assert path_of_trace(run(example, res.test_input).trace) == worked_path


REFERENCE_VALUES = {
    "authorINPUTDB2": set(), "playINPUTDB1": set(),
    "newplaysINPUTPROG1": (7,), "errorINTERNALPROG1": 0, "authornameINPUTPROG2": 7,
    "authorsINTERNALPROG2": set(), "isemptyINTERNALPROG3": 1,
    "authorINTERNALDB1": {(7, 1)}, "playINTERNALDB2": {(7, 7)},
    "errorINTERNALPROG4": 0, "newplaysINTERNALPROG5": (),
}


def test_reference_assignment_checks(example, worked_path):
    cs = symexec(example, worked_path)
    assert set(REFERENCE_VALUES) == {v.name for v in cs.vars}
    assert check_model(cs, Assignment.for_system(cs, REFERENCE_VALUES))


def test_perturbed_assignment_fails(example, worked_path):
    cs = symexec(example, worked_path)
    bad = dict(REFERENCE_VALUES, playINTERNALDB2={(7, 6)})
    assert not check_model(cs, Assignment.for_system(cs, bad))


def test_empty_tables_cannot_yield_a_row():
    m = load_model("""MODEL m TABLE t (a,PRIMARY KEY(a)); COMMIT();
        c = SELECT a FROM t WHERE TRUE; e = CATCH(NEXT(c)); COMMIT(); ENDMODEL""")
    p = next(p for p in enumerate_paths(build_cfg(m)) if p.steps[0].decision == "ok")
    cs = symexec(m, p)
    empty = {v.name: (set() if v.is_table else 0) for v in cs.vars}
    assert not check_model(cs, Assignment.for_system(cs, empty))
    assert solve(cs).sat


def test_pinned_values_are_respected(example, worked_path):
    cs = symexec(example, worked_path)
    res = solve(cs, pinned={"authornameINPUTPROG2": 3})
    assert res.sat and res.test_input.reads == (3,)


def test_deterministic(example):
    p = enumerate_paths(build_cfg(example))[16]
    a = solve(symexec(example, p), Scope(seed=5))
    b = solve(symexec(example, p), Scope(seed=5))
    assert a.test_input == b.test_input


def test_exhausted_on_tiny_budget(monkeypatch):
    import z3
    monkeypatch.setattr(z3.Solver, "check", lambda self, *a: z3.unknown)
    res = solve(_system(lambda x: I.Cmp("=", x, I.Lit(3))), Scope(time_budget=0.001))
    assert res.status == EXHAUSTED and res.test_input is None


def _corpus_paths(name):
    m = load_model((CORPUS / name).read_text())
    return m, list(enumerate_paths(build_cfg(m), PathBounds(max_loop_iterations=1)))


@pytest.mark.parametrize("name", ["lists.sdb", "contradiction.sdb"])
def test_agrees_with_oracle(name):
    m, paths = _corpus_paths(name)
    sc = Scope(bitwidth=3, max_rows=2, max_list_len=2)
    for p in paths:
        res = solve(symexec(m, p), sc)
        assert res.sat == (brute_force_oracle(m, p, sc) is not None), str(p)


def test_monotone_in_scope():
    m, paths = _corpus_paths("lists.sdb")
    small, large = Scope(max_rows=1, max_list_len=1), Scope(max_rows=3, max_list_len=3)
    for p in paths:
        cs = symexec(m, p)
        if solve(cs, small).sat:
            assert solve(cs, large).sat


@settings(max_examples=30, deadline=None)
@given(st.integers(-8, 7), st.integers(-8, 7))
def test_solution_satisfies_random_equations(a, b):
    # x * a == b within 4-bit arithmetic
    res = solve(_system(lambda x: I.Cmp("=", I.Arith("mul", x, I.Lit(a)), I.Lit(b))))
    if res.sat:
        x = res.assignment.values["x"]
        assert ((x * a + 8) % 16) - 8 == b
    else:
        assert all(((x * a + 8) % 16) - 8 != b for x in range(-8, 8))


def test_oracle_straight_line():
    m = load_model("MODEL m TABLE t (a,PRIMARY KEY(a)); COMMIT(); READ(x); COMMIT(); ENDMODEL")
    p = enumerate_paths(build_cfg(m))[0]
    assert brute_force_oracle(m, p, Scope(bitwidth=3)) == TestInput({"t": ()}, (-4,), ())


def test_oracle_contradiction():
    m = load_model("MODEL m TABLE t (a,PRIMARY KEY(a)); COMMIT(); READ(x); "
                   "IF ((x = 1) && (x = 2)) THEN x = 0; ELSE ENDIF; COMMIT(); ENDMODEL")
    p = next(p for p in enumerate_paths(build_cfg(m)) if p.steps[0].decision == "T")
    assert brute_force_oracle(m, p, Scope(bitwidth=3)) is None
    assert solve(symexec(m, p)).unsat


def test_oracle_worked_path(example, worked_path):
    sc = Scope(bitwidth=4, max_rows=1, max_list_len=2)
    found = brute_force_oracle(example, worked_path, sc)
    assert found is not None
    assert path_of_trace(run(example, found).trace) == worked_path
    assert solve(symexec(example, worked_path), sc).sat
