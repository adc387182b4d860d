import pytest

from simpledb_testgen.constraints import ir as I
from simpledb_testgen.constraints import (Assignment, SortMismatch, emit_constraints_text, eval_term,
                                          evaluate, formula_str, free_input_vars, normalize, term_str)
from simpledb_testgen.constraints.emit import canonical_names, sort_block, split_paragraphs
from simpledb_testgen.frontend import load_model
from simpledb_testgen.paths import Path, build_cfg, enumerate_paths
from simpledb_testgen.symexec import symexec

from conftest import GOLDEN

X = I.SymVar("xINPUTPROG1", I.INT, I.INPUT)
L = I.SymVar("lINPUTPROG1", I.LIST, I.INPUT)
T = I.SymVar("tINPUTDB1", I.table_type("t"), I.INPUT)
R = I.SymVar("rINTERNALPROG1", I.table_type("t"))


def _a(**values):
    sorts = {X.name: X.sort, L.name: L.sort, T.name: T.sort, R.name: R.sort}
    names = {"x": X.name, "l": L.name, "t": T.name, "r": R.name}
    return Assignment({names[k]: v for k, v in values.items()}, sorts)


def test_tautology_under_empty_assignment():
    assert evaluate(I.TRUE, Assignment({})) is True
    assert evaluate(I.FALSE, Assignment({})) is False


def test_cardinality():
    f = I.Card("=", R, 0)
    assert evaluate(f, _a(r=frozenset())) is True
    assert evaluate(f, _a(r=frozenset({(1, 2)}))) is False


def test_wraparound_and_division():
    add = I.Arith("add", I.Var(X), I.Lit(1))
    assert eval_term(add, _a(x=7)) == -8
    assert eval_term(I.Arith("div", I.Var(X), I.Lit(0)), _a(x=5)) == 0
    assert eval_term(I.Arith("div", I.Var(X), I.Lit(2)), _a(x=-7)) == -3
    assert eval_term(I.Negate(I.Var(X)), _a(x=-8)) == -8


def test_undefined_head_makes_comparisons_false():
    f = I.Cmp("=", I.ListHead(I.Var(L)), I.Lit(0))
    assert evaluate(f, _a(l=())) is False
    assert evaluate(I.Not(f), _a(l=())) is True
    assert evaluate(I.IsNil(I.Var(L)), _a(l=())) is True


def test_min_row_and_drop_min():
    new = I.SymVar("rINTERNALPROG2", I.table_type("t"))
    rows = frozenset({(3, 0), (1, 5)})
    a = Assignment({R.name: rows, new.name: frozenset({(3, 0)})},
                   {R.name: R.sort, new.name: new.sort})
    assert eval_term(I.Field(I.MinRow(R, "a", 0), "b", 1), a) == 5
    assert evaluate(I.DropMin(new, R, "a", 0), a)


def test_quantifiers_over_variable_and_sort():
    q = I.Quant("all", ("e",), "t", T, I.Cmp(">", I.Field(I.Bound("e", "t"), "b", 1), I.Lit(0)))
    assert evaluate(q, _a(t=frozenset({(1, 1), (2, 3)})))
    assert not evaluate(q, _a(t=frozenset({(1, 1), (2, 0)})))
    sort_q = I.Quant("no", ("e",), "t", None, I.Cmp("=", I.Field(I.Bound("e", "t"), "a", 0), I.Lit(4)))
    a = Assignment({T.name: frozenset()}, {T.name: T.sort}, universe={"t": frozenset({(4, 4)})})
    assert not evaluate(sort_q, a)


def test_disjoint_pairs():
    pk = I.Quant("all", ("a", "b"), "t", T,
                 I.Not(I.Cmp("=", I.Field(I.Bound("a", "t"), "a", 0), I.Field(I.Bound("b", "t"), "a", 0))),
                 disj=True)
    assert evaluate(pk, _a(t=frozenset({(1, 1), (2, 1)})))
    assert not evaluate(pk, _a(t=frozenset({(1, 1), (1, 2)})))


def test_sort_mismatch():
    with pytest.raises(SortMismatch):
        evaluate(I.IsNil(I.Var(L)), _a(l=5))


def test_rendering():
    assert formula_str(I.TRUE) == "(0=0)" and formula_str(I.FALSE) == "(0=1)"
    assert formula_str(I.Card("=", R, 0)) == "#rINTERNALPROG1=0"
    assert formula_str(I.Not(I.IsNil(I.Var(L)))) == "!(lINPUTPROG1 = Nil)"
    assert term_str(I.Arith("add", I.Var(X), I.Lit(1))) == "xINPUTPROG1.add[1]"
    assert term_str(I.ListTail(I.Var(L))) == "lINPUTPROG1.tail"


def test_author_sort_block(example):
    assert sort_block(example.table("author"))[1:5] == [
        "sig author{name : Int,numberOfPlays : Int}",
        "pred equalauthor[a:author,b: author]",
        "{a.name = b.name && a.numberOfPlays = b.numberOfPlays}",
        "fact{all disj a,b: author | !equalauthor[a,b]}",
    ]


def test_list_sort_lines(example, worked_path):
    text = emit_constraints_text(symexec(example, worked_path))
    assert "one sig Nil {}\nsig List {head: Int,tail: List + Nil}\n" in text


def test_empty_system():
    cs = symexec(load_model("MODEL m COMMIT(); COMMIT(); ENDMODEL"), Path(()))
    assert emit_constraints_text(cs) == "module m\nassert inputsExist {!((0=0)) }\ncheck inputsExist\n"


def test_fact_dedup():
    cs = I.ConstraintSystem("m", ())
    assert cs.add(I.Card("=", R, 0)) is True
    assert cs.add(I.Card("=", R, 0)) is False
    assert cs.stats() == (0, 1)


def test_free_inputs_of_worked_path(example, worked_path):
    names = [v.name for v in free_input_vars(symexec(example, worked_path))]
    assert sorted(names) == sorted(["playINPUTDB1", "authorINPUTDB2", "newplaysINPUTPROG1",
                                    "authornameINPUTPROG2"])


def test_free_inputs_reads():
    m = load_model("MODEL m COMMIT(); READ(a); READ(b); COMMIT(); ENDMODEL")
    vs = free_input_vars(symexec(m, Path(())))
    assert [v.sort for v in vs] == [I.INT, I.INT]
    assert free_input_vars(symexec(load_model("MODEL m COMMIT(); COMMIT(); ENDMODEL"), Path(()))) == []


def test_canonical_names_renumber_per_kind():
    text = "xINPUTPROG7 yINTERNALPROG3 xINPUTPROG7 tINPUTDB9"
    assert canonical_names(text) == "xINPUTPROG1 yINTERNALPROG1 xINPUTPROG1 tINPUTDB1"


def test_split_paragraphs_ignores_layout():
    a = split_paragraphs("fact{all e:t |\n   e.a = 1}\ncheck inputsExist")
    b = split_paragraphs("fact{all e:t | e.a=1} check   inputsExist")
    assert a == b == ["fact{alle:t|e.a=1}", "checkinputsExist"]


def test_reference_listing_normalizes_to_golden():
    golden = normalize((GOLDEN / "worked_path.als").read_text())
    reference = normalize((GOLDEN / "reference_listing.als").read_text())
    assert golden == reference


def test_distinct_systems_emit_distinct_documents(example):
    docs = {tuple(normalize(emit_constraints_text(symexec(example, p))))
            for p in enumerate_paths(build_cfg(example))}
    assert len(docs) == 31
