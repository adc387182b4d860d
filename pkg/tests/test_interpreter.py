import copy

import pytest

from simpledb_testgen.frontend import ast as A
from simpledb_testgen.frontend import load_model
from simpledb_testgen.interpreter import (DbState, InputUnderflow, InvalidInput, ProgramRuntimeError,
                                          TestInput, apply_db_write, div_trunc, exec_select, run,
                                          wrap)

TWO_TABLES = """MODEL m
TABLE author (name,numberOfPlays,PRIMARY KEY(name),numberOfPlays > 0);
TABLE play (title,theAuthor,PRIMARY KEY(title),FOREIGN KEY(theAuthor) REFERENCES author);
COMMIT(); COMMIT(); ENDMODEL"""


@pytest.fixture(scope="module")
def schema():
    return load_model(TWO_TABLES)


def _model(body, tables="TABLE t (a,b,PRIMARY KEY(a));"):
    return load_model(f"MODEL m {tables} COMMIT(); {body} COMMIT(); ENDMODEL")


def test_arithmetic_helpers():
    assert wrap(8, 4) == -8 and wrap(-9, 4) == 7 and wrap(3, 4) == 3
    assert div_trunc(-7, 2) == -3 and div_trunc(7, -2) == -3 and div_trunc(5, 0) == 0


def test_reference_input_follows_worked_path(example, reference_input):
    res = run(example, reference_input)
    assert res.outcome == "normal"
    assert res.db == {"author": ((7, 1),), "play": ((7, 7),)}


def test_empty_load_skips_loop(example):
    inp = TestInput({"author": ((1, 2),), "play": ((3, 1),)}, (), ((),))
    res = run(example, inp)
    assert [str(s) for s in res.trace.steps] == ["2:exit"]
    assert res.db == inp.tables


def test_uncaught_duplicate_insert_aborts():
    m = _model("INSERT INTO t VALUES (1,2); COMMIT(); INSERT INTO t VALUES (1,3);")
    res = run(m, TestInput({"t": ()}))
    assert res.outcome == "abort" and res.abort_stmt == 3 and res.violation == "PK"
    assert res.db == {"t": ((1, 2),)}  # first insert was committed


def test_abort_discards_uncommitted_writes():
    m = _model("INSERT INTO t VALUES (2,2); INSERT INTO t VALUES (1,3);")
    res = run(m, TestInput({"t": ((1, 0),)}))
    assert res.outcome == "abort" and res.db == {"t": ((1, 0),)}


def test_select_sorted_by_pk(schema):
    db = DbState.initial(schema, {"author": ((3, 1), (1, 2))})
    assert exec_select(schema, db, "author", A.BoolLit(True), {}) == ((1, 2), (3, 1))
    assert exec_select(schema, db, "author", A.BoolLit(False), {}) == ()


def test_select_where_binds_attribute_first(schema):
    db = DbState.initial(schema, {"author": ((3, 1), (1, 2))})
    where = A.Compare("=", A.VarRef("name"), A.VarRef("name"))
    assert exec_select(schema, db, "author", where, {"name": 5}) == ((1, 2), (3, 1))
    where = A.Compare(">", A.VarRef("numberOfPlays"), A.VarRef("k"))
    assert exec_select(schema, db, "author", where, {"k": 1}) == ((1, 2),)


def test_insert_ok(schema):
    db = DbState.initial(schema, {})
    new = apply_db_write(schema, db, A.Insert("author", (A.IntLit(7), A.IntLit(1))), {})
    assert new.working["author"] == {7: (7, 1)}
    assert db.working["author"] == {}


def test_insert_arith_violation(schema):
    db = DbState.initial(schema, {})
    assert apply_db_write(schema, db, A.Insert("author", (A.IntLit(7), A.IntLit(0))), {}) == "ARITH:0"


def test_insert_fk_violation(schema):
    db = DbState.initial(schema, {})
    assert apply_db_write(schema, db, A.Insert("play", (A.IntLit(1), A.IntLit(7))), {}) == "FK:author"


def test_delete_referenced_row(schema):
    db = DbState.initial(schema, {"author": ((7, 1),), "play": ((1, 7),)})
    before = copy.deepcopy(db.working)
    op = A.Delete("author", A.Compare("=", A.VarRef("name"), A.IntLit(7)))
    assert apply_db_write(schema, db, op, {}) == "REFROW"
    assert db.working == before


def test_update_rewrites_matching_rows(schema):
    db = DbState.initial(schema, {"author": ((1, 1), (2, 5))})
    op = A.Update("author", "numberOfPlays", A.BinOp("+", A.VarRef("numberOfPlays"), A.IntLit(1)),
                  A.Compare("<", A.VarRef("name"), A.IntLit(2)))
    assert apply_db_write(schema, db, op, {}).working["author"] == {1: (1, 2), 2: (2, 5)}


def test_update_wraparound_violates_arith(schema):
    db = DbState.initial(schema, {"author": ((1, 7),)})
    op = A.Update("author", "numberOfPlays", A.BinOp("+", A.VarRef("numberOfPlays"), A.IntLit(1)),
                  A.BoolLit(True))
    assert apply_db_write(schema, db, op, {}) == "ARITH:0"  # 7 + 1 wraps to -8


def test_update_pk_collision(schema):
    db = DbState.initial(schema, {"author": ((1, 1), (2, 1))})
    op = A.Update("author", "name", A.IntLit(2), A.Compare("=", A.VarRef("name"), A.IntLit(1)))
    assert apply_db_write(schema, db, op, {}) == "PK"


def test_zero_row_update_never_violates(schema):
    db = DbState.initial(schema, {"author": ((1, 1),)})
    op = A.Update("author", "numberOfPlays", A.IntLit(0), A.BoolLit(False))
    assert apply_db_write(schema, db, op, {}).working == db.working


def test_cursor_walk_and_catch():
    m = _model("c = SELECT a FROM t WHERE TRUE; NEXT(c); x = c(b); e = CATCH(NEXT(c)); "
               "IF (e = 1) THEN y = 0; ELSE y = c(b); ENDIF;")
    res = run(m, TestInput({"t": ((2, 5), (1, 4))}))
    assert [str(s) for s in res.trace.steps] == ["2:ok", "4:ok", "5:F"]
    res = run(m, TestInput({"t": ((1, 4),)}))
    assert [str(s) for s in res.trace.steps] == ["2:ok", "4:exn", "5:T"]


def test_uncaught_next_on_empty_result():
    m = _model("c = SELECT a FROM t WHERE TRUE; NEXT(c);")
    res = run(m, TestInput({"t": ()}))
    assert res.outcome == "abort" and res.abort_stmt == 2 and res.violation is None


def test_cursor_read_before_next():
    m = _model("c = SELECT a FROM t WHERE TRUE; x = c(a);")
    with pytest.raises(ProgramRuntimeError):
        run(m, TestInput({"t": ((1, 1),)}))


def test_head_of_nil():
    m = _model("l = NIL; x = l.HEAD;", tables="")
    with pytest.raises(ProgramRuntimeError):
        run(m, TestInput())


def test_input_underflow():
    m = _model("READ(x); READ(y);", tables="")
    with pytest.raises(InputUnderflow):
        run(m, TestInput(reads=(1,)))


def test_invalid_input_rejected(schema):
    with pytest.raises(InvalidInput):
        run(schema, TestInput({"author": ((1, 1), (1, 2))}))  # duplicate PK
    with pytest.raises(InvalidInput):
        run(schema, TestInput({"author": ((1, 0),)}))  # arithmetic constraint
    with pytest.raises(InvalidInput):
        run(schema, TestInput({"play": ((1, 9),)}))  # dangling FK
    with pytest.raises(InvalidInput):
        run(schema, TestInput({"author": ((9, 1),)}))  # out of 4-bit range


def test_rollback_restores_last_commit():
    m = _model("INSERT INTO t VALUES (1,1); COMMIT(); INSERT INTO t VALUES (2,2); ROLLBACK(); "
               "c = SELECT a FROM t WHERE TRUE; NEXT(c); e = CATCH(NEXT(c));")
    res = run(m, TestInput({"t": ()}))
    assert [str(s) for s in res.trace.steps] == ["1:ok", "3:ok", "6:ok", "7:exn"]
    assert res.db == {"t": ((1, 1),)}


def test_list_operations_and_wrap():
    m = _model("LOAD(l); k = [(l.HEAD * 4), l.TAIL]; r = k.TAIL; IF ((k.HEAD = (- 8)) && (r = NIL)) THEN "
               "x = 1; ELSE x = 2; ENDIF;", tables="")
    assert [str(s) for s in run(m, TestInput(loads=((2,),))).trace.steps] == ["4:T"]
    assert [str(s) for s in run(m, TestInput(loads=((2, 1),))).trace.steps] == ["4:F"]


def test_exec_result_json(example, reference_input):
    obj = run(example, reference_input).to_json()
    assert obj["outcome"] == "normal" and obj["terminal"] == "exit"
    assert obj["db"] == {"author": [[7, 1]], "play": [[7, 7]]}


def test_input_json_round_trip(reference_input):
    assert TestInput.from_json(reference_input.to_json()) == reference_input
