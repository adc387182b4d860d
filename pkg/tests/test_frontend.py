import pytest

from simpledb_testgen.frontend import (CheckFailed, LexError, ParseError, check, load_model, parse,
                                       parse_source, pretty_print, tokenize)
from simpledb_testgen.frontend import ast as A
from simpledb_testgen.frontend.checker import INT, LIST, table_type

from conftest import CORPUS_FILES

MINIMAL = "MODEL m COMMIT(); COMMIT(); ENDMODEL"


def test_tokenize_header():
    assert [repr(t) for t in tokenize("MODEL example")] == ["KW_MODEL", "IDENT('example')"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_natural_glued_to_identifier_is_rejected():
    with pytest.raises(LexError):
        tokenize("42abc")


def test_bad_character_position():
    with pytest.raises(LexError) as err:
        tokenize("MODEL m\n  @")
    assert (err.value.line, err.value.col, err.value.char) == (2, 3, "@")


def test_keywords_are_reserved():
    with pytest.raises(ParseError):
        parse_source("MODEL m COMMIT(); WHILE = 1; COMMIT(); ENDMODEL")


def test_minimal_model():
    m = parse_source(MINIMAL)
    assert m.name == "m" and m.tables == () and m.program == ()
    assert (m.opening.stmt_id, m.closing.stmt_id) == (0, 1)


def test_missing_commits():
    with pytest.raises(ParseError):
        parse_source("MODEL m ENDMODEL")
    with pytest.raises(ParseError):
        parse_source("MODEL m COMMIT(); x = 1; ENDMODEL")


def test_parse_error_reports_expected_set():
    with pytest.raises(ParseError) as err:
        parse_source("MODEL m COMMIT(); IF (x = 1) DO COMMIT(); ENDMODEL")
    assert "THEN" in err.value.expected


def test_example_structure(example):
    m = example.model
    assert m.name == "example"
    assert [t.name for t in m.tables] == ["author", "play"]
    assert len(list(A.iter_stmts(m.program))) == 14
    ids = [s.stmt_id for s in A.all_stmts(m)]
    assert ids == list(range(len(ids)))
    play = m.table("play")
    assert play.primary_key == "title"
    assert play.foreign_keys == (A.ForeignKey("theAuthor", "author"),)
    assert m.table("author").arith_constraints == (A.ArithConstraint("numberOfPlays", ">", 0),)


def test_example_types(example):
    t = example.var_types
    assert t["newPlays"] == LIST and t["authorName"] == INT
    assert t["authors"] == table_type("author")
    assert t["isEmpty"] == INT and t["error"] == INT


def _errors(src):
    with pytest.raises(CheckFailed) as err:
        load_model(src)
    return {e.rule for e in err.value.errors}


def test_fk_cycle():
    src = """MODEL m
    TABLE a (x,y,PRIMARY KEY(x),FOREIGN KEY(y) REFERENCES b);
    TABLE b (x,y,PRIMARY KEY(x),FOREIGN KEY(y) REFERENCES a);
    COMMIT(); COMMIT(); ENDMODEL"""
    assert "fk-cycle" in _errors(src)


def test_type_change():
    assert "type-change" in _errors("MODEL m COMMIT(); x = 1; x = NIL; COMMIT(); ENDMODEL")


def test_scope_violation():
    src = "MODEL m COMMIT(); IF TRUE THEN x = 1; ELSE x = 2; ENDIF; y = x; COMMIT(); ENDMODEL"
    assert "unbound-variable" in _errors(src)


@pytest.mark.parametrize("body,rule", [
    ("INSERT INTO t VALUES (1);", "insert-arity"),
    ("INSERT INTO nope VALUES (1);", "unknown-table"),
    ("c = SELECT zz FROM t WHERE TRUE;", "unknown-attribute"),
    ("x = 1; NEXT(x);", "not-a-cursor"),
    ("x = 1; y = x(a);", "not-a-cursor"),
    ("l = NIL; x = (l + 1);", "type-mismatch"),
])
def test_statement_rules(body, rule):
    src = f"MODEL m TABLE t (a,b,PRIMARY KEY(a)); COMMIT(); {body} COMMIT(); ENDMODEL"
    assert rule in _errors(src)


def test_attribute_shadows_program_variable():
    src = """MODEL m TABLE t (a,PRIMARY KEY(a)); COMMIT();
    l = NIL; a = l; c = SELECT a FROM t WHERE (a = 1); COMMIT(); ENDMODEL"""
    m = load_model(src)  # 'a' is a list variable but names the attribute inside the WHERE
    assert m.var_types["a"] == LIST


def test_wide_literal_is_a_warning():
    m = load_model("MODEL m COMMIT(); x = 9; COMMIT(); ENDMODEL")
    assert [w.rule for w in m.warnings] == ["literal-width"]


def test_diagnostics_are_deterministic():
    src = "MODEL m COMMIT(); y = x; z = w; COMMIT(); ENDMODEL"
    with pytest.raises(CheckFailed) as a:
        load_model(src)
    with pytest.raises(CheckFailed) as b:
        load_model(src)
    assert a.value.errors == b.value.errors and len(a.value.errors) == 2


def test_pretty_print_minimal():
    assert " ".join(pretty_print(parse_source(MINIMAL)).split()) == MINIMAL


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    m = parse_source(path.read_text())
    again = parse(tokenize(pretty_print(m)))
    assert again == m
    check(again)
