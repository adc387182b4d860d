import csv
import io
import json

import pytest

from simpledb_testgen.cli import main
from simpledb_testgen.frontend import load_model
from simpledb_testgen.interpreter import TestInput
from simpledb_testgen.paths import PathBounds
from simpledb_testgen.paths import build_cfg, enumerate_paths
from simpledb_testgen.pipeline import HEADER, generate_tests, report, verify_input
from simpledb_testgen.solver import Scope

from conftest import CORPUS, GOLDEN

EXAMPLE = str(CORPUS / "example.sdb")
CONTRA = str(CORPUS / "contradiction.sdb")


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check(capsys):
    code, out, _ = _run(capsys, "check", EXAMPLE)
    assert code == 0 and "ok (2 tables)" in out


def test_check_reports_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.sdb"
    bad.write_text("MODEL m TABLE t (a,PRIMARY KEY(a)); COMMIT(); x = y; COMMIT(); ENDMODEL")
    code, _, err = _run(capsys, "check", str(bad))
    assert code == 2 and "bad.sdb:" in err


def test_usage_error(capsys):
    assert _run(capsys, "frobnicate")[0] == 1
    assert _run(capsys, "paths")[0] == 1


def test_paths_lines_and_files(tmp_path, capsys):
    code, out, _ = _run(capsys, "paths", EXAMPLE)
    assert code == 0 and len(out.splitlines()) == 31
    _run(capsys, "paths", EXAMPLE, "--out-dir", str(tmp_path), "--loop-bound", "0")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["path0000.json"]


def test_symexec_matches_golden(tmp_path, capsys):
    out = tmp_path / "p.als"
    code, _, _ = _run(capsys, "symexec", EXAMPLE, "--path", str(GOLDEN / "worked_path.json"), "-o", str(out))
    assert code == 0
    assert out.read_text() == (GOLDEN / "worked_path.als").read_text()


def test_symexec_bad_index(capsys):
    code, _, err = _run(capsys, "symexec", EXAMPLE, "--index", "99")
    assert code == 2 and "out of range" in err


def test_solve_writes_input(tmp_path, capsys):
    out = tmp_path / "in.json"
    code, stdout, _ = _run(capsys, "solve", EXAMPLE, "--path", str(GOLDEN / "worked_path.json"),
                           "-o", str(out))
    assert code == 0 and json.loads(stdout)["status"] == "sat"
    assert TestInput.from_json(json.loads(out.read_text()))


def test_verify_pass_and_fail(tmp_path, capsys):
    wp = str(GOLDEN / "worked_path.json")
    code, out, _ = _run(capsys, "verify", EXAMPLE, wp, str(GOLDEN / "reference_input.json"))
    assert (code, out.strip()) == (0, "pass")
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"tables": {"author": [], "play": []}, "reads": [], "loads": [[]]}))
    code, out, _ = _run(capsys, "verify", EXAMPLE, wp, str(empty))
    assert code == 2 and out.startswith("fail at step 0")


def _config(tmp_path, **extra):
    cfg = {"scope": {"max_rows": 2}, "bounds": {"max_loop_iterations": 1}}
    cfg.update(extra)
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(cfg))
    return f


def test_testgen_suite(capsys):
    code, out, err = _run(capsys, "testgen", CONTRA, "--no-timings")
    assert code == 0 and "timings" not in json.loads(out)
    assert "3 sat (verified)" in err and "2 infeasible at any scope" in err


def test_testgen_unsat_only(tmp_path, capsys):
    m = tmp_path / "u.sdb"
    m.write_text("MODEL u TABLE t (a,PRIMARY KEY(a),a > 6); COMMIT(); INSERT INTO t VALUES (1); "
                 "COMMIT(); ENDMODEL")
    code, out, _ = _run(capsys, "testgen", str(m), "--no-exception-paths")
    assert code == 3 and json.loads(out)["tests"][0]["status"] == "unsat"
    assert _run(capsys, "testgen", str(m))[0] == 0


def test_config_unknown_key(tmp_path, capsys):
    code, _, err = _run(capsys, "paths", EXAMPLE, "--config", str(_config(tmp_path, colour=1)))
    assert code == 2 and "colour" in err


def test_config_and_flag_precedence(tmp_path, capsys):
    cfg = _config(tmp_path)
    code, out, _ = _run(capsys, "paths", EXAMPLE, "--config", str(cfg))
    assert len(out.splitlines()) == 31
    code, out, _ = _run(capsys, "paths", EXAMPLE, "--config", str(cfg), "--loop-bound", "0")
    assert len(out.splitlines()) == 1


def test_suite_deterministic_without_timings():
    a = generate_tests(EXAMPLE, PathBounds(max_loop_iterations=1), Scope(seed=3))
    b = generate_tests(EXAMPLE, PathBounds(max_loop_iterations=1), Scope(seed=3))
    assert a.dumps(timings=False) == b.dumps(timings=False)
    assert "timings" in json.loads(a.dumps())
    model = load_model(open(EXAMPLE).read())
    for e in a.entries:
        if e.test_input is not None:
            assert verify_input(model, e.path, e.test_input).ok


def test_report_formats(capsys, tmp_path):
    suite = generate_tests(EXAMPLE, PathBounds(max_loop_iterations=1), name="example")
    text = report([suite])
    head, rule, row = text.splitlines()
    assert head.split()[0] == "Model" and set(rule.replace(" ", "")) == {"-"}
    rows = list(csv.reader(io.StringIO(report([suite], "csv"))))
    assert tuple(rows[0]) == HEADER
    assert rows[1][:3] == ["example", str(suite.lines), "31"]
    assert report([], "tsv") == "\t".join(HEADER) + "\n"
    with pytest.raises(ValueError):
        report([suite], "html")


def test_report_cli_with_figure(tmp_path, capsys):
    fig = tmp_path / "f.png"
    code, out, err = _run(capsys, "report", CONTRA, "--format", "csv", "--figure", str(fig))
    assert code == 0 and out.startswith("Model,Lines,Paths")
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_verify_aborted_path():
    from simpledb_testgen.solver import brute_force_oracle
    m = load_model((CORPUS / "registry.sdb").read_text())
    p = next(p for p in enumerate_paths(build_cfg(m))
             if p.terminal == "abort" and len(p.steps) == 1 and p.steps[0].violation == "PK")
    found = brute_force_oracle(m, p, Scope(bitwidth=3, max_rows=2, max_list_len=1))
    assert found is not None and verify_input(m, p, found).ok


def test_straight_line_suite():
    src = "MODEL s TABLE t (a,PRIMARY KEY(a)); COMMIT(); READ(x); y = (x + 1); COMMIT(); ENDMODEL"
    suite = generate_tests(load_model(src), source=src)
    assert len(suite.entries) == 1 and suite.sat_count == 1 and suite.entries[0].verdict.ok
    assert suite.lines == 1
