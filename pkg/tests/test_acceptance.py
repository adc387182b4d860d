"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import time

from simpledb_testgen.constraints import emit_constraints_text, normalize
from simpledb_testgen.constraints.evaluate import Assignment
from simpledb_testgen.paths import PathBounds, build_cfg, enumerate_paths
from simpledb_testgen.pipeline import HEADER, generate_tests, report, verify, verify_input
from simpledb_testgen.randmodel import GenConfig, random_model
from simpledb_testgen.solver import UNSAT, Scope, brute_force_oracle, check_model, solve
from simpledb_testgen.symexec import symexec

from conftest import CORPUS, CORPUS_FILES, GOLDEN, load_corpus
from test_solver import REFERENCE_VALUES


def _line(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_c1_worked_example_golden(capsys, example, worked_path):
    start = time.perf_counter()
    doc = emit_constraints_text(symexec(example, worked_path))
    secs = time.perf_counter() - start
    got = normalize(doc)
    reference = normalize((GOLDEN / "reference_listing.als").read_text())
    missing = [p for p in reference if p not in got]
    ok = doc == (GOLDEN / "worked_path.als").read_text() and not missing and secs < 1.0
    _line(capsys, 1, ok, f"golden diff-free, {len(missing)} reference paragraphs missing, {secs:.3f} s")


def test_c2_reference_solution(capsys, example, worked_path):
    cs = symexec(example, worked_path)
    checked = check_model(cs, Assignment.for_system(cs, REFERENCE_VALUES))
    v = verify(str(CORPUS / "example.sdb"), str(GOLDEN / "worked_path.json"),
               str(GOLDEN / "reference_input.json"))
    _line(capsys, 2, checked and v.ok, f"check_model={checked}, verify={v}")


def test_c3_random_soundness(capsys):
    start = time.perf_counter()
    models = paths = sats = 0
    failures = []
    for seed in range(100):
        m = random_model(seed, GenConfig(max_tables=2, max_attrs=3, max_stmts=12))
        models += 1
        ps = enumerate_paths(build_cfg(m), PathBounds(max_loop_iterations=2, max_paths=10**6))
        assert not ps.truncated
        for p in ps:
            paths += 1
            res = solve(symexec(m, p))
            if res.sat:
                sats += 1
                if not verify_input(m, p, res.test_input).ok:
                    failures.append((seed, str(p)))
    secs = time.perf_counter() - start
    _line(capsys, 3, not failures and secs < 600,
          f"{models} models, {paths} paths, {sats} sat, {len(failures)} unverified, {secs:.1f} s")


ORACLE_SCOPE = Scope(bitwidth=3, max_rows=2, max_list_len=2)
# exhaustive search is exponential in attributes and inputs, so these stay small
ORACLE_MODELS = (GenConfig(max_tables=1, max_attrs=2, bitwidth=3, max_inputs=2),
                 GenConfig(max_tables=2, max_attrs=1, bitwidth=3, max_inputs=2))


def _disagreements(m, bound):
    out, n = [], 0
    for p in enumerate_paths(build_cfg(m), PathBounds(max_loop_iterations=bound)):
        n += 1
        sat = solve(symexec(m, p), ORACLE_SCOPE).sat
        if sat != (brute_force_oracle(m, p, ORACLE_SCOPE) is not None):
            out.append(str(p))
    return n, out


def test_c4_oracle_equivalence(capsys):
    total, bad = 0, []
    for f in CORPUS_FILES:
        n, d = _disagreements(load_corpus(f.name), 1)
        total += n
        bad += d
    for seed in range(1000, 1050):
        n, d = _disagreements(random_model(seed, ORACLE_MODELS[seed % 2]), 1)
        total += n
        bad += d
    _line(capsys, 4, not bad, f"{total} paths over {len(CORPUS_FILES)} corpus + 50 random models, "
                              f"{len(bad)} disagreements")


def test_c5_infeasible_branch(capsys):
    suite = generate_tests(str(CORPUS / "contradiction.sdb"))
    pre = [e for e in suite.entries if e.status == UNSAT and e.stage == "presolve"]
    searched = [e for e in suite.entries if e.status == UNSAT and e.stage != "presolve"]
    ok = len(pre) == 2 and not searched and all(e.to_json()["scope_independent"] for e in pre)
    _line(capsys, 5, ok, f"{len(pre)} paths unsat at presolve, {len(searched)} needed search")


def test_c6_statistics(capsys, example, worked_path):
    stats = symexec(example, worked_path).stats()
    suite = generate_tests(str(CORPUS / "example.sdb"), PathBounds(max_loop_iterations=1), name="example")
    lines = report([suite]).splitlines()
    header_ok = lines[0].split("  ")[0] == "Model" and all(h in lines[0] for h in HEADER)
    rows = report([suite, suite, suite], "csv").splitlines()
    ok = stats == (11, 19) and header_ok and len(lines) == 3 and len(rows) == 4
    _line(capsys, 6, ok, f"worked path symvars/facts={stats}, {len(HEADER)} columns")


def test_c7_corpus_performance(capsys):
    worst = 0.0
    for f in CORPUS_FILES:
        suite = generate_tests(str(f))
        worst = max([worst] + [e.millis for e in suite.entries])
    _line(capsys, 7, worst < 60000, f"slowest corpus solve {worst / 1000:.2f} s")
