"""``sdbtest`` command-line driver.

Exit codes: 0 ok, 1 usage, 2 diagnostics (bad model, path or input file, or a
failed ``verify``), 3 suite with no Sat path, 4 internal soundness failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .constraints import emit_constraints_text
from .frontend import CheckFailed, LexError, ParseError, load_model
from .interpreter import TestInput
from .paths import InvalidStep, Path, PathBounds, build_cfg, enumerate_paths
from .pipeline import (SoundnessError, generate_tests, outcome_summary, report, verify_input,
                       write_figure)
from .solver import Scope, SolverSelfCheckError, solve
from .symexec import PathMismatch, symexec

EXIT_OK, EXIT_USAGE, EXIT_DIAG, EXIT_UNSAT_ONLY, EXIT_SOUNDNESS = 0, 1, 2, 3, 4

_SCOPE_KEYS = ("bitwidth", "max_rows", "max_list_len", "seed", "time_budget")
_BOUND_KEYS = ("max_loop_iterations", "include_exception_paths", "max_paths")


class _Diag(Exception):
    pass


def _settings(args) -> tuple:
    """Scope and PathBounds from the optional config file, overridden by flags."""
    scope_kw, bound_kw = {}, {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _Diag(f"{args.config}: {exc}")
        unknown = set(cfg) - {"scope", "bounds"}
        unknown |= set(cfg.get("scope", {})) - set(_SCOPE_KEYS)
        unknown |= set(cfg.get("bounds", {})) - set(_BOUND_KEYS)
        if unknown:
            raise _Diag(f"{args.config}: unknown keys {sorted(unknown)}")
        scope_kw.update(cfg.get("scope", {}))
        bound_kw.update(cfg.get("bounds", {}))
    for k in _SCOPE_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            scope_kw[k] = v
    for k in _BOUND_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            bound_kw[k] = v
    try:
        return Scope(**scope_kw), PathBounds(**bound_kw)
    except (TypeError, ValueError) as exc:
        raise _Diag(f"bad settings: {exc}")


def _load(path: str, bitwidth: int = 4):
    try:
        with open(path) as fh:
            src = fh.read()
    except OSError as exc:
        raise _Diag(str(exc))
    try:
        m = load_model(src, bitwidth)
    except LexError as exc:
        raise _Diag(f"{path}:{exc.line}:{exc.col}: lex: {exc}")
    except ParseError as exc:
        raise _Diag(f"{path}:{exc.line}:{exc.col}: syntax: {exc}")
    except CheckFailed as exc:
        raise _Diag("\n".join(e.format(path) for e in exc.errors))
    for w in m.warnings:
        print(w.format(path), file=sys.stderr)
    return m


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Diag(f"{path}: {exc}")


def _select_path(args, model, bounds: PathBounds) -> Path:
    if args.path:
        try:
            return Path.from_json(_read_json(args.path))
        except (KeyError, TypeError, ValueError) as exc:
            raise _Diag(f"{args.path}: bad path: {exc}")
    ps = enumerate_paths(build_cfg(model), bounds)
    if not 0 <= args.index < len(ps):
        raise _Diag(f"path index {args.index} out of range (0..{len(ps) - 1})")
    return ps[args.index]


def _symexec(model, path: Path):
    try:
        return symexec(model, path)
    except PathMismatch as exc:
        raise _Diag(f"path does not fit the model: {exc}")


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    m = _load(args.model)
    print(f"{args.model}: ok ({len(m.tables)} tables)")
    return EXIT_OK


def cmd_paths(args) -> int:
    scope, bounds = _settings(args)
    m = _load(args.model, scope.bitwidth)
    ps = enumerate_paths(build_cfg(m), bounds)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for i, p in enumerate(ps):
            with open(os.path.join(args.out_dir, f"path{i:04d}.json"), "w") as fh:
                fh.write(p.dumps() + "\n")
    else:
        for p in ps:
            print(p.dumps())
    if ps.truncated:
        print(f"warning: stopped after {bounds.max_paths} paths", file=sys.stderr)
    return EXIT_OK


def cmd_symexec(args) -> int:
    scope, bounds = _settings(args)
    m = _load(args.model, scope.bitwidth)
    cs = _symexec(m, _select_path(args, m, bounds))
    _write(emit_constraints_text(cs), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    scope, bounds = _settings(args)
    m = _load(args.model, scope.bitwidth)
    path = _select_path(args, m, bounds)
    res = solve(_symexec(m, path), scope)
    out = {"status": res.status, "stage": res.stage, "symvars": res.stats["symvars"],
           "facts": res.stats["facts"], "millis": round(res.millis, 3)}
    if res.sat:
        v = verify_input(m, path, res.test_input, scope.bitwidth)
        if not v.ok:
            print(f"internal error: solver input does not follow the path: {v}", file=sys.stderr)
            return EXIT_SOUNDNESS
        out["input"] = res.test_input.to_json()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(res.test_input.dumps() + "\n")
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_testgen(args) -> int:
    scope, bounds = _settings(args)
    m = _load(args.model, scope.bitwidth)
    with open(args.model) as fh:
        src = fh.read()
    suite = generate_tests(m, bounds, scope, source=src)
    _write(suite.dumps(timings=not args.no_timings), args.out)
    print(outcome_summary(suite), file=sys.stderr)
    if suite.entries and suite.sat_count == 0:
        return EXIT_UNSAT_ONLY
    return EXIT_OK


def cmd_verify(args) -> int:
    scope, _ = _settings(args)
    m = _load(args.model, scope.bitwidth)
    try:
        path = Path.from_json(_read_json(args.path_file))
        inp = TestInput.from_json(_read_json(args.input_file))
    except (KeyError, TypeError, ValueError) as exc:
        raise _Diag(f"bad path or input file: {exc}")
    v = verify_input(m, path, inp, scope.bitwidth)
    print(v)
    return EXIT_OK if v.ok else EXIT_DIAG


def cmd_report(args) -> int:
    scope, bounds = _settings(args)
    suites = []
    for f in args.models:
        m = _load(f, scope.bitwidth)
        with open(f) as fh:
            src = fh.read()
        name = os.path.splitext(os.path.basename(f))[0]
        suites.append(generate_tests(m, bounds, scope, name=name, source=src))
    _write(report(suites, args.format), args.out)
    if args.format == "text":
        for s in suites:
            print(outcome_summary(s), file=sys.stderr)
    if args.figure:
        write_figure(suites, args.figure)
    return EXIT_OK


# ---------------------------------------------------------------- argparse


def _add_settings(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scope and path bounds")
    g.add_argument("--config", help="JSON file with 'scope' and 'bounds' objects")
    g.add_argument("--bitwidth", type=int)
    g.add_argument("--max-rows", type=int, dest="max_rows")
    g.add_argument("--max-list-len", type=int, dest="max_list_len")
    g.add_argument("--seed", type=int)
    g.add_argument("--time-budget", type=float, dest="time_budget", help="seconds per solve")
    g.add_argument("--loop-bound", type=int, dest="max_loop_iterations")
    g.add_argument("--max-paths", type=int, dest="max_paths")
    g.add_argument("--no-exception-paths", action="store_false", dest="include_exception_paths",
                   default=None)


def _add_path_choice(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--path", help="path JSON file")
    g.add_argument("--index", type=int, default=0, help="index into the enumerated paths (default 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdbtest", description="Test input generation for SimpleDB models.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and type-check a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("paths", help="enumerate paths as JSON lines")
    p.add_argument("model")
    p.add_argument("--out-dir", help="write one path file per path instead")
    _add_settings(p)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("symexec", help="emit the constraint system of one path")
    p.add_argument("model")
    _add_path_choice(p)
    p.add_argument("-o", "--out", help="output .als file (default stdout)")
    _add_settings(p)
    p.set_defaults(func=cmd_symexec)

    p = sub.add_parser("solve", help="solve one path and print its test input")
    p.add_argument("model")
    _add_path_choice(p)
    p.add_argument("-o", "--out", help="write the test input JSON here")
    _add_settings(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("testgen", help="generate and verify a test suite")
    p.add_argument("model")
    p.add_argument("-o", "--out", help="suite JSON file (default stdout)")
    p.add_argument("--no-timings", action="store_true", help="omit the timings field")
    _add_settings(p)
    p.set_defaults(func=cmd_testgen)

    p = sub.add_parser("verify", help="replay an input and compare its trace with a path")
    p.add_argument("model")
    p.add_argument("path_file")
    p.add_argument("input_file")
    _add_settings(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="statistics table over one or more models")
    p.add_argument("models", nargs="+")
    p.add_argument("--format", choices=("text", "csv", "tsv"), default="text")
    p.add_argument("-o", "--out", help="table output file (default stdout)")
    p.add_argument("--figure", help="also write a PNG of per-path solve times")
    _add_settings(p)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except _Diag as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except InvalidStep as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except (SoundnessError, SolverSelfCheckError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_SOUNDNESS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
