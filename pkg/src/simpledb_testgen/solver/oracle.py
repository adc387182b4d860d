"""Exhaustive search for an in-scope input that drives a model along a path.

Independent of the constraint machinery: it only runs the interpreter.  Input
values are chosen lazily, the first time the program consumes them, and a
partial run stops as soon as its trace leaves the target path.  Tables are
chosen when first touched, after the tables they reference.

The scope matches the solver's: every value fits the bitwidth, each table
holds at most ``max_rows`` distinct rows over the whole run (initial rows plus
every row a write produces) and no list value is longer than ``max_list_len``.
"""
from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Tuple

from ..frontend.checker import CheckedModel
from ..interpreter import (InputSource, Machine, ProgramRuntimeError, TestInput, compare,
                           int_range)
from ..paths import ABORT, EXIT, Path, PathStep
from .scope import Scope


class _NeedChoice(Exception):
    def __init__(self, options: list):
        self.options = options


class _Diverged(Exception):
    pass


def _table_options(model: CheckedModel, name: str, chosen: Dict[str, tuple], scope: Scope):
    t = model.table(name)
    rng = list(int_range(scope.bitwidth))
    allowed = []
    for col, attr in enumerate(t.attributes):
        vals = [v for v in rng if all(compare(c.op, v, c.value) for c in t.arith_constraints
                                      if c.attribute == attr)]
        for fk in t.foreign_keys:
            if fk.attribute == attr:
                ref = model.table(fk.table)
                keys = {r[ref.pk_index] for r in chosen[fk.table]}
                vals = [v for v in vals if v in keys]
        allowed.append(vals)
    rows = sorted(itertools.product(*allowed), key=lambda r: (r[t.pk_index], r))
    out = [()]
    for size in range(1, scope.max_rows + 1):
        for combo in itertools.combinations(rows, size):
            keys = [r[t.pk_index] for r in combo]
            if len(set(keys)) == size:
                out.append(tuple(sorted(combo, key=lambda r: r[t.pk_index])))
    return out


class _ChoiceSource(InputSource):
    """Replays a prefix of choices; asks for a new choice when the prefix runs out."""

    def __init__(self, model: CheckedModel, scope: Scope, prefix: List[object], cache: dict):
        super().__init__(TestInput())
        self.model = model
        self.scope = scope
        self.prefix = prefix
        self.cache = cache  # table options keyed by table and the referenced tables' contents
        self.k = 0
        self.reads: List[int] = []
        self.loads: List[Tuple[int, ...]] = []
        self.tables: Dict[str, tuple] = {}

    def choose(self, options_fn):
        if self.k < len(self.prefix):
            v = self.prefix[self.k]
            self.k += 1
            return v
        raise _NeedChoice(options_fn())

    def read(self, stmt_id: int) -> int:
        v = self.choose(lambda: list(int_range(self.scope.bitwidth)))
        self.reads.append(v)
        return v

    def load(self, stmt_id: int) -> Tuple[int, ...]:
        rng = list(int_range(self.scope.bitwidth))
        v = self.choose(lambda: [l for n in range(self.scope.max_list_len + 1)
                                 for l in itertools.product(rng, repeat=n)])
        self.loads.append(v)
        return v

    def table(self, name: str):
        if name not in self.tables:
            for fk in self.model.table(name).foreign_keys:
                self.table(fk.table)
            self.tables[name] = self.choose(lambda: self._options(name))
        return self.tables[name]

    def _options(self, name: str) -> list:
        key = (name, tuple(self.tables[fk.table] for fk in self.model.table(name).foreign_keys))
        if key not in self.cache:
            self.cache[key] = _table_options(self.model, name, self.tables, self.scope)
        return self.cache[key]


def _attempt(model: CheckedModel, path: Path, scope: Scope, prefix: List[object], cache: dict):
    """Run with ``prefix``; returns a TestInput on success, None on failure, or raises _NeedChoice."""
    src = _ChoiceSource(model, scope, prefix, cache)
    pos = [0]

    def on_step(step: PathStep) -> None:
        i = pos[0]
        if i >= len(path.steps) or path.steps[i] != step:
            raise _Diverged()
        pos[0] += 1
        # row and list counts only grow, so an overflow now is an overflow at the end
        if any(len(v) > scope.max_rows for v in m.seen.values()) or m.ev.max_list_len > scope.max_list_len:
            raise _Diverged()

    m = Machine(model, src, scope.bitwidth, on_step=on_step, lazy_tables=True)
    try:
        res = m.execute()
    except (_Diverged, ProgramRuntimeError):
        return None
    if pos[0] != len(path.steps):
        return None
    if (ABORT if res.trace.aborted else EXIT) != path.terminal:
        return None
    if any(n > scope.max_rows for n in res.rows_seen.values()) or res.max_list_len > scope.max_list_len:
        return None
    tables = {t.name: src.tables.get(t.name, ()) for t in model.tables}
    return TestInput(tables, tuple(src.reads), tuple(src.loads))


def brute_force_oracle(model: CheckedModel, path: Path, scope: Scope) -> Optional[TestInput]:
    """First in-scope input (in a fixed enumeration order) whose trace equals ``path``."""
    stack: List[List[object]] = [[]]
    cache: dict = {}
    while stack:
        prefix = stack.pop()
        try:
            found = _attempt(model, path, scope, prefix, cache)
        except _NeedChoice as need:
            stack.extend(prefix + [o] for o in reversed(need.options))
            continue
        if found is not None:
            return found
    return None
