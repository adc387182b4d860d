"""Concrete reference semantics of SimpleDB.

``run`` executes a checked model on a :class:`TestInput` and records the
decision trace.  Integers are ``bitwidth``-bit two's complement with
wraparound; ``x / 0`` is 0.  HEAD/TAIL of NIL and cursor reads with no row
under the cursor are runtime errors, raised before the statement that
mentions them does anything.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .frontend import ast as A
from .frontend.checker import CheckedModel
from .paths import PathStep
from .schema import PK, REFROW, arith_id, fk_id

Row = Tuple[int, ...]
Rows = Tuple[Row, ...]


def wrap(value: int, bitwidth: int) -> int:
    half = 1 << (bitwidth - 1)
    return ((value + half) % (1 << bitwidth)) - half


def int_range(bitwidth: int) -> range:
    half = 1 << (bitwidth - 1)
    return range(-half, half)


def div_trunc(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def compare(op: str, a: int, b: int) -> bool:
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    return a == b


# ---------------------------------------------------------------- errors


class ExecError(Exception):
    """Execution stopped for a reason outside the SimpleDB exception mechanism."""

    def __init__(self, stmt_id: int, message: str, trace: Optional[List[PathStep]] = None):
        self.stmt_id = stmt_id
        self.trace = trace or []
        super().__init__(f"statement {stmt_id}: {message}")


class InputUnderflow(ExecError):
    def __init__(self, stmt_id: int, kind: str, trace=None):
        self.kind = kind
        super().__init__(stmt_id, f"no {kind} input left", trace)


class ProgramRuntimeError(ExecError):
    def __init__(self, stmt_id: int, kind: str, trace=None):
        self.kind = kind
        super().__init__(stmt_id, kind, trace)


class InvalidInput(ValueError):
    pass


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class TestInput:
    tables: Dict[str, Rows] = field(default_factory=dict)
    reads: Tuple[int, ...] = ()
    loads: Tuple[Tuple[int, ...], ...] = ()

    __test__ = False  # not a pytest class

    def to_json(self) -> dict:
        return {
            "tables": {k: [list(r) for r in v] for k, v in self.tables.items()},
            "reads": list(self.reads),
            "loads": [list(l) for l in self.loads],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TestInput":
        tables = {k: tuple(tuple(int(x) for x in r) for r in v) for k, v in obj.get("tables", {}).items()}
        return cls(tables, tuple(int(x) for x in obj.get("reads", [])),
                   tuple(tuple(int(x) for x in l) for l in obj.get("loads", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def validate_input(model: CheckedModel, inp: TestInput, bitwidth: int = 4) -> None:
    """Raise :class:`InvalidInput` unless the tables satisfy the schema and values fit."""
    rng = int_range(bitwidth)
    for name in inp.tables:
        if not model.model.has_table(name):
            raise InvalidInput(f"input gives rows for unknown table {name}")
    for x in inp.reads:
        if x not in rng:
            raise InvalidInput(f"read value {x} out of {bitwidth}-bit range")
    for l in inp.loads:
        if any(x not in rng for x in l):
            raise InvalidInput(f"load list {list(l)} has values out of {bitwidth}-bit range")
    pks: Dict[str, set] = {}
    for t in model.tables:
        rows = inp.tables.get(t.name, ())
        keys = set()
        for r in rows:
            if len(r) != len(t.attributes):
                raise InvalidInput(f"row {r} of {t.name} has wrong arity")
            if any(x not in rng for x in r):
                raise InvalidInput(f"row {r} of {t.name} has values out of {bitwidth}-bit range")
            if r[t.pk_index] in keys:
                raise InvalidInput(f"duplicate primary key in {t.name}")
            keys.add(r[t.pk_index])
            for c in t.arith_constraints:
                if not compare(c.op, r[t.index(c.attribute)], c.value):
                    raise InvalidInput(f"row {r} of {t.name} violates {c.attribute} {c.op} {c.value}")
        pks[t.name] = keys
    for t in model.tables:
        for fk in t.foreign_keys:
            for r in inp.tables.get(t.name, ()):
                if r[t.index(fk.attribute)] not in pks[fk.table]:
                    raise InvalidInput(f"row {r} of {t.name} references a missing {fk.table} row")


Tables = Dict[str, Dict[int, Row]]  # table -> pk value -> row


@dataclass
class DbState:
    committed: Tables
    working: Tables

    @classmethod
    def initial(cls, model: CheckedModel, tables: Dict[str, Rows]) -> "DbState":
        data = {}
        for t in model.tables:
            data[t.name] = {r[t.pk_index]: tuple(r) for r in tables.get(t.name, ())}
        return cls({k: dict(v) for k, v in data.items()}, data)

    def commit(self) -> None:
        self.committed = {k: dict(v) for k, v in self.working.items()}

    def rollback(self) -> None:
        self.working = {k: dict(v) for k, v in self.committed.items()}

    @staticmethod
    def sorted_rows(tables: Tables) -> Dict[str, Rows]:
        return {k: tuple(v[pk] for pk in sorted(v)) for k, v in tables.items()}


@dataclass
class Cursor:
    table: str
    rows: Rows  # ascending by primary key
    pos: int = -1  # -1 before the first row
    exhausted: bool = False


@dataclass
class Trace:
    steps: List[PathStep]
    aborted: bool = False


@dataclass
class ExecResult:
    trace: Trace
    db: Dict[str, Rows]  # final committed state
    outcome: str  # 'normal' or 'abort'
    abort_stmt: Optional[int] = None
    violation: Optional[str] = None
    rows_seen: Dict[str, int] = field(default_factory=dict)
    max_list_len: int = 0

    def to_json(self) -> dict:
        from .paths import path_of_trace
        out = path_of_trace(self.trace).to_json()
        out["db"] = {k: [list(r) for r in v] for k, v in self.db.items()}
        out["outcome"] = "normal" if self.outcome == "normal" else "abort"
        return out


# ---------------------------------------------------------------- db writes


Env = Dict[str, object]


class _Eval:
    """Expression evaluation against an environment and an optional current row."""

    def __init__(self, model: CheckedModel, bitwidth: int):
        self.model = model
        self.w = bitwidth
        self.max_list_len = 0

    def int_(self, e: A.Expr, env: Env, row: Optional[Row] = None, table: Optional[A.TableDecl] = None) -> int:
        if isinstance(e, A.IntLit):
            return wrap(e.value, self.w)
        if isinstance(e, A.VarRef):
            if table is not None and e.name in table.attributes:
                return row[table.index(e.name)]
            return env[e.name]
        if isinstance(e, A.BinOp):
            a = self.int_(e.left, env, row, table)
            b = self.int_(e.right, env, row, table)
            if e.op == "+":
                v = a + b
            elif e.op == "-":
                v = a - b
            elif e.op == "*":
                v = a * b
            else:
                v = div_trunc(a, b)
            return wrap(v, self.w)
        if isinstance(e, A.Neg):
            return wrap(-self.int_(e.operand, env, row, table), self.w)
        if isinstance(e, A.Head):
            return env[e.name][0]
        if isinstance(e, A.CursorRead):
            cur: Cursor = env[e.var]
            t = self.model.table(cur.table)
            return cur.rows[cur.pos][t.index(e.attribute)]
        raise TypeError(f"not an int expression: {e!r}")

    def list_(self, e: A.Expr, env: Env) -> Tuple[int, ...]:
        if isinstance(e, A.VarRef):
            return env[e.name]
        if isinstance(e, A.Nil):
            return ()
        if isinstance(e, A.Tail):
            return env[e.name][1:]
        if isinstance(e, A.Cons):
            v = (self.int_(e.head, env),) + self.list_(e.tail, env)
            if len(v) > self.max_list_len:
                self.max_list_len = len(v)
            return v
        raise TypeError(f"not a list expression: {e!r}")

    def cond(self, c: A.Cond, env: Env, row: Optional[Row] = None, table: Optional[A.TableDecl] = None) -> bool:
        if isinstance(c, A.BoolLit):
            return c.value
        if isinstance(c, A.BoolOp):
            l = self.cond(c.left, env, row, table)
            r = self.cond(c.right, env, row, table)
            return (l and r) if c.op == "&&" else (l or r)
        if isinstance(c, A.Not):
            return not self.cond(c.operand, env, row, table)
        if isinstance(c, A.Compare):
            return compare(c.op, self.int_(c.left, env, row, table), self.int_(c.right, env, row, table))
        if isinstance(c, A.IsNil):
            return len(env[c.name]) == 0
        raise TypeError(f"not a condition: {c!r}")


def _matching(ev: _Eval, table: A.TableDecl, rows: Dict[int, Row], where: A.Cond, env: Env) -> List[Row]:
    return [r for pk, r in sorted(rows.items()) if ev.cond(where, env, r, table)]


def _referenced(model: CheckedModel, working: Tables, table: A.TableDecl, row: Row) -> bool:
    key = row[table.pk_index]
    for t, fk in model.referencing(table.name):
        idx = t.index(fk.attribute)
        if any(r[idx] == key for r in working[t.name].values()):
            return True
    return False


def _apply(ev: _Eval, model: CheckedModel, working: Tables, op: A.DbWriteOp, env: Env
           ) -> Union[str, Dict[int, Row]]:
    table = model.table(op.table)
    rows = working[table.name]
    if isinstance(op, A.Insert):
        new = tuple(ev.int_(v, env) for v in op.values)
        if new[table.pk_index] in rows:
            return PK
        for i, fk in enumerate(table.foreign_keys):
            if new[table.index(fk.attribute)] not in working[fk.table]:
                return fk_id(table, i)
        for i, c in enumerate(table.arith_constraints):
            if not compare(c.op, new[table.index(c.attribute)], c.value):
                return arith_id(i)
        out = dict(rows)
        out[new[table.pk_index]] = new
        return out
    matched = _matching(ev, table, rows, op.where, env)
    if isinstance(op, A.Delete):
        if any(_referenced(model, working, table, r) for r in matched):
            return REFROW
        out = dict(rows)
        for r in matched:
            del out[r[table.pk_index]]
        return out
    idx = table.index(op.attribute)
    rewritten = []
    for r in matched:
        val = ev.int_(op.value, env, r, table)
        rewritten.append(r[:idx] + (val,) + r[idx + 1:])
    matched_keys = {r[table.pk_index] for r in matched}
    result = [r for pk, r in rows.items() if pk not in matched_keys] + rewritten
    on_pk = op.attribute == table.primary_key
    if on_pk:
        keys = [r[table.pk_index] for r in result]
        if len(set(keys)) != len(keys):
            return PK
    for i, fk in enumerate(table.foreign_keys):
        if fk.attribute == op.attribute:
            if any(r[idx] not in working[fk.table] for r in rewritten):
                return fk_id(table, i)
    for i, c in enumerate(table.arith_constraints):
        if c.attribute == op.attribute:
            if any(not compare(c.op, r[idx], c.value) for r in rewritten):
                return arith_id(i)
    if on_pk and any(_referenced(model, working, table, r) for r in matched):
        return REFROW
    return {r[table.pk_index]: r for r in result}


def apply_db_write(model: CheckedModel, db: DbState, op: A.DbWriteOp, env: Env, bitwidth: int = 4
                   ) -> Union[str, DbState]:
    """Apply ``op`` to the working state; returns the new state or the violated constraint id.

    ``db`` itself is never modified.
    """
    res = _apply(_Eval(model, bitwidth), model, db.working, op, env)
    if isinstance(res, str):
        return res
    working = dict(db.working)
    working[op.table] = res
    return DbState(db.committed, working)


def exec_select(model: CheckedModel, db: DbState, table: str, where: A.Cond, env: Env,
                bitwidth: int = 4) -> Rows:
    t = model.table(table)
    return tuple(_matching(_Eval(model, bitwidth), t, db.working[table], where, env))


# ---------------------------------------------------------------- machine


class _Abort(Exception):
    def __init__(self, stmt_id: int, violation: Optional[str]):
        self.stmt_id = stmt_id
        self.violation = violation


class InputSource:
    """Supplies READ/LOAD values and initial tables; the oracle overrides this lazily."""

    def __init__(self, inp: TestInput):
        self.inp = inp
        self.r = 0
        self.l = 0

    def read(self, stmt_id: int) -> int:
        if self.r >= len(self.inp.reads):
            raise InputUnderflow(stmt_id, "READ")
        self.r += 1
        return self.inp.reads[self.r - 1]

    def load(self, stmt_id: int) -> Tuple[int, ...]:
        if self.l >= len(self.inp.loads):
            raise InputUnderflow(stmt_id, "LOAD")
        self.l += 1
        return self.inp.loads[self.l - 1]

    def table(self, name: str) -> Rows:
        return self.inp.tables.get(name, ())


class _LazyTables(dict):
    """Working-state mapping whose tables are fetched from the source on first access."""

    def __init__(self, model: CheckedModel, source: InputSource, on_fetch):
        super().__init__()
        self.model = model
        self.source = source
        self.on_fetch = on_fetch

    def __missing__(self, name: str):
        t = self.model.table(name)
        rows = {r[t.pk_index]: tuple(r) for r in self.source.table(name)}
        self[name] = rows
        self.on_fetch(name, rows)
        return rows


_GUARDED: Dict[int, tuple] = {}


def _guarded(s: A.Stmt) -> tuple:
    """HEAD/TAIL/cursor-read nodes among the statement's own expressions (cached per node)."""
    key = id(s)
    hit = _GUARDED.get(key)
    if hit is None or hit[0] is not s:
        nodes = tuple(e for root in A.stmt_exprs(s) for e in A.sub_exprs(root)
                      if isinstance(e, (A.Head, A.Tail, A.CursorRead)))
        hit = (s, nodes)
        if len(_GUARDED) > 100_000:
            _GUARDED.clear()
        _GUARDED[key] = hit
    return hit[1]


class Machine:
    def __init__(self, model: CheckedModel, source: InputSource, bitwidth: int = 4,
                 on_step: Optional[Callable[[PathStep], None]] = None, lazy_tables: bool = False):
        self.model = model
        self.source = source
        self.w = bitwidth
        self.ev = _Eval(model, bitwidth)
        self.env: Env = {}
        self.trace: List[PathStep] = []
        self.on_step = on_step
        self.seen: Dict[str, set] = {t.name: set() for t in model.tables}
        if lazy_tables:
            working = _LazyTables(model, source, self._fetched)
            committed = _LazyTables(model, source, lambda n, r: None)
            self.db = DbState(committed, working)
        else:
            self.db = DbState.initial(model, {t.name: source.table(t.name) for t in model.tables})
            for name, rows in self.db.working.items():
                self.seen[name].update(rows.values())
        self.lazy = lazy_tables

    def _fetched(self, name: str, rows: Dict[int, Row]) -> None:
        self.seen[name].update(rows.values())
        self.db.committed[name] = dict(rows)

    def record(self, step: PathStep) -> None:
        self.trace.append(step)
        if self.on_step is not None:
            self.on_step(step)

    def precheck(self, s: A.Stmt) -> None:
        for node in _guarded(s):
            if isinstance(node, A.CursorRead):
                if self.env[node.var].pos < 0:
                    raise ProgramRuntimeError(s.stmt_id, f"cursor read {node.var}({node.attribute}) "
                                                         f"with no current row", self.trace)
            elif len(self.env[node.name]) == 0:
                kind = "HEAD" if isinstance(node, A.Head) else "TAIL"
                raise ProgramRuntimeError(s.stmt_id, f"{kind} of NIL ({node.name})", self.trace)

    def block(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s: A.Stmt) -> None:
        self.precheck(s)
        ev = self.ev
        env = self.env
        if isinstance(s, A.If):
            taken = ev.cond(s.cond, env)
            self.record(PathStep(s.stmt_id, "T" if taken else "F"))
            self.block(s.then if taken else s.orelse)
        elif isinstance(s, A.While):
            while True:
                self.precheck(s)
                if not ev.cond(s.cond, env):
                    self.record(PathStep(s.stmt_id, "exit"))
                    break
                self.record(PathStep(s.stmt_id, "enter"))
                self.block(s.body)
        elif isinstance(s, A.Assign):
            typ = self.model.site_types[s.stmt_id]
            env[s.target] = ev.list_(s.value, env) if typ == "list" else ev.int_(s.value, env)
        elif isinstance(s, A.Read):
            env[s.target] = self.source.read(s.stmt_id)
        elif isinstance(s, A.Load):
            v = tuple(self.source.load(s.stmt_id))
            ev.max_list_len = max(ev.max_list_len, len(v))
            env[s.target] = v
        elif isinstance(s, A.Select):
            t = self.model.table(s.table)
            rows = tuple(_matching(ev, t, self.db.working[s.table], s.where, env))
            env[s.target] = Cursor(s.table, rows)
        elif isinstance(s, A.Next):
            cur: Cursor = env[s.var]
            ok = not cur.exhausted and cur.pos + 1 < len(cur.rows)
            if ok:
                cur.pos += 1
            else:
                cur.exhausted = True
            self.record(PathStep(s.stmt_id, "ok" if ok else "exn"))
            if s.catch:
                env[s.catch] = 0 if ok else 1
            elif not ok:
                raise _Abort(s.stmt_id, None)
        elif isinstance(s, A.DbWrite):
            res = _apply(ev, self.model, self.db.working, s.op, env)
            if isinstance(res, str):
                self.record(PathStep(s.stmt_id, "exn", res))
                if s.catch:
                    env[s.catch] = 1
                else:
                    raise _Abort(s.stmt_id, res)
            else:
                self.db.working[s.op.table] = res
                self.seen[s.op.table].update(res.values())
                self.record(PathStep(s.stmt_id, "ok"))
                if s.catch:
                    env[s.catch] = 0
        elif isinstance(s, A.Commit):
            self._commit()
        elif isinstance(s, A.Rollback):
            self._rollback()
        else:
            raise TypeError(s)

    def _commit(self) -> None:
        if self.lazy:
            for k, v in self.db.working.items():
                self.db.committed[k] = dict(v)
        else:
            self.db.commit()

    def _rollback(self) -> None:
        if self.lazy:
            for k, v in self.db.committed.items():
                self.db.working[k] = dict(v)
        else:
            self.db.rollback()

    def final_db(self) -> Dict[str, Rows]:
        out = {}
        for t in self.model.tables:
            rows = self.db.committed.get(t.name)
            if rows is None:  # lazily supplied and never touched: empty
                rows = {}
            out[t.name] = tuple(rows[pk] for pk in sorted(rows))
        return out

    def execute(self) -> ExecResult:
        m = self.model.model
        try:
            self.stmt(m.opening)
            self.block(m.program)
            self.stmt(m.closing)
        except _Abort as ab:
            return ExecResult(Trace(self.trace, aborted=True), self.final_db(), "abort",
                              abort_stmt=ab.stmt_id, violation=ab.violation,
                              rows_seen={k: len(v) for k, v in self.seen.items()},
                              max_list_len=self.ev.max_list_len)
        except (KeyError, IndexError) as exc:  # pragma: no cover - guarded by precheck and check()
            raise ExecError(-1, f"internal evaluation failure: {exc!r}", self.trace) from exc
        return ExecResult(Trace(self.trace), self.final_db(), "normal",
                          rows_seen={k: len(v) for k, v in self.seen.items()},
                          max_list_len=self.ev.max_list_len)


def run(model: CheckedModel, inp: TestInput, bitwidth: int = 4, validate: bool = True) -> ExecResult:
    """Execute ``model`` on ``inp``.

    Raises :class:`InvalidInput` for inputs violating the schema,
    :class:`InputUnderflow` when READ/LOAD values run out and
    :class:`ProgramRuntimeError` for HEAD/TAIL of NIL or a cursor read with no row.
    """
    if validate:
        validate_input(model, inp, bitwidth)
    return Machine(model, InputSource(inp), bitwidth).execute()
