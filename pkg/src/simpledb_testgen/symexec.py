"""Relational symbolic execution of one path through a checked model.

Every value a program variable or table takes along the path gets its own
symbolic variable; statements add facts tying new variables to old ones and
decisions add facts forcing the path.  The result is a
:class:`~simpledb_testgen.constraints.ConstraintSystem`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .constraints import ir as I
from .frontend import ast as A
from .frontend.checker import CheckedModel, is_table_type, table_type
from .paths import ABORT, EXIT, InvalidStep, Path, PathStep, build_cfg, validate_path
from .schema import PK, REFROW, applicable_violations, decode_violation

FRESH = "fresh"
ADVANCED = "advanced"
EXHAUSTED_LAST = "exhausted_last"
EXHAUSTED_EMPTY = "exhausted_empty"

_ARITH = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


class PathMismatch(Exception):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"step {index}: {reason}")


@dataclass
class Cursor:
    phase: str
    table: str


@dataclass
class SymState:
    env: Dict[str, I.SymVar] = field(default_factory=dict)
    tables: Dict[str, I.SymVar] = field(default_factory=dict)
    cursors: Dict[str, Cursor] = field(default_factory=dict)
    tx_snapshot: Dict[str, I.SymVar] = field(default_factory=dict)


class _Abort(Exception):
    pass


class Namer:
    """Fresh names ``<base><INPUT|INTERNAL><DB|PROG><n>`` with one counter per kind."""

    def __init__(self):
        self.counters: Dict[str, int] = {}

    def __call__(self, base: str, origin: str, db: bool) -> str:
        kind = ("INPUT" if origin == I.INPUT else "INTERNAL") + ("DB" if db else "PROG")
        n = self.counters.get(kind, 0) + 1
        self.counters[kind] = n
        return f"{base.lower()}{kind}{n}"


# ---------------------------------------------------------------- translation


def translate_expr(e: A.Expr, state: SymState, model: CheckedModel,
                   row: Optional[I.Bound] = None, table: Optional[A.TableDecl] = None):
    """Map an expression to an IR term; with ``row``/``table`` attribute names win over variables."""
    def go(x):
        if isinstance(x, A.IntLit):
            return I.Lit(x.value)
        if isinstance(x, A.VarRef):
            if table is not None and x.name in table.attributes:
                return I.Field(row, x.name, table.index(x.name))
            return I.Var(state.env[x.name])
        if isinstance(x, A.BinOp):
            return I.Arith(_ARITH[x.op], go(x.left), go(x.right))
        if isinstance(x, A.Neg):
            return I.Negate(go(x.operand))
        if isinstance(x, A.Head):
            return I.ListHead(I.Var(state.env[x.name]))
        if isinstance(x, A.Tail):
            return I.ListTail(I.Var(state.env[x.name]))
        if isinstance(x, A.Nil):
            return I.NilTerm()
        if isinstance(x, A.Cons):
            return I.Cons(go(x.head), go(x.tail))
        if isinstance(x, A.CursorRead):
            src = state.env[x.var]
            t = model.table(src.table)
            return I.Field(I.MinRow(src, t.primary_key, t.pk_index), x.attribute, t.index(x.attribute))
        raise TypeError(f"not an expression: {x!r}")
    return go(e)


def translate_cond(c: A.Cond, state: SymState, model: CheckedModel,
                   row: Optional[I.Bound] = None, table: Optional[A.TableDecl] = None) -> I.Formula:
    def go(x):
        if isinstance(x, A.BoolLit):
            return I.BoolConst(x.value)
        if isinstance(x, A.BoolOp):
            items = (go(x.left), go(x.right))
            return I.And(items) if x.op == "&&" else I.Or(items)
        if isinstance(x, A.Not):
            return I.Not(go(x.operand))
        if isinstance(x, A.Compare):
            return I.Cmp(x.op, translate_expr(x.left, state, model, row, table),
                         translate_expr(x.right, state, model, row, table))
        if isinstance(x, A.IsNil):
            return I.IsNil(I.Var(state.env[x.name]))
        raise TypeError(f"not a condition: {x!r}")
    return go(c)


def translate_db_cond(c: A.Cond, table: A.TableDecl, row: I.Bound, state: SymState,
                      model: CheckedModel) -> I.Formula:
    return translate_cond(c, state, model, row, table)


# ---------------------------------------------------------------- schema


def _field(row, table: A.TableDecl, attr: str) -> I.Field:
    return I.Field(row, attr, table.index(attr))


def gen_schema_constraints(table: A.TableDecl, init_var: I.SymVar,
                           init_vars: Dict[str, I.SymVar], model: CheckedModel) -> List[I.Formula]:
    """PK distinctness and FK facts over ``init_var`` plus sort-wide arithmetic facts."""
    a, b = I.Bound("a", table.name), I.Bound("b", table.name)
    pk = table.primary_key
    facts: List[I.Formula] = [
        I.Quant("all", ("a", "b"), table.name, init_var,
                I.Not(I.Cmp("=", _field(a, table, pk), _field(b, table, pk))), disj=True)]
    for fk in table.foreign_keys:
        ref = model.table(fk.table)
        rb = I.Bound("b", ref.name)
        inner = I.Quant("one", ("b",), ref.name, init_vars[ref.name],
                        I.Cmp("=", _field(a, table, fk.attribute), _field(rb, ref, ref.primary_key), paren=False))
        facts.append(I.Quant("all", ("a",), table.name, init_var, inner))
    for c in table.arith_constraints:
        facts.append(I.Quant("all", ("a",), table.name, None,
                             I.Cmp(c.op, _field(a, table, c.attribute), I.Lit(c.value), paren=False)))
    return facts


# ---------------------------------------------------------------- executor


class SymExec:
    def __init__(self, model: CheckedModel, path: Path):
        self.model = model
        self.path = path
        self.cs = I.ConstraintSystem(model.name, model.tables)
        self.state = SymState()
        self.fresh = Namer()
        self.pos = 0

    # -- helpers

    def new_var(self, base: str, sort: str, origin: str = I.INTERNAL, db: bool = False) -> I.SymVar:
        v = I.SymVar(self.fresh(base, origin, db), sort, origin)
        self.cs.declare(v)
        return v

    def fact(self, f: I.Formula) -> None:
        self.cs.add(f)

    def take(self, s: A.Stmt) -> PathStep:
        if self.pos >= len(self.path.steps):
            raise PathMismatch(self.pos, f"path ends before the decision at statement {s.stmt_id}")
        step = self.path.steps[self.pos]
        if step.stmt != s.stmt_id:
            raise PathMismatch(self.pos, f"expected statement {s.stmt_id}, path has {step.stmt}")
        self.pos += 1
        return step

    def guards(self, s: A.Stmt) -> None:
        """Facts keeping HEAD/TAIL and cursor reads of ``s`` well defined."""
        for root in A.stmt_exprs(s):
            for e in A.sub_exprs(root):
                if isinstance(e, (A.Head, A.Tail)):
                    self.fact(I.Not(I.IsNil(I.Var(self.state.env[e.name]))))
                elif isinstance(e, A.CursorRead):
                    if self.state.cursors[e.var].phase in (FRESH, EXHAUSTED_EMPTY):
                        self.fact(I.FALSE)

    def expr(self, e, row=None, table=None):
        return translate_expr(e, self.state, self.model, row, table)

    def cond(self, c, row=None, table=None):
        return translate_cond(c, self.state, self.model, row, table)

    def flag(self, name: str, value: int) -> None:
        v = self.new_var(name, I.INT)
        self.state.env[name] = v
        self.fact(I.Cmp("=", I.Var(v), I.Lit(value), paren=False))

    # -- driver

    def run(self) -> I.ConstraintSystem:
        try:
            validate_path(build_cfg(self.model), self.path)
        except InvalidStep as exc:
            raise PathMismatch(exc.index, exc.reason) from None
        self.schema()
        m = self.model.model
        try:
            self.stmt(m.opening)
            self.block(m.program)
            self.stmt(m.closing)
            terminal = EXIT
        except _Abort:
            terminal = ABORT
        if self.pos != len(self.path.steps) or terminal != self.path.terminal:
            raise PathMismatch(self.pos, "path does not match the executed statements")
        return self.cs

    def schema(self) -> None:
        init: Dict[str, I.SymVar] = {}
        for t in reversed(self.model.tables):
            init[t.name] = I.SymVar(self.fresh(t.name, I.INPUT, True), table_type(t.name), I.INPUT)
        for t in self.model.tables:
            self.cs.declare(init[t.name], table=t.name)
            for f in gen_schema_constraints(t, init[t.name], init, self.model):
                self.cs.add(f, table=t.name)
        self.state.tables = dict(init)
        self.state.tx_snapshot = dict(init)

    def block(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s: A.Stmt) -> None:
        st = self.state
        if isinstance(s, A.If):
            step = self.take(s)
            self.guards(s)
            c = self.cond(s.cond)
            self.fact(c if step.decision == "T" else I.Not(c))
            self.block(s.then if step.decision == "T" else s.orelse)
        elif isinstance(s, A.While):
            while True:
                step = self.take(s)
                self.guards(s)
                c = self.cond(s.cond)
                if step.decision == "exit":
                    self.fact(I.Not(c))
                    break
                self.fact(c)
                self.block(s.body)
        elif isinstance(s, A.Assign):
            self.guards(s)
            typ = self.model.site_types[s.stmt_id]
            value = self.expr(s.value)
            v = self.new_var(s.target, typ)
            st.env[s.target] = v
            self.fact(I.Cmp("=", I.Var(v), value, paren=False))
        elif isinstance(s, A.Read):
            st.env[s.target] = self.new_var(s.target, I.INT, I.INPUT)
        elif isinstance(s, A.Load):
            st.env[s.target] = self.new_var(s.target, I.LIST, I.INPUT)
        elif isinstance(s, A.Select):
            self.guards(s)
            t = self.model.table(s.table)
            e = I.Bound("e", t.name)
            where = self.cond(s.where, e, t)
            v = self.new_var(s.target, table_type(t.name))
            self.fact(I.Quant("all", ("e",), t.name, None,
                              I.Iff(I.And((I.In(e, st.tables[t.name]), where)), I.In(e, v))))
            st.env[s.target] = v
            st.cursors[s.target] = Cursor(FRESH, t.name)
        elif isinstance(s, A.Next):
            step = self.take(s)
            self.next(s, step)
        elif isinstance(s, A.DbWrite):
            step = self.take(s)
            self.guards(s)
            gen_dbwrite_constraints(self, s.op, step)
            if step.decision == "exn":
                if s.catch:
                    self.flag(s.catch, 1)
                else:
                    raise _Abort()
            elif s.catch:
                self.flag(s.catch, 0)
        elif isinstance(s, A.Commit):
            st.tx_snapshot = dict(st.tables)
        elif isinstance(s, A.Rollback):
            st.tables = dict(st.tx_snapshot)
        else:
            raise TypeError(s)

    def next(self, s: A.Next, step: PathStep) -> None:
        st = self.state
        cur = st.cursors[s.var]
        res = st.env[s.var]
        ok = step.decision == "ok"
        if cur.phase == FRESH:
            self.fact(I.Card(">" if ok else "=", res, 0))
            cur.phase = ADVANCED if ok else EXHAUSTED_EMPTY
        elif cur.phase == ADVANCED:
            if ok:
                t = self.model.table(cur.table)
                new = self.new_var(s.var, res.sort)
                self.fact(I.DropMin(new, res, t.primary_key, t.pk_index))
                self.fact(I.Card(">", new, 0))
                st.env[s.var] = new
            else:
                self.fact(I.Card("=", res, 1))
                cur.phase = EXHAUSTED_LAST
        elif ok:
            raise PathMismatch(self.pos - 1, f"NEXT({s.var}) cannot succeed after it has thrown")
        if s.catch:
            self.flag(s.catch, 0 if ok else 1)
        elif not ok:
            raise _Abort()


# ---------------------------------------------------------------- db writes


def _referencing_some(ex: SymExec, table: A.TableDecl, f: I.Bound) -> I.Formula:
    """Some row of a referencing table's current content points at row ``f``."""
    parts = []
    for src, fk in ex.model.referencing(table.name):
        g = I.Bound("g", src.name)
        parts.append(I.Quant("some", ("g",), src.name, ex.state.tables[src.name],
                             I.Cmp("=", _field(g, src, fk.attribute), _field(f, table, table.primary_key),
                                   paren=False)))
    return I.disj_(*parts)


def _exists_key(ref: A.TableDecl, var: I.SymVar, value, kind: str) -> I.Formula:
    e = I.Bound("e", ref.name)
    return I.Quant(kind, ("e",), ref.name, var, I.Cmp("=", _field(e, ref, ref.primary_key), value, paren=False))


def gen_dbwrite_constraints(ex: SymExec, op: A.DbWriteOp, step: PathStep) -> None:
    """Facts (and a new table variable on success) for one db-write outcome."""
    model = ex.model
    table = model.table(op.table)
    allowed = applicable_violations(model, op)
    if step.decision == "exn" and step.violation not in allowed:
        raise PathMismatch(ex.pos - 1, f"{step.violation} cannot be raised by this write")
    checks = allowed if step.decision == "ok" else allowed[:allowed.index(step.violation) + 1]
    failing = None if step.decision == "ok" else step.violation
    if isinstance(op, A.Insert):
        _insert(ex, op, table, checks, failing)
    elif isinstance(op, A.Update):
        _update(ex, op, table, checks, failing)
    else:
        _delete(ex, op, table, failing)


def _insert(ex: SymExec, op: A.Insert, table: A.TableDecl, checks, failing) -> None:
    st = ex.state
    old = st.tables[table.name]
    values = [ex.expr(v) for v in op.values]
    pk_val = values[table.pk_index]
    if failing is None:
        new = ex.new_var(table.name, old.sort, db=True)
        e = I.Bound("e", table.name)
        binds = [I.Cmp("=", _field(e, table, a), values[i], paren=False)
                 for i, a in reversed(list(enumerate(table.attributes)))]
        ex.fact(I.Quant("one", ("e",), table.name, None,
                        I.And((I.AddRow(new, old, e),) + tuple(binds), paren=False)))
    holds = []
    for vid in checks:
        kind, idx = decode_violation(table, vid)
        fails = vid == failing
        if kind == PK:
            holds.append(_exists_key(table, old, pk_val, "some" if fails else "no"))
        elif kind == "FK":
            fk = table.foreign_keys[idx]
            ref = ex.model.table(fk.table)
            holds.append(_exists_key(ref, st.tables[ref.name], values[table.index(fk.attribute)],
                                     "no" if fails else "one"))
        elif failing is not None:  # arithmetic checks are implied by the sort-wide facts on success
            c = table.arith_constraints[idx]
            cmp = I.Cmp(c.op, values[table.index(c.attribute)], I.Lit(c.value))
            holds.append(I.Not(cmp) if fails else cmp)
    for f in holds:
        ex.fact(f)
    if failing is None:
        st.tables[table.name] = new


def _update(ex: SymExec, op: A.Update, table: A.TableDecl, checks, failing) -> None:
    st = ex.state
    old = st.tables[table.name]
    T = table.name
    attr = op.attribute

    def matched(name):
        return ex.cond(op.where, I.Bound(name, T), table)

    def new_value(name):
        return ex.expr(op.value, I.Bound(name, T), table)

    def new_key(name):
        b = I.Bound(name, T)
        if attr != table.primary_key:
            return _field(b, table, table.primary_key)
        return I.Ite(matched(name), new_value(name), _field(b, table, attr))

    def over_matched(kind, body_of):
        """``kind f:old | matched(f) <op> body(f)`` with ``all`` using implication."""
        f = I.Bound("f", T)
        body = body_of(f)
        inner = I.Implies(matched("f"), body) if kind == "all" else I.And((matched("f"), body), paren=False)
        return I.Quant(kind, ("f",), T, old, inner)

    if failing is None:
        new = ex.new_var(T, old.sort, db=True)
        e, f = I.Bound("e", T), I.Bound("f", T)
        rewritten = [I.Cmp("=", _field(e, table, attr), new_value("f"), paren=False)]
        rewritten += [I.Cmp("=", _field(e, table, a), _field(f, table, a), paren=False)
                      for a in table.attributes if a != attr]
        kept = I.And((I.In(e, old), I.Not(matched("e"))))
        moved = I.Quant("some", ("f",), T, old, I.And((matched("f"),) + tuple(rewritten), paren=False))
        ex.fact(I.Quant("all", ("e",), T, None, I.Iff(I.In(e, new), I.Or((kept, moved)))))
        # the iff ranges over existing rows only, so rewritten rows must be asserted to exist
        ex.fact(I.Quant("all", ("f",), T, old, I.Implies(
            matched("f"), I.Quant("some", ("e",), T, new, I.And(tuple(rewritten), paren=False)))))
    holds = []
    for vid in checks:
        kind, idx = decode_violation(table, vid)
        fails = vid == failing
        if kind == PK:
            same = I.Cmp("=", new_key("a"), new_key("b"))
            holds.append(I.Quant("some", ("a", "b"), T, old, same, disj=True) if fails
                         else I.Quant("all", ("a", "b"), T, old, I.Not(same), disj=True))
        elif kind == "FK":
            ref = ex.model.table(table.foreign_keys[idx].table)
            refvar = st.tables[ref.name]
            if fails:
                holds.append(over_matched("some", lambda f: _exists_key(ref, refvar, new_value("f"), "no")))
            else:
                holds.append(over_matched("all", lambda f: _exists_key(ref, refvar, new_value("f"), "one")))
        elif kind == "ARITH":
            if failing is None:
                continue
            c = table.arith_constraints[idx]
            cmp = I.Cmp(c.op, new_value("f"), I.Lit(c.value))
            holds.append(over_matched("some", lambda f: I.Not(cmp)) if fails
                         else over_matched("all", lambda f: cmp))
        else:
            holds.append(over_matched("some" if fails else "no", lambda f: _referencing_some(ex, table, f)))
    for h in holds:
        ex.fact(h)
    if failing is None:
        st.tables[T] = new


def _delete(ex: SymExec, op: A.Delete, table: A.TableDecl, failing) -> None:
    st = ex.state
    old = st.tables[table.name]
    T = table.name
    f = I.Bound("f", T)
    referenced = bool(ex.model.referencing(T))
    if failing is None:
        new = ex.new_var(T, old.sort, db=True)
        e = I.Bound("e", T)
        ex.fact(I.Quant("all", ("e",), T, None,
                        I.Iff(I.In(e, new), I.And((I.In(e, old), I.Not(ex.cond(op.where, e, table)))))))
    if referenced:
        body = I.And((ex.cond(op.where, f, table), _referencing_some(ex, table, f)), paren=False)
        ex.fact(I.Quant("some" if failing == REFROW else "no", ("f",), T, old, body))
    if failing is None:
        st.tables[T] = new


def symexec(model: CheckedModel, path: Path) -> I.ConstraintSystem:
    """Constraint system whose solutions drive ``model`` along ``path``."""
    return SymExec(model, path).run()
