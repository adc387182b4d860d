"""Finite-model evaluation of IR formulas.

Tables are frozensets of row tuples (attributes in declaration order), lists
are tuples, integers are plain ints kept within the bitwidth.  Terms with no
value (HEAD or TAIL of an empty list, the minimum row of an empty table) make
every comparison that mentions them false.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Tuple, Union

from ..interpreter import compare, div_trunc, wrap
from . import ir as I

Row = Tuple[int, ...]
Value = Union[int, Tuple[int, ...], FrozenSet[Row]]


class SortMismatch(TypeError):
    pass


@dataclass
class Assignment:
    """Values for symbolic variables plus the row universe of each table sort.

    When ``universe`` omits a table, the sort is taken to contain exactly the
    rows of the table-sorted variables in ``values``.
    """
    values: Dict[str, Value]
    sorts: Dict[str, str] = field(default_factory=dict)
    universe: Dict[str, FrozenSet[Row]] = field(default_factory=dict)

    def rows_of(self, table: str) -> FrozenSet[Row]:
        if table in self.universe:
            return self.universe[table]
        out = set()
        sort = f"table({table})"
        for name, s in self.sorts.items():
            if s == sort and name in self.values:
                out |= set(self.values[name])
        return frozenset(out)

    @classmethod
    def for_system(cls, cs: I.ConstraintSystem, values: Mapping[str, Value],
                   universe: Optional[Dict[str, FrozenSet[Row]]] = None) -> "Assignment":
        vals = {}
        for v in cs.vars:
            if v.name in values:
                x = values[v.name]
                vals[v.name] = frozenset(tuple(r) for r in x) if v.is_table else (
                    tuple(x) if v.sort == I.LIST else x)
        return cls(vals, {v.name: v.sort for v in cs.vars}, dict(universe or {}))


def _least(rows, index: int):
    """Rows sharing the smallest value at ``index``."""
    if not rows:
        return []
    low = min(r[index] for r in rows)
    return [r for r in rows if r[index] == low]


class _Ev:
    def __init__(self, a: Assignment, bitwidth: int):
        self.a = a
        self.w = bitwidth

    def value(self, var: I.SymVar):
        try:
            v = self.a.values[var.name]
        except KeyError:
            raise SortMismatch(f"no value for {var.name}") from None
        if var.is_table:
            if not isinstance(v, frozenset):
                raise SortMismatch(f"{var.name} expects a row set")
        elif var.sort == I.LIST:
            if not isinstance(v, tuple):
                raise SortMismatch(f"{var.name} expects a list")
        elif not isinstance(v, int):
            raise SortMismatch(f"{var.name} expects an integer")
        return v

    def row(self, t, env) -> Optional[Row]:
        if isinstance(t, I.Bound):
            return env[t.name]
        if isinstance(t, I.MinRow):
            least = _least(self.value(t.source), t.pk_index)
            return least[0] if len(least) == 1 else None
        raise SortMismatch(f"not a row term: {t!r}")

    def term(self, t, env):
        if isinstance(t, I.Lit):
            return wrap(t.value, self.w)
        if isinstance(t, I.Var):
            return self.value(t.var)
        if isinstance(t, I.Field):
            r = self.row(t.row, env)
            return None if r is None else r[t.index]
        if isinstance(t, I.Arith):
            l = self.term(t.left, env)
            r = self.term(t.right, env)
            if l is None or r is None:
                return None
            if t.op == "add":
                return wrap(l + r, self.w)
            if t.op == "sub":
                return wrap(l - r, self.w)
            if t.op == "mul":
                return wrap(l * r, self.w)
            return wrap(div_trunc(l, r), self.w)
        if isinstance(t, I.Negate):
            v = self.term(t.operand, env)
            return None if v is None else wrap(-v, self.w)
        if isinstance(t, I.ListHead):
            l = self.term(t.lst, env)
            return l[0] if l else None
        if isinstance(t, I.ListTail):
            l = self.term(t.lst, env)
            return l[1:] if l else None
        if isinstance(t, I.NilTerm):
            return ()
        if isinstance(t, I.Cons):
            h = self.term(t.head, env)
            tl = self.term(t.tail, env)
            return None if h is None or tl is None else (h,) + tl
        if isinstance(t, I.Ite):
            return self.term(t.then if self.formula(t.cond, env) else t.orelse, env)
        raise SortMismatch(f"not a term: {t!r}")

    def domain(self, q: I.Quant):
        if q.domain is not None:
            return self.value(q.domain)
        return self.a.rows_of(q.table)

    def formula(self, f, env) -> bool:
        if isinstance(f, I.BoolConst):
            return f.value
        if isinstance(f, I.Cmp):
            l = self.term(f.left, env)
            r = self.term(f.right, env)
            if l is None or r is None:
                return False
            if f.op == "<=":
                return l <= r
            if isinstance(l, tuple) or isinstance(r, tuple):
                if f.op != "=" or not (isinstance(l, tuple) and isinstance(r, tuple)):
                    raise SortMismatch(f"cannot compare {l!r} {f.op} {r!r}")
            return compare(f.op, l, r)
        if isinstance(f, I.IsNil):
            l = self.term(f.lst, env)
            return l is not None and len(l) == 0
        if isinstance(f, I.Not):
            return not self.formula(f.operand, env)
        if isinstance(f, I.And):
            return all(self.formula(x, env) for x in f.items)
        if isinstance(f, I.Or):
            return any(self.formula(x, env) for x in f.items)
        if isinstance(f, I.Implies):
            return (not self.formula(f.left, env)) or self.formula(f.right, env)
        if isinstance(f, I.Iff):
            return self.formula(f.left, env) == self.formula(f.right, env)
        if isinstance(f, I.In):
            return env[f.row.name] in self.value(f.target)
        if isinstance(f, I.Card):
            n = len(self.value(f.target))
            return n == f.value if f.op == "=" else n > f.value
        if isinstance(f, I.AddRow):
            return self.value(f.new) == self.value(f.old) | {env[f.row.name]}
        if isinstance(f, I.DropMin):
            old = self.value(f.old)
            return self.value(f.new) == old - set(_least(old, f.pk_index))
        if isinstance(f, I.Quant):
            return self.quant(f, env)
        raise SortMismatch(f"not a formula: {f!r}")

    def quant(self, q: I.Quant, env) -> bool:
        rows = sorted(self.domain(q))
        if q.disj:
            a, b = q.names
            hits = (self.formula(q.body, {**env, a: r, b: s}) for r in rows for s in rows if r != s)
        else:
            (a,) = q.names
            hits = (self.formula(q.body, {**env, a: r}) for r in rows)
        if q.kind == "all":
            return all(hits)
        if q.kind == "some":
            return any(hits)
        if q.kind == "no":
            return not any(hits)
        return sum(1 for h in hits if h) == 1


def evaluate(f: I.Formula, a: Assignment, bitwidth: int = 4) -> bool:
    return _Ev(a, bitwidth).formula(f, {})


def eval_term(t, a: Assignment, bitwidth: int = 4):
    return _Ev(a, bitwidth).term(t, {})
