"""Bit-vector encoding of constraint systems for z3.

Each table sort gets ``max_rows`` atom slots.  A slot has a presence bit and
one bit-vector per attribute; present slots hold pairwise distinct rows, are
packed to the front (symmetry breaking) and each belongs to at least one table
variable, so the atoms in use are exactly the rows the program ever sees.
Table variables are membership bits over the slots; lists are a length plus
``max_list_len`` element slots; quantifiers are unrolled over slots.
"""
from __future__ import annotations

import time
from typing import Dict, List, Mapping, Optional, Tuple

import z3

from ..constraints import ir as I
from ..constraints.evaluate import Assignment
from .scope import EXHAUSTED, SAT, UNSAT, Scope, SolveResult


class _List:
    __slots__ = ("length", "elems", "defined")

    def __init__(self, length, elems, defined):
        self.length = length
        self.elems = elems
        self.defined = defined


class Encoder:
    def __init__(self, cs: I.ConstraintSystem, scope: Scope, ctx: Optional[z3.Context] = None):
        self.cs = cs
        self.scope = scope
        self.ctx = ctx or z3.Context()
        self.w = scope.bitwidth
        self.R = scope.max_rows
        self.L = scope.max_list_len
        self.present: Dict[str, List[z3.BoolRef]] = {}
        self.attrs: Dict[str, List[List[z3.BitVecRef]]] = {}
        self.member: Dict[str, List[z3.BoolRef]] = {}
        self.ints: Dict[str, z3.BitVecRef] = {}
        self.lists: Dict[str, _List] = {}
        self.axioms: List[z3.BoolRef] = []
        self.len_bits = max(2, (self.L + 1).bit_length() + 1)

    # -- basics

    def bv(self, value: int) -> z3.BitVecRef:
        return z3.BitVecVal(value, self.w, self.ctx)

    def true(self):
        return z3.BoolVal(True, self.ctx)

    def false(self):
        return z3.BoolVal(False, self.ctx)

    def lenv(self, n: int):
        return z3.BitVecVal(n, self.len_bits, self.ctx)

    def declare(self) -> None:
        for t in self.cs.tables:
            pres = [z3.Bool(f"present!{t.name}!{i}", self.ctx) for i in range(self.R)]
            cols = [[z3.BitVec(f"{t.name}!{i}!{a}", self.w, self.ctx) for a in t.attributes]
                    for i in range(self.R)]
            self.present[t.name] = pres
            self.attrs[t.name] = cols
            for i in range(1, self.R):
                self.axioms.append(z3.Implies(pres[i], pres[i - 1]))
            for i in range(self.R):
                for j in range(i + 1, self.R):
                    same = z3.And([x == y for x, y in zip(cols[i], cols[j])])
                    self.axioms.append(z3.Implies(z3.And(pres[i], pres[j]), z3.Not(same)))
        for v in self.cs.vars:
            if v.is_table:
                bits = [z3.Bool(f"{v.name}!{i}", self.ctx) for i in range(self.R)]
                self.member[v.name] = bits
                for i, b in enumerate(bits):
                    self.axioms.append(z3.Implies(b, self.present[v.table][i]))
            elif v.sort == I.LIST:
                length = z3.BitVec(f"{v.name}!len", self.len_bits, self.ctx)
                elems = [z3.BitVec(f"{v.name}!{k}", self.w, self.ctx) for k in range(self.L)]
                self.axioms.append(z3.ULE(length, self.lenv(self.L)))
                self.lists[v.name] = _List(length, elems, self.true())
            else:
                self.ints[v.name] = z3.BitVec(v.name, self.w, self.ctx)
        for t in self.cs.tables:
            owners = [self.member[v.name] for v in self.cs.vars if v.is_table and v.table == t.name]
            for i in range(self.R):
                self.axioms.append(z3.Implies(self.present[t.name][i],
                                              z3.Or([o[i] for o in owners] + [self.false()])))

    # -- rows

    def row_of(self, r, env) -> Tuple[z3.BoolRef, object]:
        """(defined, row handle) where a handle is a slot index or a list of (guard, slot)."""
        if isinstance(r, I.Bound):
            return self.true(), env[r.name]
        if isinstance(r, I.MinRow):
            m = self.member[r.source.name]
            cols = self.attrs[r.source.table]
            opts = []
            for i in range(self.R):
                others = [z3.Implies(m[j], cols[i][r.pk_index] < cols[j][r.pk_index])
                          for j in range(self.R) if j != i]
                opts.append((z3.And([m[i]] + others), i))
            return z3.Or([g for g, _ in opts] + [self.false()]), opts
        raise TypeError(r)

    def field(self, f: I.Field, env):
        defined, handle = self.row_of(f.row, env)
        table = f.row.table if isinstance(f.row, I.Bound) else f.row.source.table
        cols = self.attrs[table]
        if isinstance(handle, int):
            return cols[handle][f.index], defined
        value = self.bv(0)
        for g, i in reversed(handle):
            value = z3.If(g, cols[i][f.index], value)
        return value, defined

    # -- terms

    def int_term(self, t, env) -> Tuple[z3.BitVecRef, z3.BoolRef]:
        if isinstance(t, I.Lit):
            return self.bv(t.value % (1 << self.w)), self.true()
        if isinstance(t, I.Var):
            return self.ints[t.var.name], self.true()
        if isinstance(t, I.Field):
            return self.field(t, env)
        if isinstance(t, I.Arith):
            (l, dl), (r, dr) = self.int_term(t.left, env), self.int_term(t.right, env)
            if t.op == "add":
                v = l + r
            elif t.op == "sub":
                v = l - r
            elif t.op == "mul":
                v = l * r
            else:
                v = z3.If(r == self.bv(0), self.bv(0), l / r)  # bvsdiv truncates toward zero
            return v, z3.And(dl, dr)
        if isinstance(t, I.Negate):
            v, d = self.int_term(t.operand, env)
            return -v, d
        if isinstance(t, I.ListHead):
            l = self.list_term(t.lst, env)
            if not l.elems:
                return self.bv(0), self.false()
            return l.elems[0], z3.And(l.defined, z3.UGT(l.length, self.lenv(0)))
        if isinstance(t, I.Ite):
            c = self.formula(t.cond, env)
            (a, da), (b, db) = self.int_term(t.then, env), self.int_term(t.orelse, env)
            return z3.If(c, a, b), z3.If(c, da, db)
        raise TypeError(f"not an int term: {t!r}")

    def list_term(self, t, env) -> _List:
        if isinstance(t, I.Var):
            return self.lists[t.var.name]
        if isinstance(t, I.NilTerm):
            return _List(self.lenv(0), [], self.true())
        if isinstance(t, I.ListTail):
            l = self.list_term(t.lst, env)
            ok = z3.And(l.defined, z3.UGT(l.length, self.lenv(0)))
            return _List(l.length - self.lenv(1), l.elems[1:], ok)
        if isinstance(t, I.Cons):
            h, dh = self.int_term(t.head, env)
            l = self.list_term(t.tail, env)
            return _List(l.length + self.lenv(1), [h] + l.elems, z3.And(dh, l.defined))
        raise TypeError(f"not a list term: {t!r}")

    def list_eq(self, a: _List, b: _List):
        n = min(len(a.elems), len(b.elems))
        parts = [a.length == b.length, z3.ULE(a.length, self.lenv(n))]
        for k in range(n):
            parts.append(z3.Implies(z3.UGT(a.length, self.lenv(k)), a.elems[k] == b.elems[k]))
        return z3.And(parts)

    def is_list(self, t) -> bool:
        if isinstance(t, I.Var):
            return t.var.sort == I.LIST
        return isinstance(t, (I.NilTerm, I.ListTail, I.Cons))

    # -- formulas

    def domain(self, q: I.Quant):
        if q.domain is not None:
            return self.member[q.domain.name]
        return self.present[q.table]

    def formula(self, f, env) -> z3.BoolRef:
        if isinstance(f, I.BoolConst):
            return z3.BoolVal(f.value, self.ctx)
        if isinstance(f, I.Cmp):
            if self.is_list(f.left) or self.is_list(f.right):
                a, b = self.list_term(f.left, env), self.list_term(f.right, env)
                return z3.And(a.defined, b.defined, self.list_eq(a, b))
            (l, dl), (r, dr) = self.int_term(f.left, env), self.int_term(f.right, env)
            op = {"<": l < r, ">": l > r, "=": l == r, "<=": l <= r}[f.op]
            return z3.And(dl, dr, op)
        if isinstance(f, I.IsNil):
            l = self.list_term(f.lst, env)
            return z3.And(l.defined, l.length == self.lenv(0))
        if isinstance(f, I.Not):
            return z3.Not(self.formula(f.operand, env))
        if isinstance(f, I.And):
            return z3.And([self.formula(x, env) for x in f.items])
        if isinstance(f, I.Or):
            return z3.Or([self.formula(x, env) for x in f.items])
        if isinstance(f, I.Implies):
            return z3.Implies(self.formula(f.left, env), self.formula(f.right, env))
        if isinstance(f, I.Iff):
            return self.formula(f.left, env) == self.formula(f.right, env)
        if isinstance(f, I.In):
            return self.member[f.target.name][env[f.row.name]]
        if isinstance(f, I.Card):
            bits = self.member[f.target.name]
            if f.op == ">":
                return z3.AtLeast(*bits, f.value + 1) if bits else self.false()
            if not bits:
                return z3.BoolVal(f.value == 0, self.ctx)
            return z3.And(z3.AtMost(*bits, f.value), z3.AtLeast(*bits, f.value))
        if isinstance(f, I.AddRow):
            new, old = self.member[f.new.name], self.member[f.old.name]
            i = env[f.row.name]
            return z3.And([new[j] == (self.true() if j == i else old[j]) for j in range(self.R)])
        if isinstance(f, I.DropMin):
            new, old = self.member[f.new.name], self.member[f.old.name]
            cols = self.attrs[f.old.table]
            parts = []
            for i in range(self.R):
                least = z3.And([z3.Implies(old[j], cols[i][f.pk_index] <= cols[j][f.pk_index])
                                for j in range(self.R)])
                parts.append(new[i] == z3.And(old[i], z3.Not(least)))
            return z3.And(parts)
        if isinstance(f, I.Quant):
            return self.quant(f, env)
        raise TypeError(f"not a formula: {f!r}")

    def quant(self, q: I.Quant, env) -> z3.BoolRef:
        dom = self.domain(q)
        cases = []
        if q.disj:
            a, b = q.names
            for i in range(self.R):
                for j in range(self.R):
                    if i != j:
                        cases.append((z3.And(dom[i], dom[j]), self.formula(q.body, {**env, a: i, b: j})))
        else:
            (a,) = q.names
            for i in range(self.R):
                cases.append((dom[i], self.formula(q.body, {**env, a: i})))
        if q.kind == "all":
            return z3.And([z3.Implies(g, b) for g, b in cases] + [self.true()])
        hits = [z3.And(g, b) for g, b in cases]
        if q.kind == "some":
            return z3.Or(hits + [self.false()])
        if q.kind == "no":
            return z3.Not(z3.Or(hits + [self.false()]))
        if not hits:
            return self.false()
        return z3.And(z3.AtMost(*hits, 1), z3.AtLeast(*hits, 1))

    # -- pinning and decoding

    def pin(self, var: I.SymVar, value) -> z3.BoolRef:
        if var.is_table:
            rows = sorted(set(tuple(r) for r in value))
            m = self.member[var.name]
            cols = self.attrs[var.table]
            parts = [z3.AtMost(*m, len(rows)) if m else self.true()]
            for r in rows:
                parts.append(z3.Or([z3.And([m[i]] + [c == self.bv(x % (1 << self.w)) for c, x in zip(cols[i], r)])
                                    for i in range(self.R)] + [self.false()]))
            return z3.And(parts)
        if var.sort == I.LIST:
            vals = list(value)
            if len(vals) > self.L:
                return self.false()
            l = self.lists[var.name]
            return z3.And([l.length == self.lenv(len(vals))] +
                          [l.elems[k] == self.bv(x % (1 << self.w)) for k, x in enumerate(vals)])
        return self.ints[var.name] == self.bv(value % (1 << self.w))

    def decode(self, model: z3.ModelRef) -> Assignment:
        def sval(x) -> int:
            v = model.eval(x, model_completion=True).as_long()
            return v - (1 << self.w) if v >= (1 << (self.w - 1)) else v

        def bval(x) -> bool:
            return z3.is_true(model.eval(x, model_completion=True))

        rows: Dict[str, List[Optional[tuple]]] = {}
        universe = {}
        for t in self.cs.tables:
            rows[t.name] = [tuple(sval(c) for c in self.attrs[t.name][i]) if bval(self.present[t.name][i]) else None
                            for i in range(self.R)]
            universe[t.name] = frozenset(r for r in rows[t.name] if r is not None)
        values = {}
        for v in self.cs.vars:
            if v.is_table:
                values[v.name] = frozenset(rows[v.table][i] for i, b in enumerate(self.member[v.name]) if bval(b))
            elif v.sort == I.LIST:
                l = self.lists[v.name]
                n = model.eval(l.length, model_completion=True).as_long()
                values[v.name] = tuple(sval(e) for e in l.elems[:n])
            else:
                values[v.name] = sval(self.ints[v.name])
        return Assignment(values, {v.name: v.sort for v in self.cs.vars}, universe)


def run_z3(cs: I.ConstraintSystem, scope: Scope, pinned: Optional[Mapping[str, object]] = None
           ) -> Tuple[str, Optional[Assignment], dict]:
    enc = Encoder(cs, scope)
    enc.declare()
    solver = z3.Solver(ctx=enc.ctx)
    solver.set("random_seed", scope.seed)
    if scope.time_budget:
        solver.set("timeout", max(1, int(scope.time_budget * 1000)))
    for a in enc.axioms:
        solver.add(a)
    for f in cs.facts:
        solver.add(enc.formula(f, {}))
    by_name = {v.name: v for v in cs.vars}
    for name, value in (pinned or {}).items():
        solver.add(enc.pin(by_name[name], value))
    start = time.perf_counter()
    res = solver.check()
    stats = {"check_ms": (time.perf_counter() - start) * 1000.0}
    if res == z3.sat:
        return SAT, enc.decode(solver.model()), stats
    if res == z3.unsat:
        return UNSAT, None, stats
    stats["reason"] = solver.reason_unknown()
    return EXHAUSTED, None, stats
