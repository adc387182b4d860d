"""Ground constant propagation over top-level facts.

Definitional facts ``v = t`` whose right side is already known bind ``v``;
facts that then evaluate to false prove the system unsatisfiable at every
scope, without any search.
"""
from __future__ import annotations

from typing import Dict, Optional

from ..constraints import ir as I
from ..interpreter import compare, div_trunc, wrap

_UNKNOWN = object()


class _Partial:
    def __init__(self, bitwidth: int):
        self.w = bitwidth
        self.known: Dict[str, object] = {}

    def term(self, t):
        if isinstance(t, I.Lit):
            return wrap(t.value, self.w)
        if isinstance(t, I.Var):
            return self.known.get(t.var.name, _UNKNOWN)
        if isinstance(t, I.NilTerm):
            return ()
        if isinstance(t, I.Arith):
            l, r = self.term(t.left), self.term(t.right)
            if l is None or r is None:
                return None
            if l is _UNKNOWN or r is _UNKNOWN:
                return _UNKNOWN
            ops = {"add": l + r, "sub": l - r, "mul": l * r}
            return wrap(ops[t.op] if t.op in ops else div_trunc(l, r), self.w)
        if isinstance(t, I.Negate):
            v = self.term(t.operand)
            return v if v is _UNKNOWN or v is None else wrap(-v, self.w)
        if isinstance(t, (I.ListHead, I.ListTail)):
            l = self.term(t.lst)
            if l is _UNKNOWN or l is None:
                return l
            if not l:
                return None
            return l[0] if isinstance(t, I.ListHead) else l[1:]
        if isinstance(t, I.Cons):
            h, tl = self.term(t.head), self.term(t.tail)
            if h is None or tl is None:
                return None
            return _UNKNOWN if _UNKNOWN in (h, tl) else (h,) + tl
        return _UNKNOWN

    def formula(self, f) -> Optional[bool]:
        """True/False when decided by the known values, None otherwise."""
        if isinstance(f, I.BoolConst):
            return f.value
        if isinstance(f, I.Cmp):
            l, r = self.term(f.left), self.term(f.right)
            if l is None or r is None:
                return False
            if l is _UNKNOWN or r is _UNKNOWN:
                return None
            if f.op == "<=":
                return l <= r
            return compare(f.op, l, r)
        if isinstance(f, I.IsNil):
            l = self.term(f.lst)
            if l is _UNKNOWN:
                return None
            return l is not None and len(l) == 0
        if isinstance(f, I.Not):
            v = self.formula(f.operand)
            return None if v is None else not v
        if isinstance(f, (I.And, I.Or)):
            vals = [self.formula(x) for x in f.items]
            stop = isinstance(f, I.Or)
            if stop in vals:
                return stop
            return None if None in vals else (not stop)
        if isinstance(f, I.Implies):
            return self.formula(I.Or((I.Not(f.left), f.right)))
        if isinstance(f, I.Iff):
            l, r = self.formula(f.left), self.formula(f.right)
            return None if l is None or r is None else l == r
        return None


def presolve(cs: I.ConstraintSystem, bitwidth: int) -> Optional[I.Formula]:
    """Return a fact that is false under forced constant bindings, or None."""
    p = _Partial(bitwidth)
    facts = cs.facts
    changed = True
    while changed:
        changed = False
        for f in facts:
            if isinstance(f, I.Cmp) and f.op == "=" and isinstance(f.left, I.Var) \
                    and not f.left.var.is_table and f.left.var.name not in p.known:
                v = p.term(f.right)
                if v is not _UNKNOWN and v is not None:
                    p.known[f.left.var.name] = v
                    changed = True
    for f in facts:
        if p.formula(f) is False:
            return f
    return None
