"""Relational constraint IR: sorts, symbolic variables, terms and formulas.

Sorts are strings: ``"int"``, ``"list"`` or ``"table(<name>)"`` (the checker's
type vocabulary).  Row-valued terms are quantifier-bound rows or the
minimum-key row of a table variable.  All nodes are immutable and hashable, so
structural equality doubles as fact deduplication.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ..frontend import ast as A
from ..frontend.checker import INT, LIST, is_table_type, table_of, table_type

INPUT = "input"
INTERNAL = "internal"


@dataclass(frozen=True)
class SymVar:
    name: str
    sort: str
    origin: str = INTERNAL

    @property
    def is_table(self) -> bool:
        return is_table_type(self.sort)

    @property
    def table(self) -> str:
        return table_of(self.sort)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    var: SymVar


@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Bound:
    """A quantifier-bound row of ``table``."""
    name: str
    table: str


@dataclass(frozen=True)
class MinRow:
    """The row of ``source`` with the smallest primary key (undefined when empty)."""
    source: SymVar
    pk: str
    pk_index: int


@dataclass(frozen=True)
class Field:
    row: Union[Bound, MinRow]
    attr: str
    index: int


@dataclass(frozen=True)
class Arith:
    op: str  # add | sub | mul | div
    left: "IntTerm"
    right: "IntTerm"


@dataclass(frozen=True)
class Negate:
    operand: "IntTerm"


@dataclass(frozen=True)
class ListHead:
    lst: "ListTerm"


@dataclass(frozen=True)
class ListTail:
    lst: "ListTerm"


@dataclass(frozen=True)
class NilTerm:
    pass


@dataclass(frozen=True)
class Cons:
    head: "IntTerm"
    tail: "ListTerm"


@dataclass(frozen=True)
class Ite:
    cond: "Formula"
    then: "IntTerm"
    orelse: "IntTerm"


IntTerm = Union[Var, Lit, Field, Arith, Negate, ListHead, Ite]
ListTerm = Union[Var, NilTerm, ListTail, Cons]
Term = Union[IntTerm, ListTerm]


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    """``left op right`` over ints (``<``, ``<=``, ``=``, ``>``) or lists (``=`` only).

    ``paren`` only affects rendering.
    """
    op: str
    left: Term
    right: Term
    paren: bool = True


@dataclass(frozen=True)
class IsNil:
    lst: ListTerm


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    items: Tuple["Formula", ...]
    paren: bool = True


@dataclass(frozen=True)
class Or:
    items: Tuple["Formula", ...]
    paren: bool = True


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class In:
    row: Bound
    target: SymVar


@dataclass(frozen=True)
class Quant:
    """``kind [disj] v1,v2: domain | body``.

    ``domain`` is a table variable, or ``None`` for the whole sort ``table``.
    Two variables are only used with ``disj``.
    """
    kind: str  # all | some | one | no
    names: Tuple[str, ...]
    table: str
    domain: Optional[SymVar]
    body: "Formula"
    disj: bool = False

    def bound(self, i: int = 0) -> Bound:
        return Bound(self.names[i], self.table)


@dataclass(frozen=True)
class Card:
    op: str  # = or >
    target: SymVar
    value: int


@dataclass(frozen=True)
class AddRow:
    """``new = old + row``."""
    new: SymVar
    old: SymVar
    row: Bound


@dataclass(frozen=True)
class DropMin:
    """``new = old - {the minimum-key row of old}``."""
    new: SymVar
    old: SymVar
    pk: str
    pk_index: int


Formula = Union[BoolConst, Cmp, IsNil, Not, And, Or, Implies, Iff, In, Quant, Card, AddRow, DropMin]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def conj(*items: Formula) -> Formula:
    flat = tuple(i for i in items if i != TRUE)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(flat)


def disj_(*items: Formula) -> Formula:
    flat = tuple(i for i in items if i != FALSE)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(flat)


def children(node) -> Iterator:
    """Direct sub-terms and sub-formulas of an IR node."""
    if isinstance(node, (Arith,)):
        yield node.left
        yield node.right
    elif isinstance(node, Negate):
        yield node.operand
    elif isinstance(node, (ListHead, ListTail)):
        yield node.lst
    elif isinstance(node, Cons):
        yield node.head
        yield node.tail
    elif isinstance(node, Ite):
        yield node.cond
        yield node.then
        yield node.orelse
    elif isinstance(node, Field):
        yield node.row
    elif isinstance(node, Cmp):
        yield node.left
        yield node.right
    elif isinstance(node, IsNil):
        yield node.lst
    elif isinstance(node, Not):
        yield node.operand
    elif isinstance(node, (And, Or)):
        yield from node.items
    elif isinstance(node, (Implies, Iff)):
        yield node.left
        yield node.right
    elif isinstance(node, Quant):
        yield node.body


def referenced_vars(node) -> Iterator[SymVar]:
    """Symbolic variables mentioned anywhere in ``node`` (with repetition)."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            yield n.var
        elif isinstance(n, MinRow):
            yield n.source
        elif isinstance(n, In):
            yield n.target
        elif isinstance(n, Quant) and n.domain is not None:
            yield n.domain
        elif isinstance(n, Card):
            yield n.target
        elif isinstance(n, AddRow):
            yield n.new
            yield n.old
        elif isinstance(n, DropMin):
            yield n.new
            yield n.old
        stack.extend(children(n))


# ---------------------------------------------------------------- systems


@dataclass(frozen=True)
class VarDecl:
    var: SymVar


@dataclass(frozen=True)
class FactItem:
    formula: Formula


Item = Union[VarDecl, FactItem]


@dataclass
class ConstraintSystem:
    """Ordered variable declarations and facts.

    ``schema`` holds, per table in declaration order, the initial-content
    variable and its schema facts; ``body`` holds the path items.
    """
    name: str
    tables: Tuple[A.TableDecl, ...]
    schema: Dict[str, List[Item]] = field(default_factory=dict)
    body: List[Item] = field(default_factory=list)
    inputs: List[SymVar] = field(default_factory=list)
    _seen: set = field(default_factory=set, repr=False)

    def table(self, name: str) -> A.TableDecl:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def items(self) -> Iterator[Item]:
        for t in self.tables:
            yield from self.schema.get(t.name, ())
        yield from self.body

    @property
    def vars(self) -> List[SymVar]:
        return [i.var for i in self.items() if isinstance(i, VarDecl)]

    @property
    def facts(self) -> List[Formula]:
        return [i.formula for i in self.items() if isinstance(i, FactItem)]

    def _target(self, table: Optional[str]) -> List[Item]:
        return self.schema.setdefault(table, []) if table is not None else self.body

    def declare(self, var: SymVar, table: Optional[str] = None) -> SymVar:
        self._target(table).append(VarDecl(var))
        if var.origin == INPUT:
            self.inputs.append(var)
        return var

    def add(self, f: Formula, table: Optional[str] = None) -> bool:
        """Append fact ``f`` unless an identical fact exists; returns whether it was added."""
        if f in self._seen:
            return False
        self._seen.add(f)
        self._target(table).append(FactItem(f))
        return True

    def sort_of(self, name: str) -> str:
        for v in self.vars:
            if v.name == name:
                return v.sort
        raise KeyError(name)

    def stats(self) -> Tuple[int, int]:
        """(symbolic variable count, fact count)."""
        return len(self.vars), len(self.facts)


def free_input_vars(cs: ConstraintSystem) -> List[SymVar]:
    """Input variables in declaration order."""
    inputs = set(cs.inputs)
    return [v for v in cs.vars if v in inputs]


__all__ = [
    "INT", "LIST", "INPUT", "INTERNAL", "table_type", "SymVar", "Var", "Lit", "Bound", "MinRow",
    "Field", "Arith", "Negate", "ListHead", "ListTail", "NilTerm", "Cons", "Ite", "BoolConst",
    "Cmp", "IsNil", "Not", "And", "Or", "Implies", "Iff", "In", "Quant", "Card", "AddRow",
    "DropMin", "TRUE", "FALSE", "conj", "disj_", "children", "referenced_vars", "VarDecl",
    "FactItem", "ConstraintSystem", "free_input_vars",
]
