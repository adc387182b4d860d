"""AST node types for SimpleDB models.

Nodes are frozen dataclasses.  Source positions are carried for diagnostics
but excluded from equality, so two parses of differently formatted but
equivalent source compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Pos = Tuple[int, int]  # (line, column), both 1-based


def _pos() -> Pos:
    return field(default=(0, 0), compare=False, repr=False)


# ---------------------------------------------------------------- schema


@dataclass(frozen=True)
class ForeignKey:
    attribute: str
    table: str


@dataclass(frozen=True)
class ArithConstraint:
    attribute: str
    op: str  # '<', '=', '>'
    value: int


@dataclass(frozen=True)
class TableDecl:
    name: str
    attributes: Tuple[str, ...]
    primary_key: str
    foreign_keys: Tuple[ForeignKey, ...] = ()
    arith_constraints: Tuple[ArithConstraint, ...] = ()
    pos: Pos = _pos()

    def index(self, attribute: str) -> int:
        return self.attributes.index(attribute)

    @property
    def pk_index(self) -> int:
        return self.attributes.index(self.primary_key)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class VarRef:
    """A bare identifier.  Int or list typed; in db contexts may name an attribute."""

    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Head:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Tail:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class CursorRead:
    """``tab(att)``: attribute of the row under the cursor of table variable ``tab``."""

    var: str
    attribute: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Nil:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Cons:
    head: "Expr"
    tail: "Expr"
    pos: Pos = _pos()


Expr = Union[IntLit, VarRef, BinOp, Neg, Head, Tail, CursorRead, Nil, Cons]


# ---------------------------------------------------------------- conditions


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolOp:
    op: str  # '&&', '||'
    left: "Cond"
    right: "Cond"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    operand: "Cond"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Compare:
    """Arithmetic comparison.  In a db-condition ``left`` is a VarRef naming an attribute."""

    op: str  # '<', '=', '>'
    left: Expr
    right: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class IsNil:
    name: str
    pos: Pos = _pos()


Cond = Union[BoolLit, BoolOp, Not, Compare, IsNil]


# ---------------------------------------------------------------- db writes


@dataclass(frozen=True)
class Insert:
    table: str
    values: Tuple[Expr, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Update:
    table: str
    attribute: str
    value: Expr
    where: Cond
    pos: Pos = _pos()


@dataclass(frozen=True)
class Delete:
    table: str
    where: Cond
    pos: Pos = _pos()


DbWriteOp = Union[Insert, Update, Delete]


# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class If:
    stmt_id: int
    cond: Cond
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    stmt_id: int
    cond: Cond
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    stmt_id: int
    target: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Read:
    stmt_id: int
    target: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Load:
    stmt_id: int
    target: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Select:
    stmt_id: int
    target: str
    attributes: Tuple[str, ...]
    table: str
    where: Cond
    pos: Pos = _pos()


@dataclass(frozen=True)
class Next:
    """``NEXT(var);`` or, when ``catch`` is set, ``catch = CATCH(NEXT(var));``."""

    stmt_id: int
    var: str
    catch: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class DbWrite:
    """``<db-write>;`` or, when ``catch`` is set, ``catch = CATCH(<db-write>);``."""

    stmt_id: int
    op: DbWriteOp
    catch: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Commit:
    stmt_id: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Rollback:
    stmt_id: int
    pos: Pos = _pos()


Stmt = Union[If, While, Assign, Read, Load, Select, Next, DbWrite, Commit, Rollback]


@dataclass(frozen=True)
class ModelDecl:
    name: str
    tables: Tuple[TableDecl, ...]
    program: Tuple[Stmt, ...]
    opening: Commit = Commit(0)
    closing: Commit = Commit(1)
    pos: Pos = _pos()

    def table(self, name: str) -> TableDecl:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def has_table(self, name: str) -> bool:
        return any(t.name == name for t in self.tables)


def iter_stmts(stmts):
    """Yield every statement of ``stmts`` in preorder, nested ones included."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        elif isinstance(s, While):
            yield from iter_stmts(s.body)


def all_stmts(model: ModelDecl):
    yield model.opening
    yield from iter_stmts(model.program)
    yield model.closing


def sub_exprs(node):
    """Yield ``node`` and every expression/condition below it (not statements)."""
    yield node
    if isinstance(node, (BinOp, BoolOp)):
        yield from sub_exprs(node.left)
        yield from sub_exprs(node.right)
    elif isinstance(node, Compare):
        yield from sub_exprs(node.left)
        yield from sub_exprs(node.right)
    elif isinstance(node, (Neg, Not)):
        yield from sub_exprs(node.operand)
    elif isinstance(node, Cons):
        yield from sub_exprs(node.head)
        yield from sub_exprs(node.tail)


def stmt_exprs(stmt):
    """The expressions and conditions a statement evaluates itself.

    Nested statements of IF/WHILE bodies are not included.
    """
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, Assign):
        return [stmt.value]
    if isinstance(stmt, Select):
        return [stmt.where]
    if isinstance(stmt, DbWrite):
        op = stmt.op
        if isinstance(op, Insert):
            return list(op.values)
        if isinstance(op, Update):
            return [op.value, op.where]
        return [op.where]
    return []
