"""Static checks: schema well-formedness, scoping and typing of the program."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import ast as A

INT = "int"
LIST = "list"


def table_type(name: str) -> str:
    return f"table({name})"


def is_table_type(t: Optional[str]) -> bool:
    return t is not None and t.startswith("table(")


def table_of(t: str) -> str:
    return t[len("table("):-1]


@dataclass(frozen=True)
class CheckError:
    rule: str
    message: str
    stmt_id: Optional[int] = None
    table: Optional[str] = None
    pos: A.Pos = (0, 0)

    def format(self, filename: str = "<input>") -> str:
        line, col = self.pos
        return f"{filename}:{line}:{col}: {self.rule}: {self.message}"


class CheckFailed(Exception):
    def __init__(self, errors: List[CheckError]):
        self.errors = errors
        super().__init__("; ".join(e.message for e in errors))


@dataclass(frozen=True)
class CheckedModel:
    model: A.ModelDecl
    var_types: Dict[str, str]
    site_types: Dict[int, str] = field(default_factory=dict)
    warnings: Tuple[CheckError, ...] = ()

    @property
    def name(self) -> str:
        return self.model.name

    @property
    def tables(self) -> Tuple[A.TableDecl, ...]:
        return self.model.tables

    def table(self, name: str) -> A.TableDecl:
        return self.model.table(name)

    def referencing(self, table: str) -> List[Tuple[A.TableDecl, A.ForeignKey]]:
        """Foreign keys of the whole schema that point at ``table``, in schema order."""
        return [(t, fk) for t in self.model.tables for fk in t.foreign_keys if fk.table == table]


class _Checker:
    def __init__(self, model: A.ModelDecl, bitwidth: int):
        self.model = model
        self.bitwidth = bitwidth
        self.errors: List[CheckError] = []
        self.warnings: List[CheckError] = []
        self.tables: Dict[str, A.TableDecl] = {}
        self.types: Dict[str, str] = {}
        self.site_types: Dict[int, str] = {}
        self.scopes: List[set] = [set()]

    def err(self, rule: str, message: str, stmt: Optional[A.Stmt] = None, table: Optional[str] = None,
            pos: Optional[A.Pos] = None) -> None:
        self.errors.append(CheckError(
            rule, message,
            stmt_id=stmt.stmt_id if stmt is not None else None,
            table=table,
            pos=pos if pos is not None else (stmt.pos if stmt is not None else (0, 0)),
        ))

    # ------------------------------------------------------------ schema

    def check_schema(self) -> None:
        for t in self.model.tables:
            if t.name in self.tables:
                self.err("duplicate-table", f"table {t.name} declared twice", table=t.name, pos=t.pos)
                continue
            self.tables[t.name] = t
        for t in self.tables.values():
            seen = set()
            for a in t.attributes:
                if a in seen:
                    self.err("duplicate-attribute", f"attribute {a} declared twice in {t.name}",
                             table=t.name, pos=t.pos)
                seen.add(a)
            if t.primary_key not in seen:
                self.err("unknown-attribute", f"primary key {t.primary_key} is not an attribute of {t.name}",
                         table=t.name, pos=t.pos)
            for fk in t.foreign_keys:
                if fk.attribute not in seen:
                    self.err("unknown-attribute",
                             f"foreign key attribute {fk.attribute} is not an attribute of {t.name}",
                             table=t.name, pos=t.pos)
                if fk.table not in self.tables:
                    self.err("unknown-table", f"{t.name} references undeclared table {fk.table}",
                             table=t.name, pos=t.pos)
            for c in t.arith_constraints:
                if c.attribute not in seen:
                    self.err("unknown-attribute",
                             f"constrained attribute {c.attribute} is not an attribute of {t.name}",
                             table=t.name, pos=t.pos)
                self.check_literal(c.value, t.pos)
        self.check_fk_cycles()

    def check_fk_cycles(self) -> None:
        state: Dict[str, int] = {}  # 1 = on stack, 2 = done
        reported = set()

        def visit(name: str, stack: List[str]) -> None:
            state[name] = 1
            stack.append(name)
            for fk in self.tables[name].foreign_keys:
                if fk.table not in self.tables:
                    continue
                if state.get(fk.table) == 1:
                    cycle = stack[stack.index(fk.table):] + [fk.table]
                    key = frozenset(cycle)
                    if key not in reported:
                        reported.add(key)
                        self.err("fk-cycle", "cyclic table references: " + " -> ".join(cycle),
                                 table=fk.table, pos=self.tables[fk.table].pos)
                elif fk.table not in state:
                    visit(fk.table, stack)
            stack.pop()
            state[name] = 2

        for name in self.tables:
            if name not in state:
                visit(name, [])

    def check_literal(self, value: int, pos: A.Pos) -> None:
        if value > (1 << (self.bitwidth - 1)) - 1:
            self.warnings.append(CheckError(
                "literal-width", f"literal {value} does not fit in {self.bitwidth}-bit signed integers",
                pos=pos))

    # ------------------------------------------------------------ scoping

    def visible(self, name: str) -> bool:
        return any(name in s for s in self.scopes)

    def bind(self, name: str, typ: str, stmt: A.Stmt) -> None:
        old = self.types.get(name)
        if old is not None and old != typ:
            self.err("type-change", f"variable {name} changes type from {old} to {typ}", stmt)
        elif old is None:
            self.types[name] = typ
        self.site_types[stmt.stmt_id] = typ
        if not self.visible(name):
            self.scopes[-1].add(name)

    def use(self, name: str, stmt: A.Stmt, pos: A.Pos) -> Optional[str]:
        if not self.visible(name):
            self.err("unbound-variable", f"variable {name} used outside the block of its initialization "
                                         f"or before it", stmt, pos=pos)
            return None
        return self.types.get(name)

    # ------------------------------------------------------------ expressions

    def expr_type(self, e: A.Expr, stmt: A.Stmt, attrs: Tuple[str, ...] = ()) -> Optional[str]:
        """Type of ``e``; ``attrs`` are attribute names that shadow program variables."""
        if isinstance(e, A.IntLit):
            self.check_literal(e.value, e.pos)
            return INT
        if isinstance(e, A.VarRef):
            if e.name in attrs:
                return INT
            t = self.use(e.name, stmt, e.pos)
            if is_table_type(t):
                self.err("type-mismatch", f"table variable {e.name} used as a value", stmt, pos=e.pos)
                return None
            return t
        if isinstance(e, A.BinOp):
            self.expect_int(e.left, stmt, attrs)
            self.expect_int(e.right, stmt, attrs)
            return INT
        if isinstance(e, A.Neg):
            self.expect_int(e.operand, stmt, attrs)
            return INT
        if isinstance(e, (A.Head, A.Tail)):
            t = self.use(e.name, stmt, e.pos)
            if t is not None and t != LIST:
                what = "HEAD" if isinstance(e, A.Head) else "TAIL"
                self.err("type-mismatch", f"{what} of non-list variable {e.name}", stmt, pos=e.pos)
            return INT if isinstance(e, A.Head) else LIST
        if isinstance(e, A.CursorRead):
            t = self.use(e.var, stmt, e.pos)
            if t is not None:
                if not is_table_type(t):
                    self.err("not-a-cursor", f"{e.var} was never assigned by SELECT", stmt, pos=e.pos)
                elif e.attribute not in self.tables[table_of(t)].attributes:
                    self.err("unknown-attribute",
                             f"{e.attribute} is not an attribute of {table_of(t)}", stmt, pos=e.pos)
            return INT
        if isinstance(e, A.Nil):
            return LIST
        if isinstance(e, A.Cons):
            self.expect_int(e.head, stmt, attrs)
            t = self.expr_type(e.tail, stmt, attrs)
            if t is not None and t != LIST:
                self.err("type-mismatch", "tail of a list constructor is not a list", stmt, pos=e.pos)
            return LIST
        raise TypeError(e)

    def expect_int(self, e: A.Expr, stmt: A.Stmt, attrs: Tuple[str, ...] = ()) -> None:
        t = self.expr_type(e, stmt, attrs)
        if t is not None and t != INT:
            self.err("type-mismatch", "integer expression expected", stmt, pos=e.pos)

    def check_cond(self, c: A.Cond, stmt: A.Stmt) -> None:
        if isinstance(c, A.BoolLit):
            return
        if isinstance(c, A.BoolOp):
            self.check_cond(c.left, stmt)
            self.check_cond(c.right, stmt)
        elif isinstance(c, A.Not):
            self.check_cond(c.operand, stmt)
        elif isinstance(c, A.Compare):
            self.expect_int(c.left, stmt)
            self.expect_int(c.right, stmt)
        elif isinstance(c, A.IsNil):
            t = self.use(c.name, stmt, c.pos)
            if t is not None and t != LIST:
                self.err("type-mismatch", f"NIL test on non-list variable {c.name}", stmt, pos=c.pos)

    def check_db_cond(self, c: A.Cond, table: A.TableDecl, stmt: A.Stmt) -> None:
        if isinstance(c, A.BoolLit):
            return
        if isinstance(c, A.BoolOp):
            self.check_db_cond(c.left, table, stmt)
            self.check_db_cond(c.right, table, stmt)
        elif isinstance(c, A.Not):
            self.check_db_cond(c.operand, table, stmt)
        elif isinstance(c, A.Compare):
            if not isinstance(c.left, A.VarRef) or c.left.name not in table.attributes:
                self.err("unknown-attribute",
                         f"left side of a db-condition must be an attribute of {table.name}", stmt, pos=c.pos)
            self.expect_int(c.right, stmt, table.attributes)
        else:
            self.err("syntax", "NIL test is not allowed in a db-condition", stmt, pos=c.pos)

    # ------------------------------------------------------------ statements

    def lookup_table(self, name: str, stmt: A.Stmt) -> Optional[A.TableDecl]:
        t = self.tables.get(name)
        if t is None:
            self.err("unknown-table", f"unknown table {name}", stmt)
        return t

    def block(self, stmts) -> None:
        self.scopes.append(set())
        for s in stmts:
            self.stmt(s)
        self.scopes.pop()

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.If):
            self.check_cond(s.cond, s)
            self.block(s.then)
            self.block(s.orelse)
        elif isinstance(s, A.While):
            self.check_cond(s.cond, s)
            self.block(s.body)
        elif isinstance(s, A.Assign):
            t = self.expr_type(s.value, s)
            if t is not None:
                self.bind(s.target, t, s)
        elif isinstance(s, A.Read):
            self.bind(s.target, INT, s)
        elif isinstance(s, A.Load):
            self.bind(s.target, LIST, s)
        elif isinstance(s, A.Select):
            table = self.lookup_table(s.table, s)
            if table is not None:
                for a in s.attributes:
                    if a not in table.attributes:
                        self.err("unknown-attribute", f"{a} is not an attribute of {table.name}", s)
                self.check_db_cond(s.where, table, s)
                self.bind(s.target, table_type(table.name), s)
        elif isinstance(s, A.Next):
            t = self.use(s.var, s, s.pos)
            if t is not None and not is_table_type(t):
                self.err("not-a-cursor", f"NEXT on {s.var}, which was never assigned by SELECT", s)
            if s.catch:
                self.bind(s.catch, INT, s)
        elif isinstance(s, A.DbWrite):
            self.db_write(s)
            if s.catch:
                self.bind(s.catch, INT, s)
        elif isinstance(s, (A.Commit, A.Rollback)):
            pass
        else:
            raise TypeError(s)

    def db_write(self, s: A.DbWrite) -> None:
        op = s.op
        table = self.lookup_table(op.table, s)
        if table is None:
            return
        if isinstance(op, A.Insert):
            if len(op.values) != len(table.attributes):
                self.err("insert-arity",
                         f"INSERT INTO {table.name} gives {len(op.values)} values for "
                         f"{len(table.attributes)} attributes", s)
            for v in op.values:
                self.expect_int(v, s)
        elif isinstance(op, A.Update):
            if op.attribute not in table.attributes:
                self.err("unknown-attribute", f"{op.attribute} is not an attribute of {table.name}", s)
            self.expect_int(op.value, s, table.attributes)
            self.check_db_cond(op.where, table, s)
        else:
            self.check_db_cond(op.where, table, s)

    def run(self) -> CheckedModel:
        self.check_schema()
        if not self.errors:
            self.block(self.model.program)
        if self.errors:
            raise CheckFailed(self.errors)
        return CheckedModel(self.model, dict(self.types), dict(self.site_types), tuple(self.warnings))


def check(model: A.ModelDecl, bitwidth: int = 4) -> CheckedModel:
    """Validate ``model``; raises :class:`CheckFailed` listing every violation."""
    return _Checker(model, bitwidth).run()
