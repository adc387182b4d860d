"""Seeded generator of small well-typed SimpleDB models.

Every generated model passes the static checker.  Variable names encode their
type (``i*`` ints, ``l*`` lists, ``c*`` cursors) so a name never changes type,
and a variable is only used inside the block that initialized it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .frontend import ast as A
from .frontend.checker import CheckedModel, check

_ATTRS = ("a", "b", "c")
_TABLES = ("t", "u")


@dataclass(frozen=True)
class GenConfig:
    max_tables: int = 2
    max_attrs: int = 3
    max_stmts: int = 12
    max_depth: int = 2  # IF/WHILE nesting
    bitwidth: int = 4
    max_inputs: Optional[int] = None  # READ/LOAD statements; the oracle's cost is exponential in them


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: List[Tuple[str, str]] = []  # (name, type); type is 'int', 'list' or a table name

    def visible(self, typ: str) -> List[str]:
        out = [n for n, t in self.names if t == typ]
        return out + (self.parent.visible(typ) if self.parent else [])

    def cursors(self) -> List[Tuple[str, str]]:
        out = [(n, t) for n, t in self.names if t not in ("int", "list")]
        return out + (self.parent.cursors() if self.parent else [])

    def bind(self, name: str, typ: str) -> None:
        if (name, typ) not in self.names:
            self.names.append((name, typ))


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.r = rng
        self.cfg = cfg
        self.maxlit = (1 << (cfg.bitwidth - 1)) - 1
        self.counts = {"int": 0, "list": 0, "cur": 0}
        self.tables: Tuple[A.TableDecl, ...] = ()
        self.sid = 0
        self.nil_lists = set()  # lists last assigned NIL; HEAD/TAIL on them always fails
        self.advanced = set()  # cursors that have seen a NEXT; reading a fresh one always fails
        self.inputs = 0

    def next_id(self) -> int:
        self.sid += 1
        return self.sid

    # ---------------------------------------------------------- schema

    def schema(self) -> Tuple[A.TableDecl, ...]:
        r = self.r
        n = r.randint(0, self.cfg.max_tables)
        tables = []
        for k in range(n):
            attrs = _ATTRS[:r.randint(1, self.cfg.max_attrs)]
            pk = r.choice(attrs)
            fks = ()
            if k > 0 and r.random() < 0.5:
                cands = [a for a in attrs if a != pk] or list(attrs)
                fks = (A.ForeignKey(r.choice(cands), tables[0].name),)
            ariths = ()
            if r.random() < 0.3:
                ariths = (A.ArithConstraint(r.choice(attrs), r.choice("<=>"), r.randint(0, self.maxlit)),)
            tables.append(A.TableDecl(_TABLES[k], attrs, pk, fks, ariths))
        return tuple(tables)

    # ---------------------------------------------------------- names

    def fresh(self, kind: str) -> str:
        prefix = {"int": "i", "list": "l", "cur": "c"}[kind]
        name = f"{prefix}{self.counts[kind]}"
        self.counts[kind] += 1
        return name

    def target(self, scope: _Scope, typ: str) -> str:
        old = scope.visible(typ)
        if old and self.r.random() < 0.4:
            return self.r.choice(old)
        return self.fresh(typ)

    # ---------------------------------------------------------- expressions

    def int_expr(self, scope: _Scope, depth: int = 0, attrs: Tuple[str, ...] = ()) -> A.Expr:
        r = self.r
        leaves = [lambda: A.IntLit(r.randint(0, self.maxlit))]
        ints = scope.visible("int")
        if ints:
            leaves.append(lambda: A.VarRef(r.choice(ints)))
        if attrs:
            leaves.append(lambda: A.VarRef(r.choice(attrs)))
        lists = [l for l in scope.visible("list") if l not in self.nil_lists]
        if lists:
            leaves.append(lambda: A.Head(r.choice(lists)))
        curs = [c for c in scope.cursors() if c[0] in self.advanced]
        if curs:
            def read():
                var, table = r.choice(curs)
                return A.CursorRead(var, r.choice(self.table(table).attributes))
            leaves.append(read)
        if depth < 2 and r.random() < 0.35:
            if r.random() < 0.15:
                return A.Neg(self.int_expr(scope, depth + 1, attrs))
            op = r.choice("++-*/")
            return A.BinOp(op, self.int_expr(scope, depth + 1, attrs), self.int_expr(scope, depth + 1, attrs))
        return r.choice(leaves)()

    def list_expr(self, scope: _Scope, depth: int = 0) -> A.Expr:
        r = self.r
        lists = scope.visible("list")
        opts = [lambda: A.Nil()]
        if lists:
            opts.append(lambda: A.VarRef(r.choice(lists)))
        live = [l for l in lists if l not in self.nil_lists]
        if live:
            opts.append(lambda: A.Tail(r.choice(live)))
        if depth < 2:
            opts.append(lambda: A.Cons(self.int_expr(scope, 1), self.list_expr(scope, depth + 1)))
        return r.choice(opts)()

    def cond(self, scope: _Scope, depth: int = 0) -> A.Cond:
        r = self.r
        x = r.random()
        if x < 0.05:
            return A.BoolLit(r.random() < 0.5)
        lists = scope.visible("list")
        if lists and x < 0.25:
            return A.IsNil(r.choice(lists))
        if depth < 2 and x < 0.4:
            if r.random() < 0.3:
                return A.Not(self.cond(scope, depth + 1))
            return A.BoolOp(r.choice(["&&", "||"]), self.cond(scope, depth + 1), self.cond(scope, depth + 1))
        return A.Compare(r.choice("<=>"), self.int_expr(scope, 1), self.int_expr(scope, 1))

    def db_cond(self, scope: _Scope, table: A.TableDecl, depth: int = 0) -> A.Cond:
        r = self.r
        x = r.random()
        if x < 0.15:
            return A.BoolLit(r.random() < 0.7)
        if depth < 1 and x < 0.3:
            if r.random() < 0.4:
                return A.Not(self.db_cond(scope, table, depth + 1))
            return A.BoolOp(r.choice(["&&", "||"]), self.db_cond(scope, table, depth + 1),
                            self.db_cond(scope, table, depth + 1))
        return A.Compare(r.choice("<=>"), A.VarRef(r.choice(table.attributes)),
                         self.int_expr(scope, 1, table.attributes))

    def table(self, name: str) -> A.TableDecl:
        return next(t for t in self.tables if t.name == name)

    # ---------------------------------------------------------- statements

    def block(self, scope: _Scope, budget: int, depth: int) -> Tuple[List[A.Stmt], int]:
        """Up to ``budget`` statements (nested ones count); returns them and the number used."""
        out: List[A.Stmt] = []
        used = 0
        want = self.r.randint(1, max(1, budget))
        while used < want:
            s, n = self.stmt(scope, want - used, depth)
            out.append(s)
            used += n
        return out, used

    def stmt(self, scope: _Scope, budget: int, depth: int) -> Tuple[A.Stmt, int]:
        r = self.r
        kinds = ["assign", "assign", "listassign"]
        if self.cfg.max_inputs is None or self.inputs < self.cfg.max_inputs:
            kinds += ["read", "load"]
        if self.tables:
            kinds += ["select", "write", "write", "write"]
        if scope.cursors():
            kinds += ["next", "next"]
        kinds += ["commit"]
        if budget >= 3 and depth < self.cfg.max_depth:
            kinds += ["if", "if", "while"]
        k = r.choice(kinds)
        if k == "if":
            sid = self.next_id()
            cond = self.cond(scope)
            then, n1 = self.block(_Scope(scope), (budget - 1) // 2, depth + 1)
            rest = budget - 1 - n1
            orelse, n2 = self.block(_Scope(scope), rest, depth + 1) if rest > 0 and r.random() < 0.7 else ([], 0)
            return A.If(sid, cond, tuple(then), tuple(orelse)), 1 + n1 + n2
        if k == "while":
            sid = self.next_id()
            cond = self.cond(scope)
            body, n = self.block(_Scope(scope), min(budget - 1, 3), depth + 1)
            return A.While(sid, cond, tuple(body)), 1 + n
        sid = self.next_id()
        if k == "assign":
            value = self.int_expr(scope)
            name = self.target(scope, "int")
            scope.bind(name, "int")
            return A.Assign(sid, name, value), 1
        if k == "listassign":
            value = self.list_expr(scope)
            name = self.target(scope, "list")
            scope.bind(name, "list")
            if isinstance(value, A.Nil):
                self.nil_lists.add(name)
            else:
                self.nil_lists.discard(name)
            return A.Assign(sid, name, value), 1
        if k in ("read", "load"):
            self.inputs += 1
        if k == "read":
            name = self.target(scope, "int")
            scope.bind(name, "int")
            return A.Read(sid, name), 1
        if k == "load":
            name = self.target(scope, "list")
            scope.bind(name, "list")
            self.nil_lists.discard(name)
            return A.Load(sid, name), 1
        if k == "commit":
            return (A.Commit(sid) if r.random() < 0.6 else A.Rollback(sid)), 1
        if k == "select":
            t = r.choice(self.tables)
            attrs = tuple(a for a in t.attributes if r.random() < 0.7) or (t.attributes[0],)
            where = self.db_cond(scope, t)
            name = self.fresh("cur")
            scope.bind(name, t.name)
            return A.Select(sid, name, attrs, t.name, where), 1
        if k == "next":
            var, _ = r.choice(scope.cursors())
            self.advanced.add(var)
            catch = None
            if r.random() < 0.6:
                catch = self.target(scope, "int")
                scope.bind(catch, "int")
            return A.Next(sid, var, catch), 1
        # db write
        t = r.choice(self.tables)
        x = r.random()
        if x < 0.5:
            op = A.Insert(t.name, tuple(self.int_expr(scope, 1) for _ in t.attributes))
        elif x < 0.75:
            op = A.Update(t.name, r.choice(t.attributes), self.int_expr(scope, 1, t.attributes),
                          self.db_cond(scope, t))
        else:
            op = A.Delete(t.name, self.db_cond(scope, t))
        catch = None
        if r.random() < 0.6:
            catch = self.target(scope, "int")
            scope.bind(catch, "int")
        return A.DbWrite(sid, op, catch), 1

    def model(self, name: str) -> A.ModelDecl:
        self.tables = self.schema()
        body, _ = self.block(_Scope(), self.cfg.max_stmts, 0)
        closing = A.Commit(self.next_id())
        return A.ModelDecl(name, self.tables, tuple(body), A.Commit(0), closing)


def random_model_decl(seed: int, cfg: GenConfig = GenConfig()) -> A.ModelDecl:
    """An unchecked AST; statement ids follow the parser's preorder numbering."""
    return _Gen(random.Random(seed), cfg).model(f"m{seed}")


def random_model(seed: int, cfg: GenConfig = GenConfig()) -> CheckedModel:
    return check(random_model_decl(seed, cfg), bitwidth=cfg.bitwidth)
