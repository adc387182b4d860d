"""Recursive-descent parser producing a :class:`ModelDecl`.

Every compound expression of the grammar is parenthesized, so no precedence
handling is needed.  The only real ambiguity is a ``(`` opening a program
condition: it may start a nested condition ``((c) && (c))`` or an
arithmetic comparison ``((a + b) < c)``.  That case backtracks, memoized by
token position.
"""
from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import ast as A
from .lexer import Token, tokenize


class ParseError(Exception):
    def __init__(self, index: int, line: int, col: int, expected: Iterable[str], found: str):
        self.index = index
        self.line = line
        self.col = col
        self.expected: FrozenSet[str] = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"expected one of {{{exp}}}, found {found}")


_COMPARATORS = ("<", "=", ">")
_ARITH = ("+", "-", "*", "/")


class Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.toks = list(tokens)
        self.i = 0
        self.next_id = 0
        self._cond_memo: Dict[int, object] = {}
        self._furthest: Optional[ParseError] = None

    # ------------------------------------------------------------ helpers

    def _peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def _is(self, value: str, k: int = 0) -> bool:
        t = self._peek(k)
        return t is not None and t.kind in ("KW", "PUNCT") and t.value == value

    def _error(self, expected: Iterable[str]) -> ParseError:
        t = self._peek()
        if t is None:
            last = self.toks[-1] if self.toks else None
            line, col = (last.line, last.col + len(last.value)) if last else (1, 1)
            err = ParseError(self.i, line, col, expected, "end of input")
        else:
            err = ParseError(self.i, t.line, t.col, expected, repr(t.value))
        # report the furthest failure seen, merging expectations at equal positions
        f = self._furthest
        if f is None or err.index > f.index:
            self._furthest = err
        elif err.index == f.index:
            self._furthest = ParseError(err.index, err.line, err.col,
                                        err.expected | f.expected, err.found)
        return self._furthest

    def _expect(self, value: str) -> Token:
        if not self._is(value):
            raise self._error([value])
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def _ident(self) -> Token:
        t = self._peek()
        if t is None or t.kind != "IDENT":
            raise self._error(["identifier"])
        self.i += 1
        return t

    def _natural(self) -> Token:
        t = self._peek()
        if t is None or t.kind != "NAT":
            raise self._error(["natural"])
        self.i += 1
        return t

    def _pos(self) -> A.Pos:
        t = self._peek()
        return (t.line, t.col) if t else (0, 0)

    def _fresh_id(self) -> int:
        sid = self.next_id
        self.next_id += 1
        return sid

    # ------------------------------------------------------------ model

    def parse_model(self) -> A.ModelDecl:
        pos = self._pos()
        self._expect("MODEL")
        name = self._ident().value
        tables = []
        while self._is("TABLE"):
            tables.append(self.parse_table())
        if not self._is("COMMIT"):
            raise self._error(["TABLE", "COMMIT"])
        opening = self.parse_commit_like()
        body = []
        while not self._is("ENDMODEL"):
            if self._peek() is None:
                raise self._error(["ENDMODEL"])
            body.append(self.parse_stmt())
        if not body or not isinstance(body[-1], A.Commit):
            raise self._error(["COMMIT"])
        closing = body.pop()
        self._expect("ENDMODEL")
        if self._peek() is not None:
            raise self._error(["end of input"])
        return A.ModelDecl(name, tuple(tables), tuple(body), opening, closing, pos=pos)

    def parse_table(self) -> A.TableDecl:
        pos = self._pos()
        self._expect("TABLE")
        name = self._ident().value
        self._expect("(")
        attrs = []
        # <attrib>+ is "<id>," repeated, terminated by PRIMARY KEY
        while not self._is("PRIMARY"):
            attrs.append(self._ident().value)
            self._expect(",")
        if not attrs:
            raise self._error(["identifier"])
        self._expect("PRIMARY")
        self._expect("KEY")
        self._expect("(")
        pk = self._ident().value
        self._expect(")")
        fks = []
        constrs = []
        while self._is(","):
            self.i += 1
            if self._is("FOREIGN") and not constrs:
                self.i += 1
                self._expect("KEY")
                self._expect("(")
                att = self._ident().value
                self._expect(")")
                self._expect("REFERENCES")
                tab = self._ident().value
                fks.append(A.ForeignKey(att, tab))
            else:
                att = self._ident().value
                op = self._comparator()
                constrs.append(A.ArithConstraint(att, op, int(self._natural().value)))
        self._expect(")")
        self._expect(";")
        return A.TableDecl(name, tuple(attrs), pk, tuple(fks), tuple(constrs), pos=pos)

    def _comparator(self) -> str:
        for c in _COMPARATORS:
            if self._is(c):
                self.i += 1
                return c
        raise self._error(_COMPARATORS)

    # ------------------------------------------------------------ statements

    def parse_commit_like(self) -> A.Stmt:
        pos = self._pos()
        kw = self._peek().value
        self.i += 1
        self._expect("(")
        self._expect(")")
        self._expect(";")
        sid = self._fresh_id()
        return A.Commit(sid, pos=pos) if kw == "COMMIT" else A.Rollback(sid, pos=pos)

    def parse_block(self, terminators: Tuple[str, ...]) -> Tuple[A.Stmt, ...]:
        stmts = []
        while not any(self._is(t) for t in terminators):
            if self._peek() is None:
                raise self._error(terminators)
            stmts.append(self.parse_stmt())
        return tuple(stmts)

    def parse_stmt(self) -> A.Stmt:
        pos = self._pos()
        t = self._peek()
        if t is None:
            raise self._error(["statement"])
        if self._is("IF"):
            self.i += 1
            sid = self._fresh_id()
            cond = self.parse_cond()
            self._expect("THEN")
            then = self.parse_block(("ELSE",))
            self._expect("ELSE")
            orelse = self.parse_block(("ENDIF",))
            self._expect("ENDIF")
            self._expect(";")
            return A.If(sid, cond, then, orelse, pos=pos)
        if self._is("WHILE"):
            self.i += 1
            sid = self._fresh_id()
            cond = self.parse_cond()
            self._expect("DO")
            body = self.parse_block(("ENDWHILE",))
            self._expect("ENDWHILE")
            self._expect(";")
            return A.While(sid, cond, body, pos=pos)
        if self._is("COMMIT") or self._is("ROLLBACK"):
            return self.parse_commit_like()
        if self._is("READ") or self._is("LOAD"):
            kw = t.value
            self.i += 1
            sid = self._fresh_id()
            self._expect("(")
            name = self._ident().value
            self._expect(")")
            self._expect(";")
            return A.Read(sid, name, pos=pos) if kw == "READ" else A.Load(sid, name, pos=pos)
        if self._is("NEXT"):
            sid = self._fresh_id()
            var = self._next_call()
            self._expect(";")
            return A.Next(sid, var, pos=pos)
        if self._is("INSERT") or self._is("UPDATE") or self._is("DELETE"):
            sid = self._fresh_id()
            op = self.parse_db_write()
            self._expect(";")
            return A.DbWrite(sid, op, pos=pos)
        if t.kind == "IDENT":
            target = t.value
            self.i += 1
            self._expect("=")
            sid = self._fresh_id()
            if self._is("SELECT"):
                self.i += 1
                attrs = [self._ident().value]
                while self._is(","):
                    self.i += 1
                    attrs.append(self._ident().value)
                self._expect("FROM")
                table = self._ident().value
                self._expect("WHERE")
                where = self.parse_db_cond()
                self._expect(";")
                return A.Select(sid, target, tuple(attrs), table, where, pos=pos)
            if self._is("CATCH"):
                self.i += 1
                self._expect("(")
                if self._is("NEXT"):
                    var = self._next_call()
                    self._expect(")")
                    self._expect(";")
                    return A.Next(sid, var, catch=target, pos=pos)
                if self._is("INSERT") or self._is("UPDATE") or self._is("DELETE"):
                    op = self.parse_db_write()
                    self._expect(")")
                    self._expect(";")
                    return A.DbWrite(sid, op, catch=target, pos=pos)
                raise self._error(["NEXT", "INSERT", "UPDATE", "DELETE"])
            value = self.parse_expr()
            self._expect(";")
            return A.Assign(sid, target, value, pos=pos)
        raise self._error(["statement"])

    def _next_call(self) -> str:
        self._expect("NEXT")
        self._expect("(")
        var = self._ident().value
        self._expect(")")
        return var

    def parse_db_write(self) -> A.DbWriteOp:
        pos = self._pos()
        if self._is("INSERT"):
            self.i += 1
            self._expect("INTO")
            table = self._ident().value
            self._expect("VALUES")
            self._expect("(")
            values = [self.parse_int_expr()]
            while self._is(","):
                self.i += 1
                values.append(self.parse_int_expr())
            self._expect(")")
            return A.Insert(table, tuple(values), pos=pos)
        if self._is("UPDATE"):
            self.i += 1
            table = self._ident().value
            self._expect("SET")
            att = self._ident().value
            self._expect("=")
            value = self.parse_int_expr()
            self._expect("WHERE")
            where = self.parse_db_cond()
            return A.Update(table, att, value, where, pos=pos)
        self._expect("DELETE")
        self._expect("FROM")
        table = self._ident().value
        self._expect("WHERE")
        where = self.parse_db_cond()
        return A.Delete(table, where, pos=pos)

    # ------------------------------------------------------------ expressions

    def parse_expr(self) -> A.Expr:
        """``<int-expr> | <list-expr>``; a bare identifier is typed later."""
        pos = self._pos()
        if self._is("NIL") or self._is("["):
            return self.parse_list_expr()
        t = self._peek()
        if t is not None and t.kind == "IDENT" and self._is(".", 1) and self._is("TAIL", 2):
            return self.parse_list_expr()
        return self.parse_int_expr()

    def parse_list_expr(self) -> A.Expr:
        pos = self._pos()
        if self._is("NIL"):
            self.i += 1
            return A.Nil(pos=pos)
        if self._is("["):
            self.i += 1
            head = self.parse_int_expr()
            self._expect(",")
            tail = self.parse_list_expr()
            self._expect("]")
            return A.Cons(head, tail, pos=pos)
        name = self._ident().value
        if self._is("."):
            self.i += 1
            self._expect("TAIL")
            return A.Tail(name, pos=pos)
        return A.VarRef(name, pos=pos)

    def parse_int_expr(self) -> A.Expr:
        pos = self._pos()
        t = self._peek()
        if t is None:
            raise self._error(["expression"])
        if t.kind == "NAT":
            self.i += 1
            return A.IntLit(int(t.value), pos=pos)
        if t.kind == "IDENT":
            self.i += 1
            if self._is("."):
                self.i += 1
                self._expect("HEAD")
                return A.Head(t.value, pos=pos)
            if self._is("("):
                self.i += 1
                att = self._ident().value
                self._expect(")")
                return A.CursorRead(t.value, att, pos=pos)
            return A.VarRef(t.value, pos=pos)
        if self._is("("):
            self.i += 1
            if self._is("-"):
                self.i += 1
                operand = self.parse_int_expr()
                self._expect(")")
                return A.Neg(operand, pos=pos)
            left = self.parse_int_expr()
            for op in _ARITH:
                if self._is(op):
                    self.i += 1
                    break
            else:
                raise self._error(_ARITH)
            right = self.parse_int_expr()
            self._expect(")")
            return A.BinOp(op, left, right, pos=pos)
        raise self._error(["identifier", "natural", "("])

    # ------------------------------------------------------------ conditions

    def parse_cond(self) -> A.Cond:
        start = self.i
        memo = self._cond_memo.get(start)
        if memo is not None:
            if isinstance(memo, ParseError):
                raise memo
            node, end = memo
            self.i = end
            return node
        try:
            node = self._parse_cond()
        except ParseError as err:
            self._cond_memo[start] = err
            raise
        self._cond_memo[start] = (node, self.i)
        return node

    def _parse_cond(self) -> A.Cond:
        pos = self._pos()
        if self._is("TRUE") or self._is("FALSE"):
            value = self._peek().value == "TRUE"
            self.i += 1
            return A.BoolLit(value, pos=pos)
        self._expect("(")
        if self._is("!"):
            self.i += 1
            operand = self.parse_cond()
            self._expect(")")
            return A.Not(operand, pos=pos)
        t = self._peek()
        if t is not None and t.kind == "IDENT" and self._is("=", 1) and self._is("NIL", 2):
            self.i += 3
            self._expect(")")
            return A.IsNil(t.value, pos=pos)
        save = self.i
        try:
            left = self.parse_cond()
            if self._is("&&") or self._is("||"):
                op = self._peek().value
                self.i += 1
                right = self.parse_cond()
                self._expect(")")
                return A.BoolOp(op, left, right, pos=pos)
        except ParseError:
            pass
        self.i = save
        left_e = self.parse_int_expr()
        op = self._comparator()
        right_e = self.parse_int_expr()
        self._expect(")")
        return A.Compare(op, left_e, right_e, pos=pos)

    def parse_db_cond(self) -> A.Cond:
        pos = self._pos()
        if self._is("TRUE") or self._is("FALSE"):
            value = self._peek().value == "TRUE"
            self.i += 1
            return A.BoolLit(value, pos=pos)
        self._expect("(")
        if self._is("!"):
            self.i += 1
            operand = self.parse_db_cond()
            self._expect(")")
            return A.Not(operand, pos=pos)
        t = self._peek()
        if t is not None and t.kind == "IDENT":
            self.i += 1
            attr = A.VarRef(t.value, pos=(t.line, t.col))
            op = self._comparator()
            right = self.parse_int_expr()
            self._expect(")")
            return A.Compare(op, attr, right, pos=pos)
        left = self.parse_db_cond()
        if not (self._is("&&") or self._is("||")):
            raise self._error(["&&", "||"])
        op = self._peek().value
        self.i += 1
        right = self.parse_db_cond()
        self._expect(")")
        return A.BoolOp(op, left, right, pos=pos)


def parse(tokens: Sequence[Token]) -> A.ModelDecl:
    return Parser(tokens).parse_model()


def parse_source(source: str) -> A.ModelDecl:
    return parse(tokenize(source))
