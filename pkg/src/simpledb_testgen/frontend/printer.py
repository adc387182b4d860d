"""Render a ModelDecl back to SimpleDB source."""
from __future__ import annotations

from typing import List

from . import ast as A

_INDENT = "    "


def expr_str(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.VarRef):
        return e.name
    if isinstance(e, A.BinOp):
        return f"({expr_str(e.left)} {e.op} {expr_str(e.right)})"
    if isinstance(e, A.Neg):
        return f"(- {expr_str(e.operand)})"
    if isinstance(e, A.Head):
        return f"{e.name}.HEAD"
    if isinstance(e, A.Tail):
        return f"{e.name}.TAIL"
    if isinstance(e, A.CursorRead):
        return f"{e.var}({e.attribute})"
    if isinstance(e, A.Nil):
        return "NIL"
    if isinstance(e, A.Cons):
        return f"[{expr_str(e.head)}, {expr_str(e.tail)}]"
    raise TypeError(f"not an expression: {e!r}")


def cond_str(c: A.Cond) -> str:
    if isinstance(c, A.BoolLit):
        return "TRUE" if c.value else "FALSE"
    if isinstance(c, A.BoolOp):
        return f"({cond_str(c.left)} {c.op} {cond_str(c.right)})"
    if isinstance(c, A.Not):
        return f"(!{cond_str(c.operand)})"
    if isinstance(c, A.Compare):
        return f"({expr_str(c.left)} {c.op} {expr_str(c.right)})"
    if isinstance(c, A.IsNil):
        return f"({c.name} = NIL)"
    raise TypeError(f"not a condition: {c!r}")


def db_write_str(op: A.DbWriteOp) -> str:
    if isinstance(op, A.Insert):
        vals = ", ".join(expr_str(v) for v in op.values)
        return f"INSERT INTO {op.table} VALUES ({vals})"
    if isinstance(op, A.Update):
        return (f"UPDATE {op.table} SET {op.attribute} = {expr_str(op.value)} "
                f"WHERE {cond_str(op.where)}")
    return f"DELETE FROM {op.table} WHERE {cond_str(op.where)}"


def table_str(t: A.TableDecl) -> str:
    parts = [f"{a}," for a in t.attributes]
    parts.append(f"PRIMARY KEY({t.primary_key})")
    for fk in t.foreign_keys:
        parts.append(f",FOREIGN KEY({fk.attribute}) REFERENCES {fk.table}")
    for c in t.arith_constraints:
        parts.append(f",{c.attribute} {c.op} {c.value}")
    return f"TABLE {t.name} ({''.join(parts)});"


def _stmt_lines(s: A.Stmt, depth: int, out: List[str]) -> None:
    pad = _INDENT * depth
    if isinstance(s, A.If):
        out.append(f"{pad}IF {cond_str(s.cond)} THEN")
        for c in s.then:
            _stmt_lines(c, depth + 1, out)
        out.append(f"{pad}ELSE")
        for c in s.orelse:
            _stmt_lines(c, depth + 1, out)
        out.append(f"{pad}ENDIF;")
    elif isinstance(s, A.While):
        out.append(f"{pad}WHILE {cond_str(s.cond)} DO")
        for c in s.body:
            _stmt_lines(c, depth + 1, out)
        out.append(f"{pad}ENDWHILE;")
    elif isinstance(s, A.Assign):
        out.append(f"{pad}{s.target} = {expr_str(s.value)};")
    elif isinstance(s, A.Read):
        out.append(f"{pad}READ({s.target});")
    elif isinstance(s, A.Load):
        out.append(f"{pad}LOAD({s.target});")
    elif isinstance(s, A.Select):
        attrs = ",".join(s.attributes)
        out.append(f"{pad}{s.target} = SELECT {attrs} FROM {s.table} WHERE {cond_str(s.where)};")
    elif isinstance(s, A.Next):
        call = f"NEXT({s.var})"
        out.append(f"{pad}{s.catch} = CATCH({call});" if s.catch else f"{pad}{call};")
    elif isinstance(s, A.DbWrite):
        w = db_write_str(s.op)
        out.append(f"{pad}{s.catch} = CATCH({w});" if s.catch else f"{pad}{w};")
    elif isinstance(s, A.Commit):
        out.append(f"{pad}COMMIT();")
    elif isinstance(s, A.Rollback):
        out.append(f"{pad}ROLLBACK();")
    else:
        raise TypeError(f"not a statement: {s!r}")


def pretty_print(model: A.ModelDecl) -> str:
    out = [f"MODEL {model.name}"]
    out.extend(table_str(t) for t in model.tables)
    out.append("COMMIT();")
    for s in model.program:
        _stmt_lines(s, 1, out)
    out.append("COMMIT();")
    out.append("ENDMODEL")
    return "\n".join(out) + "\n"
