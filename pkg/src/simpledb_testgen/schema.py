"""Schema-constraint violation identifiers shared by paths, interpreter and symexec.

Identifiers are strings: ``PK``, ``FK:<table>`` (``FK:<table>:<k>`` for the
k-th further foreign key of the same table to ``<table>``), ``ARITH:<i>``
(0-based, declaration order) and ``REFROW``.  Lists returned here are in the
canonical check order: PK, foreign keys, arithmetic constraints, referenced
row.
"""
from __future__ import annotations

from typing import List, Tuple, Union

from .frontend import ast as A

PK = "PK"
REFROW = "REFROW"


def fk_id(table: A.TableDecl, index: int) -> str:
    target = table.foreign_keys[index].table
    dup = sum(1 for fk in table.foreign_keys[:index] if fk.table == target)
    return f"FK:{target}" if dup == 0 else f"FK:{target}:{dup}"


def arith_id(index: int) -> str:
    return f"ARITH:{index}"


def is_referenced(model, table: str) -> bool:
    return any(fk.table == table for t in model.tables for fk in t.foreign_keys)


def applicable_violations(model, op: A.DbWriteOp) -> List[str]:
    """Violations a db-write can raise, canonical order.  ``model`` is a ModelDecl or CheckedModel."""
    table = model.table(op.table)
    if isinstance(op, A.Insert):
        out = [PK]
        out += [fk_id(table, i) for i in range(len(table.foreign_keys))]
        out += [arith_id(i) for i in range(len(table.arith_constraints))]
        return out
    if isinstance(op, A.Update):
        out = []
        on_pk = op.attribute == table.primary_key
        if on_pk:
            out.append(PK)
        out += [fk_id(table, i) for i, fk in enumerate(table.foreign_keys) if fk.attribute == op.attribute]
        out += [arith_id(i) for i, c in enumerate(table.arith_constraints) if c.attribute == op.attribute]
        if on_pk and is_referenced(model, table.name):
            out.append(REFROW)
        return out
    return [REFROW] if is_referenced(model, table.name) else []


def decode_violation(table: A.TableDecl, vid: str) -> Tuple[str, Union[int, None]]:
    """Map an identifier back to ``('PK'|'FK'|'ARITH'|'REFROW', index)``."""
    if vid == PK:
        return PK, None
    if vid == REFROW:
        return REFROW, None
    if vid.startswith("ARITH:"):
        return "ARITH", int(vid[len("ARITH:"):])
    if vid.startswith("FK:"):
        for i in range(len(table.foreign_keys)):
            if fk_id(table, i) == vid:
                return "FK", i
    raise ValueError(f"unknown violation {vid!r} for table {table.name}")
