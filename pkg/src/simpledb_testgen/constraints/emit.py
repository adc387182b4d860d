"""Alloy-syntax rendering of constraint systems, plus a normalizer for comparisons."""
from __future__ import annotations

import re
from typing import Dict, List

from . import ir as I


def _wrap_quant(s: str, node) -> str:
    return f"({s})" if isinstance(node, (I.Quant, I.Implies, I.Iff)) else s


def _minrow(source: str, pk: str) -> str:
    return f"{{a:{source} | all b:{source} | a.{pk}<=b.{pk}}}"


def term_str(t) -> str:
    if isinstance(t, I.Var):
        return t.var.name
    if isinstance(t, I.Lit):
        return str(t.value)
    if isinstance(t, I.Bound):
        return t.name
    if isinstance(t, I.MinRow):
        return _minrow(t.source.name, t.pk)
    if isinstance(t, I.Field):
        return f"{term_str(t.row)}.{t.attr}"
    if isinstance(t, I.Arith):
        left = term_str(t.left)
        if isinstance(t.left, (I.Arith, I.Negate, I.Ite)):
            left = f"({left})"
        return f"{left}.{t.op}[{term_str(t.right)}]"
    if isinstance(t, I.Negate):
        return f"(- ({term_str(t.operand)}))"
    if isinstance(t, (I.ListHead, I.ListTail)):
        inner = term_str(t.lst)
        if isinstance(t.lst, I.Cons):
            inner = f"({inner})"
        return f"{inner}.{'head' if isinstance(t, I.ListHead) else 'tail'}"
    if isinstance(t, I.NilTerm):
        return "Nil"
    if isinstance(t, I.Cons):
        return f"{{c: List | c.head = {term_str(t.head)} && c.tail = {term_str(t.tail)}}}"
    if isinstance(t, I.Ite):
        return f"({formula_str(t.cond)} => {term_str(t.then)} else {term_str(t.orelse)})"
    raise TypeError(f"not a term: {t!r}")


def formula_str(f) -> str:
    if isinstance(f, I.BoolConst):
        return "(0=0)" if f.value else "(0=1)"
    if isinstance(f, I.Cmp):
        s = f"{term_str(f.left)} {f.op} {term_str(f.right)}"
        return f"({s})" if f.paren else s
    if isinstance(f, I.IsNil):
        return f"{term_str(f.lst)} = Nil"
    if isinstance(f, I.Not):
        return f"!({formula_str(f.operand)})"
    if isinstance(f, (I.And, I.Or)):
        op = " && " if isinstance(f, I.And) else " || "
        s = op.join(_wrap_quant(formula_str(x), x) for x in f.items)
        return f"({s})" if f.paren else s
    if isinstance(f, I.Implies):
        return f"{_wrap_quant(formula_str(f.left), f.left)} => {_wrap_quant(formula_str(f.right), f.right)}"
    if isinstance(f, I.Iff):
        return f"{_wrap_quant(formula_str(f.left), f.left)} <=> {_wrap_quant(formula_str(f.right), f.right)}"
    if isinstance(f, I.In):
        return f"{f.row.name} in {f.target.name}"
    if isinstance(f, I.Quant):
        dom = f.domain.name if f.domain is not None else f.table
        names = ",".join(f.names)
        head = f"{f.kind} disj {names}:{dom}" if f.disj else f"{f.kind} {names}:{dom}"
        return f"{head} | {formula_str(f.body)}"
    if isinstance(f, I.Card):
        return f"#{f.target.name}{f.op}{f.value}"
    if isinstance(f, I.AddRow):
        return f"{f.new.name}={f.old.name}+{f.row.name}"
    if isinstance(f, I.DropMin):
        return f"{f.new.name}={f.old.name} - {_minrow(f.old.name, f.pk)}"
    raise TypeError(f"not a formula: {f!r}")


def sort_name(sort: str) -> str:
    if sort == I.INT:
        return "Int"
    if sort == I.LIST:
        return "List + Nil"
    return sort[len("table("):-1]


def decl_str(v: I.SymVar) -> str:
    if v.is_table:
        return f"sig {v.name} in {v.table} {{}}"
    return f"one sig {v.name} in {sort_name(v.sort)} {{}}"


def item_str(item) -> str:
    if isinstance(item, I.VarDecl):
        return decl_str(item.var)
    return f"fact{{{formula_str(item.formula)}}}"


def sort_block(table) -> List[str]:
    attrs = sorted(table.attributes)
    up = table.name.upper()
    fields = ",".join(f"{a} : Int" for a in attrs)
    eq = " && ".join(f"a.{a} = b.{a}" for a in attrs)
    return [
        f"// START of Alloy type definition for table {up}",
        f"sig {table.name}{{{fields}}}",
        f"pred equal{table.name}[a:{table.name},b: {table.name}]",
        f"{{{eq}}}",
        f"fact{{all disj a,b: {table.name} | !equal{table.name}[a,b]}}",
        f"// END of Alloy type definition for table {up}",
    ]


def _assert_order(cs: I.ConstraintSystem) -> List[I.SymVar]:
    prog = [v for v in cs.inputs if not v.is_table]
    tables = {v.table: v for v in cs.inputs if v.is_table}
    return prog + [tables[t.name] for t in cs.tables if t.name in tables]


def emit_constraints_text(cs: I.ConstraintSystem) -> str:
    out = [f"module {cs.name}"]
    for t in cs.tables:
        out.extend(sort_block(t))
        out.append("")
        out.extend(item_str(i) for i in cs.schema.get(t.name, ()))
        out.append("")
    if cs.tables or cs.body:  # an empty system is just the header and the assertion
        out.append("one sig Nil {}")
        out.append("sig List {head: Int,tail: List + Nil}")
        out.append("")
    out.extend(item_str(i) for i in cs.body)
    if cs.body:
        out.append("")
    ins = _assert_order(cs)
    claim = " && ".join(f"{v.name} in {sort_name(v.sort)}" for v in ins) if ins else "(0=0)"
    out.append(f"assert inputsExist {{!({claim}) }}")
    out.append("check inputsExist")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- normalization

_FRESH = re.compile(r"\b([A-Za-z_][A-Za-z0-9_]*?)(INPUT|INTERNAL)(DB|PROG)(\d+)\b")


def canonical_names(text: str) -> str:
    """Renumber fresh names per kind in order of first appearance."""
    mapping: Dict[str, str] = {}
    counters: Dict[str, int] = {}

    def sub(m: re.Match) -> str:
        full = m.group(0)
        if full not in mapping:
            kind = m.group(2) + m.group(3)
            counters[kind] = counters.get(kind, 0) + 1
            mapping[full] = f"{m.group(1)}{kind}{counters[kind]}"
        return mapping[full]

    return _FRESH.sub(sub, text)


def _strip(text: str) -> str:
    lines = [re.sub(r"//.*", "", l) for l in text.splitlines()]
    return "\n".join(lines)


def split_paragraphs(text: str) -> List[str]:
    """Top-level ``fact``, ``sig``, ``pred``, ``assert``, ``check`` and ``module`` paragraphs, whitespace removed."""
    src = re.sub(r"\s+", " ", _strip(text)).strip()
    out = []
    i = 0
    word = re.compile(r"(module|check) +[A-Za-z0-9_]+")
    block = re.compile(r"(fact|one +sig|sig|pred|assert)\b")
    while i < len(src):
        if src[i] == " ":
            i += 1
            continue
        m = word.match(src, i)
        if m:
            out.append(re.sub(r"\s+", "", m.group(0)))
            i = m.end()
            continue
        if not block.match(src, i):
            raise ValueError(f"unrecognized text at {src[i:i + 30]!r}")
        k = src.index("{", i)
        depth = 0
        while True:
            if src[k] == "{":
                depth += 1
            elif src[k] == "}":
                depth -= 1
                if depth == 0:
                    break
            k += 1
        out.append(re.sub(r"\s+", "", src[i:k + 1]))
        i = k + 1
    return out


def normalize(text: str) -> List[str]:
    """Paragraph list of an Alloy document with whitespace dropped and fresh names canonical."""
    return split_paragraphs(canonical_names(_strip(text)))
