"""Canonical pretty-printer; parse(print(parse(x))) == parse(x)."""
from __future__ import annotations

from ..values import MembershipFunction
from . import ast

_ARITH_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int) or (isinstance(x, float) and x.is_integer() and abs(x) < 1e15):
        return str(int(x))
    return repr(float(x))


def _str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_arith(e: ast.ArithExpr, prec: int = 0) -> str:
    if isinstance(e, ast.Num):
        return _num(e.value)
    if isinstance(e, ast.Str):
        return _str(e.value)
    if isinstance(e, ast.Bool):
        return "true" if e.value else "false"
    if isinstance(e, ast.InexactLit):
        return f"inexact({_num(e.center)}, {_num(e.half_width)})"
    if isinstance(e, ast.Ref):
        return e.key
    assert isinstance(e, ast.BinArith)
    p = _ARITH_PREC[e.op]
    left = print_arith(e.left, p)
    right = print_arith(e.right, p + 1)  # left-assoc: right child binds tighter
    text = f"{left} {e.op} {right}"
    return f"({text})" if p < prec else text


_BOOL_PREC = {"or": 1, "and": 2}


def print_expr(e: ast.Expr, prec: int = 0) -> str:
    if isinstance(e, ast.BoolOp):
        p = _BOOL_PREC[e.op]
        sep = " & " if e.op == "and" else " v "
        text = sep.join(print_expr(o, p) for o in _flat(e))
        return f"({text})" if p < prec else text
    if isinstance(e, ast.Not):
        return "~" + print_expr(e.operand, 3)
    if isinstance(e, ast.Comparison):
        return f"{print_arith(e.left)} {e.op} {print_arith(e.right)}"
    if isinstance(e, ast.BoolRef):
        return e.ref.key
    if isinstance(e, ast.TemporalVar):
        return e.name
    if isinstance(e, ast.AllenAtom):
        return f"{e.left} {e.rel} {e.right}"
    if isinstance(e, ast.Bool):
        return "true" if e.value else "false"
    raise TypeError(f"unprintable expression {e!r}")


def _flat(e: ast.BoolOp) -> list[ast.Expr]:
    out: list[ast.Expr] = []
    for o in e.operands:
        if isinstance(o, ast.BoolOp) and o.op == e.op:
            out.extend(_flat(o))
        else:
            out.append(o)
    return out


def _print_mf(mf: MembershipFunction) -> str:
    pts = mf.points
    if len(pts) == 3 and pts[0][1] == 0.0 and pts[1][1] == 1.0 and pts[2][1] == 0.0:
        return f"triangle({_num(pts[0][0])}, {_num(pts[1][0])}, {_num(pts[2][0])})"
    if (
        len(pts) == 4
        and pts[0][1] == 0.0 and pts[1][1] == 1.0 and pts[2][1] == 1.0 and pts[3][1] == 0.0
    ):
        return f"trapezoid({_num(pts[0][0])}, {_num(pts[1][0])}, {_num(pts[2][0])}, {_num(pts[3][0])})"
    body = ", ".join(f"({_num(x)}, {_num(m)})" for x, m in pts)
    return f"points({body})"


def print_kb(kb: ast.KnowledgeBase) -> str:
    """Render a KnowledgeBase as canonical KRL text."""
    chunks: list[str] = []
    for t in kb.types:
        lines = [f"type {t.name} {{", f"  kind: {t.kind};"]
        if t.range is not None:
            lines.append(f"  range: [{_num(t.range[0])}, {_num(t.range[1])}];")
        if t.values is not None:
            vals = ", ".join(_str(v) if isinstance(v, str) else _num(v) for v in t.values)
            lines.append(f"  values: {{{vals}}};")
        for name, mf in t.terms:
            lines.append(f"  term {name}: {_print_mf(mf)};")
        lines.append("}")
        chunks.append("\n".join(lines))
    for o in kb.objects:
        lines = [f"object {o.name} {{"]
        for a in o.attrs:
            control = " control" if a.control else ""
            lines.append(f"  attr {a.name}: {a.type_name}{control};")
        lines.append("}")
        chunks.append("\n".join(lines))
    for e in kb.events:
        chunks.append(f"event {e.name} {{\n  origin: {print_expr(e.origin_condition)};\n}}")
    for i in kb.intervals:
        chunks.append(
            f"interval {i.name} {{\n  open: {print_expr(i.open_condition)};\n"
            f"  close: {print_expr(i.close_condition)};\n}}"
        )
    for r in kb.rules:
        lines = [f"rule {r.name} {{"]
        if r.kind.kind == "periodic":
            lines.append(f"  kind: periodic({r.kind.period});")
        elif r.kind.kind == "response":
            lines.append(f"  kind: response({r.kind.trigger});")
        lines.append(f"  if: {print_expr(r.lhs)};")
        acts = []
        for a in r.actions:
            cf = f" cf {_num(a.cf)}" if a.cf != 1.0 else ""
            acts.append(f"{a.target.key} := {print_arith(a.expr)}{cf}")
        lines.append(f"  then: {', '.join(acts)};")
        if r.cf != 1.0:
            lines.append(f"  cf: {_num(r.cf)};")
        lines.append("}")
        chunks.append("\n".join(lines))
    if kb.config is not None:
        lines = ["config {"]
        for key, value in kb.config.entries:
            if isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, str):
                rendered = value
            else:
                rendered = _num(value)
            lines.append(f"  {key}: {rendered};")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
