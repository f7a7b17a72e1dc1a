"""LHS normalization: n-ary conjunctions/disjunctions become right-nested
binary prefix trees, preserving atom order (atom positions feed the
question-ranking heuristics)."""
from __future__ import annotations

from . import ast


def _flatten(op: str, operands) -> list[ast.Expr]:
    out: list[ast.Expr] = []
    for o in operands:
        if isinstance(o, ast.BoolOp) and o.op == op:
            out.extend(_flatten(op, o.operands))
        else:
            out.append(o)
    return out


def normalize_lhs(expr: ast.Expr) -> ast.Expr:
    """Rewrite ``a & b & c & d`` into ``&(a, &(b, &(c, d)))`` recursively.

    Same-operator nests introduced by parentheses are flattened first
    (associativity), so the result depends only on atom order.
    """
    if isinstance(expr, ast.BoolOp):
        children = [normalize_lhs(o) for o in _flatten(expr.op, expr.operands)]
        out = children[-1]
        for child in reversed(children[:-1]):
            out = ast.BoolOp(expr.op, (child, out), loc=expr.loc)
        return out
    if isinstance(expr, ast.Not):
        return ast.Not(normalize_lhs(expr.operand), loc=expr.loc)
    return expr


def normalize_kb(kb: ast.KnowledgeBase) -> ast.KnowledgeBase:
    """Normalize every rule LHS and every origin/open/close condition."""
    events = tuple(
        ast.EventDecl(e.name, normalize_lhs(e.origin_condition), loc=e.loc) for e in kb.events
    )
    intervals = tuple(
        ast.IntervalDecl(i.name, normalize_lhs(i.open_condition), normalize_lhs(i.close_condition), loc=i.loc)
        for i in kb.intervals
    )
    rules = tuple(
        ast.Rule(r.name, r.kind, normalize_lhs(r.lhs), r.actions, r.cf, loc=r.loc) for r in kb.rules
    )
    return ast.KnowledgeBase(kb.types, kb.objects, events, intervals, rules, kb.config)
