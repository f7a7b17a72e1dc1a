"""Expression evaluation against working memory and the event-flow
interpretation.

A rule LHS may mix static atoms (comparisons over object attributes, boolean
refs) with temporal atoms (Allen relations, .c/.l comparisons, bare temporal
variables); connectives route through the truth algebra either way.  Static
subtrees are cached per (rule, node id) with their dependency ref sets;
temporal atoms are never cached since their truth follows the interpretation,
not working memory.
"""
from __future__ import annotations

from dataclasses import dataclass

from .krl import ast
from .memory import WorkingMemory
from .temporal import EventFlowInterpretation, relation_holds, temporal_attr_truth
from .values import (
    NE,
    FALSE,
    TRUE,
    TruthValue,
    Value,
    ValueAlgebraError,
    neg_arith,
    neg_compare,
    truth_and,
    truth_not,
    truth_or,
)


class EvaluationError(Exception):
    """A runtime failure while interpreting an expression (e.g. an undefined
    quotient in an RHS)."""


def is_temporal_atom(kb: ast.KnowledgeBase, atom: ast.Expr) -> bool:
    if isinstance(atom, (ast.AllenAtom, ast.TemporalVar)):
        return True
    if isinstance(atom, ast.Comparison):
        for side in (atom.left, atom.right):
            if isinstance(side, ast.Ref) and kb.temporal_kind(side.obj) is not None:
                return True
    return False


def node_ids(expr: ast.Expr) -> dict[int, ast.Expr]:
    """Stable preorder numbering of an LHS tree (cache keys)."""
    return {i: node for i, node in enumerate(ast.walk_expr(expr))}


@dataclass
class EvalOutcome:
    truth: TruthValue
    deps: frozenset[str]  # object-attribute refs touched (including misses)


class Evaluator:
    """Evaluates expressions for one KB against one WM (and optionally one
    interpretation for mixed LHS trees)."""

    def __init__(
        self,
        kb: ast.KnowledgeBase,
        wm: WorkingMemory,
        interp: EventFlowInterpretation | None = None,
        *,
        now: int = 0,
        alpha_levels: int = 11,
        epsilon: float = 1e-6,
        use_cache: bool = True,
    ):
        self.kb = kb
        self.wm = wm
        self.interp = interp
        self.now = now
        self.alpha_levels = alpha_levels
        self.epsilon = epsilon
        self.use_cache = use_cache

    # --- values -----------------------------------------------------------

    def arith_value(self, e: ast.ArithExpr, deps: set[str]) -> Value | None:
        """Value of an arithmetic expression; None when a fact is missing."""
        if isinstance(e, ast.Num):
            return Value(e.value)
        if isinstance(e, ast.Str):
            return Value(e.value)
        if isinstance(e, ast.Bool):
            return Value(e.value)
        if isinstance(e, ast.InexactLit):
            from .values import Inexact

            return Value(Inexact(e.center, e.half_width))
        if isinstance(e, ast.Ref):
            if self.kb.temporal_kind(e.obj) is not None:
                if self.interp is None:
                    return None
                if e.attr == "c":
                    return Value(self.interp.count(e.obj))
                dur = self.interp.duration(e.obj, self.now)
                return None if dur is None else Value(dur)
            deps.add(e.key)
            fact = self.wm.lookup(e.key)
            return None if fact is None else fact.value
        assert isinstance(e, ast.BinArith)
        left = self.arith_value(e.left, deps)
        right = self.arith_value(e.right, deps)
        if left is None or right is None:
            return None
        table = self._term_table_for_arith(e)
        try:
            result = neg_arith(
                e.op, left, right,
                term_table=table, alpha_levels=self.alpha_levels,
                epsilon=self._epsilon_for(e),
            )
        except ValueAlgebraError as exc:
            raise EvaluationError(str(exc)) from exc
        return result

    def _term_table_for_arith(self, e: ast.BinArith):
        # term strings inside arithmetic resolve against the first ref's type
        for node in ast.walk_arith(e):
            if isinstance(node, ast.Ref) and self.kb.temporal_kind(node.obj) is None:
                return self.kb.term_table_for(node)
        return {}

    def _epsilon_for(self, *sides: ast.ArithExpr) -> float:
        """Singleton half-width: a fraction of the first involved
        attribute's declared range, absolute when unbounded."""
        for side in sides:
            for node in ast.walk_arith(side):
                if isinstance(node, ast.Ref) and self.kb.temporal_kind(node.obj) is None:
                    t = self.kb.attr_type(node)
                    if t is not None and t.range is not None:
                        lo, hi = t.range
                        if hi > lo:
                            return self.epsilon * (hi - lo)
        return self.epsilon

    # --- atoms --------------------------------------------------------------

    def _comparison_truth(self, atom: ast.Comparison, deps: set[str]) -> TruthValue:
        left = self.arith_value(atom.left, deps)
        right = self.arith_value(atom.right, deps)
        if left is None or right is None:
            return NE
        table = {}
        for side in (atom.left, atom.right):
            if isinstance(side, ast.Ref) and self.kb.temporal_kind(side.obj) is None:
                table = self.kb.term_table_for(side)
                if table:
                    break
        try:
            return neg_compare(atom.op, left, right, term_table=table)
        except ValueAlgebraError as exc:
            raise EvaluationError(str(exc)) from exc

    def atom_truth(self, atom: ast.Expr, deps: set[str]) -> TruthValue:
        if isinstance(atom, ast.Bool):
            return TRUE if atom.value else FALSE
        if isinstance(atom, ast.BoolRef):
            deps.add(atom.ref.key)
            fact = self.wm.lookup(atom.ref.key)
            if fact is None:
                return NE
            return TRUE if fact.value.payload else FALSE
        if isinstance(atom, (ast.AllenAtom, ast.TemporalVar)):
            if self.interp is None:
                return NE
            if isinstance(atom, ast.TemporalVar):
                lane = self.interp.lanes[atom.name]
                if lane.kind == "event":
                    return TRUE if lane.count > 0 else FALSE
                return TRUE if lane.open_now else FALSE
            return relation_holds(
                atom.rel,
                self.interp.occurrence(atom.left),
                self.interp.kind(atom.left),
                self.interp.occurrence(atom.right),
                self.interp.kind(atom.right),
                self.now,
            )
        if isinstance(atom, ast.Comparison):
            if is_temporal_atom(self.kb, atom):
                if self.interp is None:
                    return NE
                return temporal_attr_truth(atom, self.interp, self.now)
            return self._comparison_truth(atom, deps)
        raise TypeError(f"unknown atom {atom!r}")

    # --- trees ----------------------------------------------------------------

    def eval_expr(self, expr: ast.Expr) -> EvalOutcome:
        deps: set[str] = set()
        truth = self._eval(expr, deps, rule=None, node_id=None, ids=None)
        return EvalOutcome(truth, frozenset(deps))

    def eval_rule_lhs(self, rule: ast.Rule) -> EvalOutcome:
        """Evaluate a rule's LHS with per-node caching of static subtrees."""
        deps: set[str] = set()
        ids = {id(node): i for i, node in node_ids(rule.lhs).items()} if self.use_cache else None
        truth = self._eval(rule.lhs, deps, rule=rule.name, node_id=0, ids=ids)
        return EvalOutcome(truth, frozenset(deps))

    def _static_pure(self, expr: ast.Expr) -> bool:
        return not any(is_temporal_atom(self.kb, a) for a in ast.atoms_of(expr))

    def _eval(self, expr: ast.Expr, deps: set[str], rule, node_id, ids) -> TruthValue:
        cacheable = (
            self.use_cache
            and rule is not None
            and ids is not None
            and self._static_pure(expr)
        )
        if cacheable:
            nid = ids[id(expr)]
            entry = self.wm.cache.get(rule, nid, self.wm.seq_of)
            if entry is not None:
                deps.update(entry.deps)
                return entry.truth
        local: set[str] = set()
        if isinstance(expr, ast.BoolOp):
            combine = truth_and if expr.op == "and" else truth_or
            truth = self._eval(expr.operands[0], local, rule, node_id, ids)
            for operand in expr.operands[1:]:
                truth = combine(truth, self._eval(operand, local, rule, node_id, ids))
        elif isinstance(expr, ast.Not):
            truth = truth_not(self._eval(expr.operand, local, rule, node_id, ids))
        else:
            truth = self.atom_truth(expr, local)
        deps.update(local)
        if cacheable:
            self.wm.cache.put(rule, ids[id(expr)], truth, local, self.wm.seq)
        return truth
