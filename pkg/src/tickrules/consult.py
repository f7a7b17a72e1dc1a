"""Backward-chaining consultation with question-ranking heuristics.

Goal-driven search over rules concluding the goal.  When a rule is stuck on
unknown leaf parameters they are asked one at a time, best candidate first:
(1) most frequently used across rule LHSs, (2) larger declared value domain,
(3) further left in the normalized LHS prefix tree, (4) member of a mutually
exclusive evidence pair, then declaration order.  A decisively false conjunct
rejects a rule without asking for the rest of its parameters (the truth
algebra's and(0, NE) = 0 realizes the mutual-exclusion pruning).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import EngineConfig
from .evaluate import EvaluationError, Evaluator
from .krl import ast
from .memory import WorkingMemory, answer_provenance, rule_provenance
from .values import Value


@dataclass(frozen=True)
class Question:
    id: str
    ref: str
    domain: dict
    candidates: tuple[str, ...]  # the ask-point candidate set, rank order


@dataclass
class ConsultResult:
    goal: str
    value: Value | None  # None = undetermined
    questions: list[Question] = field(default_factory=list)

    @property
    def determined(self) -> bool:
        return self.value is not None


# ---------------------------------------------------------------------------
# Question ranking
# ---------------------------------------------------------------------------

def _domain_size(kb: ast.KnowledgeBase, ref_key: str) -> float:
    obj, attr = ref_key.split(".", 1)
    t = kb.attr_type(ast.Ref(obj, attr))
    if t is None:
        return math.inf
    if t.values is not None:
        return float(len(t.values))
    if t.kind == "boolean":
        return 2.0
    if t.kind == "number" and t.range is not None:
        lo, hi = t.range
        if float(lo).is_integer() and float(hi).is_integer():
            return float(int(hi) - int(lo) + 1)
        return float(hi - lo)
    return math.inf  # unbounded domains feed the most hypotheses


def _atom_polarities(rule: ast.Rule):
    """(atom, positive?) pairs for one LHS, left to right."""
    out: list[tuple[ast.Expr, bool]] = []

    def go(e: ast.Expr, positive: bool):
        if isinstance(e, ast.BoolOp):
            for child in e.operands:
                go(child, positive)
        elif isinstance(e, ast.Not):
            go(e.operand, not positive)
        else:
            out.append((e, positive))

    go(rule.lhs, True)
    return out


def mutex_refs(kb: ast.KnowledgeBase) -> frozenset[str]:
    """Refs featuring in mutually exclusive evidence: the same atom appears
    positively in one rule and negated in another."""
    positive: dict[str, set[ast.Expr]] = {}
    negative: dict[str, set[ast.Expr]] = {}
    for rule in kb.rules:
        for atom, pos in _atom_polarities(rule):
            bucket = positive if pos else negative
            bucket.setdefault(rule.name, set()).add(atom)
    out: set[str] = set()
    rules = list(positive.keys() | negative.keys())
    for r1 in rules:
        for r2 in rules:
            if r1 == r2:
                continue
            both = positive.get(r1, set()) & negative.get(r2, set())
            for atom in both:
                for ref in ast.refs_of_atom(atom):
                    if kb.temporal_kind(ref.obj) is None:
                        out.add(ref.key)
    return frozenset(out)


def _decl_index(kb: ast.KnowledgeBase) -> dict[str, int]:
    out = {}
    i = 0
    for obj in kb.objects:
        for attr in obj.attrs:
            out[f"{obj.name}.{attr.name}"] = i
            i += 1
    return out


def rank_question_candidates(candidates: list[str], kb: ast.KnowledgeBase) -> list[str]:
    """Order parameters most-informative-first per the four heuristics."""
    if not candidates:
        raise ValueError("no candidates to rank")
    freq: dict[str, int] = {c: 0 for c in candidates}
    position: dict[str, int] = {c: 1 << 30 for c in candidates}
    for rule in kb.rules:
        atoms = ast.atoms_of(rule.lhs)
        refs_here = set()
        for pos, atom in enumerate(atoms):
            for ref in ast.refs_of_atom(atom):
                key = ref.key
                if key in freq:
                    refs_here.add(key)
                    if pos < position[key]:
                        position[key] = pos
        for key in refs_here:
            freq[key] += 1
    mutex = mutex_refs(kb)
    decl = _decl_index(kb)

    def sort_key(ref: str):
        return (
            -freq[ref],
            -_domain_size(kb, ref),
            position[ref],
            0 if ref in mutex else 1,
            decl.get(ref, 1 << 30),
        )

    return sorted(candidates, key=sort_key)


# ---------------------------------------------------------------------------
# Backward chaining
# ---------------------------------------------------------------------------

def question_domain(kb: ast.KnowledgeBase, ref_key: str) -> dict:
    obj, attr = ref_key.split(".", 1)
    t = kb.attr_type(ast.Ref(obj, attr))
    if t is None:
        return {"kind": "number"}
    domain: dict = {"kind": t.kind}
    if t.kind == "boolean":
        domain["choices"] = [True, False]
    if t.values is not None:
        domain["choices"] = list(t.values)
    if t.range is not None:
        domain["range"] = list(t.range)
    if t.terms:
        domain["terms"] = [name for name, _ in t.terms]
    return domain


class Consultation:
    """Resumable backward-chaining session.

    ``pending`` holds the next question (or None); feed ``answer`` a Value
    or None for "unknown" until ``done``.
    """

    def __init__(
        self,
        kb: ast.KnowledgeBase,
        goal: str,
        config: EngineConfig | None = None,
        wm: WorkingMemory | None = None,
    ):
        if goal not in (wm.declared if wm else WorkingMemory.for_kb(kb).declared):
            raise KeyError(f"goal {goal!r} is not a declared attribute")
        self.kb = kb
        self.goal = goal
        self.config = config or EngineConfig.from_kb(kb)
        self.wm = wm or WorkingMemory.for_kb(kb)
        self.question_log: list[Question] = []
        self.asked: set[str] = set()
        self._qcount = 0
        self.pending: Question | None = None
        self.done = False
        self.result: Value | None = None
        self._concluders: dict[str, list[ast.Rule]] = {}
        for rule in kb.rules:
            for action in rule.actions:
                self._concluders.setdefault(action.target.key, []).append(rule)
        self._gen = self._run()
        self._advance(None)

    # --- driving ---------------------------------------------------------

    def _advance(self, sent):
        try:
            self.pending = self._gen.send(sent)
            self.wm.blackboard.post("pending_questions", self.pending)
        except StopIteration:
            self.pending = None
            self.done = True
            fact = self.wm.lookup(self.goal)
            self.result = fact.value if fact is not None else None

    def answer(self, value: Value | None):
        if self.done or self.pending is None:
            raise RuntimeError("no pending question")
        question = self.pending
        self.asked.add(question.ref)
        if value is not None:
            self.wm.assert_fact(question.ref, value, 0, answer_provenance(question.id))
        self.wm.blackboard.consume("pending_questions")  # answered exactly once
        self._advance(value)

    # --- search ------------------------------------------------------------

    def _evaluator(self) -> Evaluator:
        return Evaluator(
            self.kb, self.wm, None,
            now=0,
            alpha_levels=self.config.alpha_levels,
            epsilon=self.config.singleton_epsilon,
            use_cache=self.config.cache_enabled,
        )

    def _askable(self, ref: str) -> bool:
        if ref in self._concluders:
            return False
        obj, attr = ref.split(".", 1)
        decl = self.kb.attr_decl(ast.Ref(obj, attr))
        return decl is not None and not decl.control

    def _lhs_refs(self, rule: ast.Rule) -> list[str]:
        seen: list[str] = []
        for atom in ast.atoms_of(rule.lhs):
            for ref in ast.refs_of_atom(atom):
                if self.kb.temporal_kind(ref.obj) is None and ref.key not in seen:
                    seen.append(ref.key)
        return seen

    def _run(self):
        yield from self._derive(self.goal, frozenset())

    def _derive(self, ref: str, trail: frozenset[str]):
        if self.wm.lookup(ref) is not None:
            return True
        rules = self._concluders.get(ref, [])
        if not rules:
            if self._askable(ref) and ref not in self.asked:
                yield from self._ask_one(ref, [ref])
            return self.wm.lookup(ref) is not None
        for rule in rules:
            if rule.name in trail:
                continue
            yield from self._try_rule(rule, trail | {rule.name})
            if self.wm.lookup(ref) is not None:
                return True
        return False

    def _ask_one(self, ref: str, candidates: list[str]):
        self._qcount += 1
        question = Question(
            id=f"q{self._qcount}",
            ref=ref,
            domain=question_domain(self.kb, ref),
            candidates=tuple(candidates),
        )
        self.question_log.append(question)
        yield question

    def _try_rule(self, rule: ast.Rule, trail: frozenset[str]):
        evaluator = self._evaluator()
        while True:
            try:
                truth = evaluator.eval_rule_lhs(rule).truth
            except EvaluationError:
                return
            if not truth.is_ne:
                if truth.value >= self.config.theta_fire:
                    self._fire(rule, truth.value)
                return
            unknown = [r for r in self._lhs_refs(rule) if self.wm.lookup(r) is None]
            progressed = False
            for ref in unknown:
                if ref in self._concluders:
                    ok = yield from self._derive(ref, trail)
                    if ok:
                        progressed = True
                        break
            if progressed:
                continue
            askable = [r for r in unknown if self._askable(r) and r not in self.asked]
            if not askable:
                return
            ranked = rank_question_candidates(askable, self.kb)
            yield from self._ask_one(ranked[0], ranked)
            # loop: re-evaluate; a decisive 0 now prunes without more asks

    def _fire(self, rule: ast.Rule, truth_value: float):
        evaluator = self._evaluator()
        staged = []
        for action in rule.actions:
            value = evaluator.arith_value(action.expr, set())
            if value is None:
                return
            staged.append((action, value.with_certainty(rule.cf * truth_value * action.cf)))
        for action, value in staged:
            self.wm.assert_fact(action.target.key, value, 0, rule_provenance(rule.name))


def backward_chain(
    goal: str,
    kb: ast.KnowledgeBase,
    answer_source,
    config: EngineConfig | None = None,
    wm: WorkingMemory | None = None,
) -> ConsultResult:
    """Run a consultation to completion with a callback answer source.

    ``answer_source(question) -> Value | None`` (None meaning unknown).
    """
    consult = Consultation(kb, goal, config, wm)
    while not consult.done:
        consult.answer(answer_source(consult.pending))
    return ConsultResult(goal, consult.result, consult.question_log)
