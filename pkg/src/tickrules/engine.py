"""The inference core: five-phase forward cycle over ticks.

Each tick runs: A (active-rule selection) -> S'' (matching: event-flow
interpretation already done once at tick start, static+temporal fragment
evaluation, rank computation) -> K (conflict resolution) -> W' (firing), the
A..W' group looping until quiescence or the firing cap, then D
(defuzzification of values fuzzified during inference).  The conflict set is
rank-ordered, deduplicated by instantiation signature, persists across the
inner loops, and is re-validated each loop; fired signatures are refractory.
"""
from __future__ import annotations

from dataclasses import dataclass

from .evaluate import EvaluationError, Evaluator
from .krl import ast
from .memory import EXTERNAL, Provenance, WorkingMemory, rule_provenance
from .temporal import EventFlowInterpretation
from .values import (
    MembershipFunction,
    TruthValue,
    Value,
    defuzzify,
    to_literal,
)


@dataclass(frozen=True)
class EngineConfig:
    theta_fire: float = 0.5
    max_firings: int = 100
    alpha_levels: int = 11
    singleton_epsilon: float = 1e-6
    firing_mode: str = "multi"  # "multi" | "single"
    cache_enabled: bool = True
    conflict_carryover: bool = False

    def __post_init__(self):
        if not 0.0 < self.theta_fire <= 1.0:
            raise ValueError("theta_fire must lie in (0, 1]")
        if self.max_firings < 1:
            raise ValueError("max_firings must be >= 1")
        if self.alpha_levels < 2:
            raise ValueError("alpha_levels must be >= 2")
        if self.singleton_epsilon <= 0:
            raise ValueError("singleton_epsilon must be positive")
        if self.firing_mode not in ("multi", "single"):
            raise ValueError("firing_mode must be 'multi' or 'single'")

    @classmethod
    def from_kb(cls, kb: ast.KnowledgeBase, overrides: dict | None = None) -> "EngineConfig":
        entries: dict[str, object] = {}
        if kb.config is not None:
            entries.update(dict(kb.config.entries))
        if overrides:
            entries.update(overrides)
        return cls(**entries)  # type: ignore[arg-type]


@dataclass(frozen=True)
class RankTuple:
    """Multicriteria rule rank; ordered lexicographically by specificity
    (desc), novelty (desc), reliability (desc), declaration index (asc)."""

    specificity: int
    novelty: int
    reliability: float
    tiebreak: int

    def sort_key(self) -> tuple:
        return (-self.specificity, -self.novelty, -self.reliability, self.tiebreak)

    def __lt__(self, other: "RankTuple") -> bool:
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True)
class Instantiation:
    rule_name: str
    truth: TruthValue
    deps: tuple[tuple[str, int], ...]  # (ref, tick asserted) for matched facts
    dep_seqs: tuple[tuple[str, int], ...]  # (ref, wm sequence) for staleness
    rank: RankTuple
    signature: tuple

    def sort_key(self) -> tuple:
        return self.rank.sort_key() + (repr(self.signature),)


class ConflictSet:
    """Rank-ordered pending instantiations, persistent across inner loops."""

    def __init__(self):
        self._items: list[Instantiation] = []
        self._signatures: set = set()

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def signatures(self) -> set:
        return set(self._signatures)

    def merge(self, new: list[Instantiation]):
        for inst in new:
            if inst.signature not in self._signatures:
                self._items.append(inst)
                self._signatures.add(inst.signature)
        self._items.sort(key=Instantiation.sort_key)

    def drop_stale(self, wm: WorkingMemory):
        """Remove instantiations whose dependency facts were superseded."""
        keep: list[Instantiation] = []
        for inst in self._items:
            if all(wm.seq_of(ref) == seq for ref, seq in inst.dep_seqs):
                keep.append(inst)
            else:
                self._signatures.discard(inst.signature)
        self._items = keep

    def pop_best(self) -> Instantiation | None:
        if not self._items:
            return None
        best = self._items.pop(0)
        self._signatures.discard(best.signature)
        return best

    def clear(self):
        self._items.clear()
        self._signatures.clear()

    def snapshot(self) -> list[dict]:
        return [
            {
                "rule": i.rule_name,
                "truth": i.truth.value,
                "rank": [i.rank.specificity, i.rank.novelty, i.rank.reliability, i.rank.tiebreak],
            }
            for i in self._items
        ]


@dataclass
class TickRecord:
    tick: int
    origins: list[tuple[str, str]]
    anomalies: list[tuple[int, str, str]]
    fired: list[str]
    wm_diff: list[tuple[str, object, object]]
    control_actions: list[tuple[str, object]]
    defuzz_modes: dict[str, dict]
    flags: list[str]

    def to_json_obj(self) -> dict:
        # field order is part of the trace contract
        return {
            "tick": self.tick,
            "origins": [list(t) for t in self.origins],
            "anomalies": [list(a) for a in self.anomalies],
            "fired": list(self.fired),
            "wm_diff": [list(d) for d in self.wm_diff],
            "control_actions": [list(c) for c in self.control_actions],
            "defuzz_modes": self.defuzz_modes,
            "flags": list(self.flags),
        }


# ---------------------------------------------------------------------------
# Phases
# ---------------------------------------------------------------------------

def select_active(kb: ast.KnowledgeBase, tick: int, origins_this_tick: set[str]) -> list[ast.Rule]:
    """Phase A: conventional rules always; periodic(p) at tick % p == 0;
    response(E) when E originated this tick."""
    active: list[ast.Rule] = []
    for rule in kb.rules:
        kind = rule.kind
        if kind.kind == "conventional":
            active.append(rule)
        elif kind.kind == "periodic":
            if tick % kind.period == 0:
                active.append(rule)
        elif kind.trigger in origins_this_tick:
            active.append(rule)
    return active


def _temporal_digest(kb: ast.KnowledgeBase, rule: ast.Rule, interp: EventFlowInterpretation) -> tuple:
    """Occurrence-state fingerprint of the temporal objects a rule reads;
    counts as 'new facts' for refractoriness purposes."""
    names: list[str] = []
    for atom in ast.atoms_of(rule.lhs):
        if isinstance(atom, ast.AllenAtom):
            names.extend((atom.left, atom.right))
        elif isinstance(atom, ast.TemporalVar):
            names.append(atom.name)
        elif isinstance(atom, ast.Comparison):
            for side in (atom.left, atom.right):
                if isinstance(side, ast.Ref) and kb.temporal_kind(side.obj) is not None:
                    names.append(side.obj)
    digest = []
    for name in sorted(set(names)):
        lane = interp.lanes[name]
        last = lane.last
        digest.append((name, lane.count, None if last is None else (last.start, last.end)))
    return tuple(digest)


def match(
    kb: ast.KnowledgeBase,
    active: list[ast.Rule],
    wm: WorkingMemory,
    interp: EventFlowInterpretation,
    tick: int,
    config: EngineConfig,
    fired_signatures: set,
    pending_signatures: set,
) -> list[Instantiation]:
    """Phase S'': evaluate LHS fragments, threshold, rank, fingerprint."""
    evaluator = Evaluator(
        kb, wm, interp,
        now=tick,
        alpha_levels=config.alpha_levels,
        epsilon=config.singleton_epsilon,
        use_cache=config.cache_enabled,
    )
    decl_index = {rule.name: i for i, rule in enumerate(kb.rules)}
    out: list[Instantiation] = []
    for rule in active:
        outcome = evaluator.eval_rule_lhs(rule)
        truth = outcome.truth
        if truth.is_ne or truth.value < config.theta_fire:
            continue
        deps = []
        dep_seqs = []
        for ref in sorted(outcome.deps):
            fact = wm.lookup(ref)
            if fact is not None:
                deps.append((ref, fact.asserted_at))
                dep_seqs.append((ref, fact.seq))
        activation: tuple = ()
        if rule.kind.kind == "periodic":
            activation = ("periodic", tick)
        elif rule.kind.kind == "response":
            activation = ("response", tick)
        signature = (rule.name, tuple(dep_seqs), activation, _temporal_digest(kb, rule, interp))
        if signature in fired_signatures or signature in pending_signatures:
            continue
        novelty = max((t for _, t in deps), default=-1)
        rank = RankTuple(
            specificity=len(ast.atoms_of(rule.lhs)),
            novelty=novelty,
            reliability=rule.cf * truth.value,
            tiebreak=decl_index[rule.name],
        )
        out.append(Instantiation(rule.name, truth, tuple(deps), tuple(dep_seqs), rank, signature))
    return out


def resolve_conflicts(
    conflict: ConflictSet, new: list[Instantiation], wm: WorkingMemory
) -> Instantiation | None:
    """Phase K: merge, drop stale, keep sorted; the head fires."""
    conflict.merge(new)
    conflict.drop_stale(wm)
    return conflict.pop_best()


@dataclass
class FireResult:
    rule_name: str
    asserted: list[tuple[str, Value]]
    control_actions: list[tuple[str, Value]]
    error: str | None = None


def fire(
    inst: Instantiation,
    kb: ast.KnowledgeBase,
    wm: WorkingMemory,
    interp: EventFlowInterpretation,
    tick: int,
    config: EngineConfig,
) -> FireResult:
    """Phase W': interpret the RHS of the chosen rule.

    Derived certainty = rule cf x antecedent truth x action cf.  Any RHS
    evaluation error aborts the whole firing (no partial assertions).
    """
    rule = next(r for r in kb.rules if r.name == inst.rule_name)
    evaluator = Evaluator(
        kb, wm, interp,
        now=tick,
        alpha_levels=config.alpha_levels,
        epsilon=config.singleton_epsilon,
        use_cache=config.cache_enabled,
    )
    staged: list[tuple[ast.Action, Value]] = []
    try:
        for action in rule.actions:
            value = evaluator.arith_value(action.expr, set())
            if value is None:
                raise EvaluationError(f"RHS of {rule.name} references a missing fact")
            cert = rule.cf * inst.truth.value * action.cf
            staged.append((action, value.with_certainty(cert)))
    except EvaluationError as exc:
        return FireResult(rule.name, [], [], error=str(exc))
    result = FireResult(rule.name, [], [])
    for action, value in staged:
        wm.assert_fact(action.target.key, value, tick, rule_provenance(rule.name))
        result.asserted.append((action.target.key, value))
        decl = kb.attr_decl(action.target)
        if decl is not None and decl.control:
            result.control_actions.append((action.target.key, value))
            wm.blackboard.post("control_actions", (action.target.key, to_literal(value)))
    return result


def finalize_defuzz(wm: WorkingMemory, tick: int) -> dict[str, dict]:
    """Phase D: collapse facts fuzzified during this tick's inference to
    their primary crisp values; the full mode set goes to the trace."""
    out: dict[str, dict] = {}
    for ref in sorted(wm.declared):
        fact = wm.lookup(ref)
        if (
            fact is None
            or fact.asserted_at != tick
            or fact.provenance.kind != "rule"
            or not isinstance(fact.value.payload, MembershipFunction)
        ):
            continue
        res = defuzzify(fact.value.payload)
        wm.replace_fact(ref, fact.value.with_payload(res.primary))
        out[ref] = {"modes": list(res.modes), "primary": res.primary}
    return out


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class Engine:
    """Owns one inference state: WM, interpretation, conflict set, tick."""

    def __init__(self, kb: ast.KnowledgeBase, config: EngineConfig | None = None):
        self.kb = kb
        self.config = config or EngineConfig.from_kb(kb)
        self.wm = WorkingMemory.for_kb(kb)
        self.interp = EventFlowInterpretation(kb)
        self.conflict = ConflictSet()
        self.fired_signatures: set = set()
        self.tick = -1

    def run_cycle(
        self,
        external: list[tuple[str, Value]] | None = None,
        provenance: Provenance = EXTERNAL,
    ) -> TickRecord:
        """Advance one tick: assert externals, reinterpret the event flow,
        loop A-S''-K-W' to quiescence, then defuzzify."""
        tick = self.tick + 1
        config = self.config
        before = self.wm.snapshot()
        seq_before = self.wm.seq
        anomalies_before = len(self.interp.anomalies)
        for ref, value in external or []:
            self.wm.assert_fact(ref, value, tick, provenance)

        cond_eval = Evaluator(
            self.kb, self.wm, self.interp,
            now=tick,
            alpha_levels=config.alpha_levels,
            epsilon=config.singleton_epsilon,
            use_cache=config.cache_enabled,
        )
        transitions = self.interp.interpret_tick(
            self.kb, tick, lambda cond: cond_eval.eval_expr(cond).truth, config.theta_fire
        )
        origin_events = {name for name, kind in transitions if kind == "origin"}
        for name in sorted(origin_events):
            self.wm.blackboard.post("origin_notifications", (name, tick))

        if not config.conflict_carryover:
            self.conflict.clear()

        fired: list[str] = []
        control_actions: list[tuple[str, object]] = []
        flags: list[str] = []
        firings = 0
        while True:
            if firings >= config.max_firings:
                flags.append("max_firings")
                break
            active = select_active(self.kb, tick, origin_events)
            new = match(
                self.kb, active, self.wm, self.interp, tick, config,
                self.fired_signatures, self.conflict.signatures(),
            )
            chosen = resolve_conflicts(self.conflict, new, self.wm)
            if chosen is None:
                break
            self.fired_signatures.add(chosen.signature)
            result = fire(chosen, self.kb, self.wm, self.interp, tick, config)
            firings += 1
            if result.error is not None:
                flags.append(f"rhs_error:{chosen.rule_name}")
            else:
                fired.append(chosen.rule_name)
                control_actions.extend(
                    (ref, to_literal(value)) for ref, value in result.control_actions
                )
            if config.firing_mode == "single":
                break

        defuzz = finalize_defuzz(self.wm, tick)
        record = TickRecord(
            tick=tick,
            origins=list(transitions),
            anomalies=[
                (a.tick, a.obj, a.kind) for a in self.interp.anomalies[anomalies_before:]
            ],
            fired=fired,
            wm_diff=self._tick_diff(before, seq_before),
            control_actions=control_actions,
            defuzz_modes=defuzz,
            flags=flags,
        )
        self.tick = tick
        return record

    def _tick_diff(self, before, seq_before: int) -> list[tuple[str, object, object]]:
        """Per-assertion change chains for this tick, name-ordered.

        A ref asserted several times within one tick (an external assertion
        superseded by a fired rule, a merge, a defuzzification) contributes
        one entry per assertion, so every write stays visible in the record.
        """
        out: list[tuple[str, object, object]] = []
        current = self.wm.snapshot()
        for ref in sorted(current):
            new = current[ref]
            old = before.get(ref)
            if old is not None and old.seq == new.seq:
                continue
            chain = [f for f in self.wm.history(ref) if f.seq > seq_before]
            chain.append(new)
            prev = old
            for fact in chain:
                out.append(
                    (ref, None if prev is None else to_literal(prev.value), to_literal(fact.value))
                )
                prev = fact
        return out

    def state_snapshot(self) -> dict:
        """Pure read: WM, timeline, conflict set (service food)."""
        facts = []
        for ref in self.wm.refs():
            fact = self.wm.lookup(ref)
            facts.append(
                {
                    "ref": ref,
                    "value": to_literal(fact.value.with_certainty(1.0)),
                    "cf": fact.value.certainty,
                    "tick": fact.asserted_at,
                    "provenance": str(fact.provenance),
                }
            )
        return {
            "tick": self.tick,
            "wm": facts,
            "conflict_set": self.conflict.snapshot(),
            "timeline": self.interp.timeline(),
        }
