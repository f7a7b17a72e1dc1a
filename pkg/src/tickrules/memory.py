"""Working memory, antecedent-evaluation cache and dynamic blackboard.

Facts are immutable and timestamped; at most one is current per attribute
reference, with superseded facts archived per ref.  The cache stores partial
antecedent evaluations keyed by (rule, LHS node) together with the refs they
depended on; asserting to a ref eagerly invalidates dependent entries, and a
monotone assert sequence number guards against stale reads within a tick.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .krl.ast import KnowledgeBase, Ref
from .values import TruthValue, Value, combine_cf


class UndeclaredRefError(KeyError):
    pass


class TypeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Provenance:
    kind: str  # "external" | "rule" | "answer"
    detail: str | None = None

    def __str__(self) -> str:
        return self.kind if self.detail is None else f"{self.kind}({self.detail})"


EXTERNAL = Provenance("external")


def rule_provenance(rule_name: str) -> Provenance:
    return Provenance("rule", rule_name)


def answer_provenance(question_id: str) -> Provenance:
    return Provenance("answer", question_id)


@dataclass(frozen=True)
class Fact:
    ref: str
    value: Value
    asserted_at: int
    provenance: Provenance
    seq: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CacheEntry:
    truth: TruthValue
    deps: frozenset[str]
    valid_as_of: int  # assert-sequence number at computation time


class EvalCache:
    """Cache of (rule name, LHS node id) -> partial antecedent evaluation."""

    def __init__(self):
        self._entries: dict[tuple[str, int], CacheEntry] = {}
        self._by_ref: dict[str, set[tuple[str, int]]] = {}
        self.hits = 0
        self.misses = 0

    def get(self, rule: str, node_id: int, current_seq_of) -> CacheEntry | None:
        entry = self._entries.get((rule, node_id))
        if entry is None:
            self.misses += 1
            return None
        # defensive: never serve an entry older than any dependency
        for ref in entry.deps:
            seq = current_seq_of(ref)
            if seq is not None and seq > entry.valid_as_of:
                self.misses += 1
                return None
        self.hits += 1
        return entry

    def put(self, rule: str, node_id: int, truth: TruthValue, deps: Iterable[str], seq: int):
        key = (rule, node_id)
        entry = CacheEntry(truth, frozenset(deps), seq)
        self._entries[key] = entry
        for ref in entry.deps:
            self._by_ref.setdefault(ref, set()).add(key)

    def invalidate_ref(self, ref: str):
        for key in self._by_ref.pop(ref, ()):
            entry = self._entries.pop(key, None)
            if entry is not None:
                for other in entry.deps:
                    if other != ref:
                        keys = self._by_ref.get(other)
                        if keys:
                            keys.discard(key)

    def clear(self):
        self._entries.clear()
        self._by_ref.clear()


class Blackboard:
    """Transient exchange slots between components; entries are consumed
    exactly once."""

    SLOTS = ("control_actions", "pending_questions", "origin_notifications")

    def __init__(self):
        self._slots: dict[str, list[object]] = {name: [] for name in self.SLOTS}

    def post(self, slot: str, item: object):
        self._slots[slot].append(item)

    def consume(self, slot: str) -> list[object]:
        items = self._slots[slot]
        self._slots[slot] = []
        return items

    def peek(self, slot: str) -> tuple[object, ...]:
        return tuple(self._slots[slot])


@dataclass(frozen=True)
class Conflict:
    """Same-tick contradictory assertion, kept for the audit trail."""

    ref: str
    tick: int
    kept: Fact
    discarded: Fact


class WorkingMemory:
    """Mutable store of current facts plus per-ref history."""

    def __init__(self, declared_refs: Iterable[str], attr_kinds: Mapping[str, str] | None = None,
                 term_names: Mapping[str, frozenset[str]] | None = None):
        self.declared: frozenset[str] = frozenset(declared_refs)
        self._attr_kinds = dict(attr_kinds or {})
        self._term_names = dict(term_names or {})
        self._current: dict[str, Fact] = {}
        self._history: dict[str, list[Fact]] = {}
        self._seq = 0
        self.cache = EvalCache()
        self.blackboard = Blackboard()
        self.conflicts: list[Conflict] = []

    @classmethod
    def for_kb(cls, kb: KnowledgeBase) -> "WorkingMemory":
        kinds: dict[str, str] = {}
        terms: dict[str, frozenset[str]] = {}
        for obj in kb.objects:
            for attr in obj.attrs:
                ref = f"{obj.name}.{attr.name}"
                t = kb.attr_type(Ref(obj.name, attr.name))
                kinds[ref] = t.kind if t else "number"
                terms[ref] = frozenset(name for name, _ in (t.terms if t else ()))
        return cls(kinds.keys(), kinds, terms)

    @property
    def seq(self) -> int:
        return self._seq

    def seq_of(self, ref: str) -> int | None:
        fact = self._current.get(ref)
        return None if fact is None else fact.seq

    def lookup(self, ref: str) -> Fact | None:
        """Current fact for ref, or None (callers read absence as NE)."""
        return self._current.get(ref)

    def history(self, ref: str) -> list[Fact]:
        return list(self._history.get(ref, ()))

    def refs(self) -> list[str]:
        return sorted(self._current)

    def snapshot(self) -> dict[str, Fact]:
        return dict(self._current)

    def _check_kind(self, ref: str, value: Value):
        kind = self._attr_kinds.get(ref)
        if kind is None:
            return
        p = value.payload
        if kind == "boolean":
            ok = isinstance(p, bool)
        elif kind == "string":
            ok = isinstance(p, str)
        else:
            ok = value.is_numeric or (isinstance(p, str) and p in self._term_names.get(ref, frozenset()))
        if not ok:
            raise TypeMismatchError(f"value {p!r} does not fit {kind} attribute {ref}")

    def assert_fact(self, ref: str, value: Value, tick: int, provenance: Provenance) -> Fact:
        """Install a fact; archives the superseded one and invalidates
        dependent cache entries.

        Same-tick rule assertions with equal payloads merge their
        certainties (parallel derivations); unequal payloads keep the newer
        value and log a conflict.
        """
        if ref not in self.declared:
            raise UndeclaredRefError(ref)
        self._check_kind(ref, value)
        old = self._current.get(ref)
        self._seq += 1
        new = Fact(ref, value, tick, provenance, seq=self._seq)
        if old is not None:
            if (
                old.asserted_at == tick
                and old.provenance.kind == "rule"
                and provenance.kind == "rule"
            ):
                if old.value.payload == value.payload:
                    merged = value.with_certainty(combine_cf(old.value.certainty, value.certainty))
                    new = Fact(ref, merged, tick, provenance, seq=self._seq)
                else:
                    self.conflicts.append(Conflict(ref, tick, kept=new, discarded=old))
            self._history.setdefault(ref, []).append(old)
        self._current[ref] = new
        self.cache.invalidate_ref(ref)
        return new

    def replace_fact(self, ref: str, value: Value) -> Fact:
        """Swap the current fact's value in place (defuzzification), keeping
        tick and provenance, without the same-tick merge/conflict rules."""
        old = self._current[ref]
        self._seq += 1
        new = Fact(ref, value, old.asserted_at, old.provenance, seq=self._seq)
        self._history.setdefault(ref, []).append(old)
        self._current[ref] = new
        self.cache.invalidate_ref(ref)
        return new


def snapshot_diff(before: Mapping[str, Fact], after: Mapping[str, Fact]) -> list[tuple[str, Fact | None, Fact]]:
    """Refs whose current fact changed, ordered by ref name."""
    out: list[tuple[str, Fact | None, Fact]] = []
    for ref in sorted(after):
        old = before.get(ref)
        new = after[ref]
        if old is None or old != new or old.seq != new.seq:
            out.append((ref, old, new))
    return out
