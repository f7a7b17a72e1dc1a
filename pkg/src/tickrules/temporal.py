"""Modified Allen interval logic over discrete ticks and the event-flow
interpretation.

Events are momentary (origin tick); intervals carry open/close ticks and may
still be open.  The interpretation walks the tick axis once per cycle,
recording origins on rising edges of the declared conditions, logging
anomalies such as a close edge with nothing open, and maintaining the derived
attributes .c (number of origins) and .l (duration).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .krl import ast
from .values import NE, TRUE, FALSE, TruthValue, truth_and, truth_not, truth_or


@dataclass(frozen=True)
class Occurrence:
    """One placement on the time axis; events have end == start."""

    start: int
    end: int | None  # None while an interval is still open

    def __post_init__(self):
        if self.end is not None and self.end < self.start:
            raise ValueError("occurrence closes before it opens")


@dataclass(frozen=True)
class Anomaly:
    tick: int
    obj: str
    kind: str  # "close_before_open"


@dataclass
class Lane:
    """Per temporal object: occurrence history plus edge-detector state."""

    kind: str  # "event" | "interval"
    history: list[Occurrence] = field(default_factory=list)
    prev_origin: bool = False
    prev_open: bool = False
    prev_close: bool = False

    @property
    def count(self) -> int:
        return len(self.history)

    @property
    def last(self) -> Occurrence | None:
        return self.history[-1] if self.history else None

    @property
    def open_now(self) -> bool:
        last = self.last
        return last is not None and last.end is None


# transitions reported per tick: (object name, "origin" | "open" | "close")
Transition = tuple[str, str]


class EventFlowInterpretation:
    """Discrete-time placement of all declared temporal objects."""

    def __init__(self, kb: ast.KnowledgeBase):
        self.lanes: dict[str, Lane] = {}
        for e in kb.events:
            self.lanes[e.name] = Lane("event")
        for i in kb.intervals:
            self.lanes[i.name] = Lane("interval")
        self.anomalies: list[Anomaly] = []
        self.last_tick: int | None = None

    # --- interpretation -------------------------------------------------

    def interpret_tick(
        self,
        kb: ast.KnowledgeBase,
        tick: int,
        eval_condition: Callable[[ast.Expr], TruthValue],
        theta: float = 0.5,
    ) -> list[Transition]:
        """Advance the interpretation by one tick.

        ``eval_condition`` evaluates a static condition against working
        memory; satisfaction means truth >= theta (NE counts as not
        satisfied).  Origins and interval transitions are edge-triggered.
        """
        expected = 0 if self.last_tick is None else self.last_tick + 1
        if tick != expected:
            raise ValueError(f"non-consecutive tick {tick} (expected {expected})")
        self.last_tick = tick

        def satisfied(cond: ast.Expr) -> bool:
            t = eval_condition(cond)
            return not t.is_ne and t.value >= theta

        transitions: list[Transition] = []
        for e in kb.events:
            lane = self.lanes[e.name]
            now = satisfied(e.origin_condition)
            if now and not lane.prev_origin:
                lane.history.append(Occurrence(tick, tick))
                transitions.append((e.name, "origin"))
            lane.prev_origin = now
        for i in kb.intervals:
            lane = self.lanes[i.name]
            open_now = satisfied(i.open_condition)
            close_now = satisfied(i.close_condition)
            open_edge = open_now and not lane.prev_open
            close_edge = close_now and not lane.prev_close
            lane.prev_open = open_now
            lane.prev_close = close_now
            if open_edge and not lane.open_now:
                lane.history.append(Occurrence(tick, None))
                transitions.append((i.name, "open"))
            if close_edge:
                if lane.open_now:
                    last = lane.history[-1]
                    lane.history[-1] = Occurrence(last.start, tick)
                    transitions.append((i.name, "close"))
                else:
                    # termination of an interval before its opening
                    self.anomalies.append(Anomaly(tick, i.name, "close_before_open"))
        return transitions

    # --- derived attributes ----------------------------------------------

    def count(self, name: str) -> int:
        return self.lanes[name].count

    def duration(self, name: str, now: int) -> int | None:
        """.l: open interval -> now - open tick; closed -> last completed
        duration; never opened -> None; events are momentary (0)."""
        lane = self.lanes[name]
        if lane.kind == "event":
            return 0
        last = lane.last
        if last is None:
            return None
        if last.end is None:
            return now - last.start
        return last.end - last.start

    def occurrence(self, name: str) -> Occurrence | None:
        return self.lanes[name].last

    def kind(self, name: str) -> str:
        return self.lanes[name].kind

    # --- export -----------------------------------------------------------

    def timeline(self) -> dict:
        """Per-object occurrence lists plus the anomaly log (UI/trace food)."""
        objects = {}
        for name, lane in self.lanes.items():
            objects[name] = {
                "kind": lane.kind,
                "occurrences": [[o.start, o.end] for o in lane.history],
            }
        return {
            "objects": objects,
            "anomalies": [[a.tick, a.obj, a.kind] for a in self.anomalies],
        }


# ---------------------------------------------------------------------------
# Allen relation semantics
# ---------------------------------------------------------------------------

def relation_holds(
    rel: str,
    x: Occurrence | None,
    x_kind: str,
    y: Occurrence | None,
    y_kind: str,
    now: int,
) -> TruthValue:
    """Truth of ``X rel Y`` on concrete occurrences.

    Open intervals use the current tick as a provisional end
    (best-current-knowledge semantics).  Missing occurrences give NE.
    """
    if (x_kind, y_kind) not in ast.ALLOWED_RELATIONS or rel not in ast.ALLOWED_RELATIONS[(x_kind, y_kind)]:
        raise ValueError(f"relation {rel!r} undefined between {x_kind} and {y_kind}")
    if x is None or y is None:
        return NE
    x1, x2 = x.start, now if x.end is None else x.end
    y1, y2 = y.start, now if y.end is None else y.end

    if x_kind == "event" and y_kind == "event":
        p, q = x1, y1
        ok = {"b": p < q, "e": p == q, "a": p > q}[rel]
        return TRUE if ok else FALSE
    if x_kind == "event":
        p = x1
        ok = {
            "b": p < y1,
            "a": p > y2,
            "s": p == y1,
            "d": y1 < p < y2,
            "f": p == y2,
        }[rel]
        return TRUE if ok else FALSE
    ok = {
        "b": x2 < y1,
        "a": x1 > y2,
        "m": x2 == y1,
        "o": x1 < y1 and y1 < x2 and x2 < y2,
        "s": x1 == y1 and x2 < y2,
        "d": y1 < x1 and x2 < y2,
        "e": x1 == y1 and x2 == y2,
        "f": x1 > y1 and x2 == y2,
    }[rel]
    return TRUE if ok else FALSE


def eval_temporal_formula(
    formula: ast.Expr, interp: EventFlowInterpretation, now: int
) -> TruthValue:
    """Evaluate a pure temporal formula against the interpretation.

    Atoms: Allen relations on the most recent occurrence of each operand;
    X.c comparisons (always defined, 0 before any origin); X.l comparisons
    (NE while undefined); bare variables (event: occurred at least once;
    interval: currently open).
    """
    if isinstance(formula, ast.BoolOp):
        combine = truth_and if formula.op == "and" else truth_or
        result = eval_temporal_formula(formula.operands[0], interp, now)
        for operand in formula.operands[1:]:
            result = combine(result, eval_temporal_formula(operand, interp, now))
        return result
    if isinstance(formula, ast.Not):
        return truth_not(eval_temporal_formula(formula.operand, interp, now))
    if isinstance(formula, ast.AllenAtom):
        return relation_holds(
            formula.rel,
            interp.occurrence(formula.left),
            interp.kind(formula.left),
            interp.occurrence(formula.right),
            interp.kind(formula.right),
            now,
        )
    if isinstance(formula, ast.TemporalVar):
        lane = interp.lanes[formula.name]
        if lane.kind == "event":
            return TRUE if lane.count > 0 else FALSE
        return TRUE if lane.open_now else FALSE
    if isinstance(formula, ast.Comparison):
        return temporal_attr_truth(formula, interp, now)
    if isinstance(formula, ast.Bool):
        return TRUE if formula.value else FALSE
    raise TypeError(f"not a temporal formula atom: {formula!r}")


def temporal_attr_truth(cmp: ast.Comparison, interp: EventFlowInterpretation, now: int) -> TruthValue:
    """X.c r N / X.l r N comparisons (either operand order)."""
    ref, literal = cmp.left, cmp.right
    op = cmp.op
    if not isinstance(ref, ast.Ref):
        ref, literal = cmp.right, cmp.left
        op = {">": "<", "<": ">", ">=": "<=", "<=": ">=", "=": "=", "!=": "!="}[op]
    assert isinstance(ref, ast.Ref) and isinstance(literal, ast.Num)
    n = literal.value
    if ref.attr == "c":
        value: int | None = interp.count(ref.obj)
    else:
        value = interp.duration(ref.obj, now)
    if value is None:
        return NE
    ok = {
        ">": value > n,
        "<": value < n,
        "=": value == n,
        ">=": value >= n,
        "<=": value <= n,
        "!=": value != n,
    }[op]
    return TRUE if ok else FALSE
