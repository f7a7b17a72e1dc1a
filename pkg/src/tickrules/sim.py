"""Scenario-driven tick harness and byte-stable traces.

A scenario is a JSONL file of ``{"tick": N, "set": {"obj.attr": <literal>}}``
entries, strictly ascending from tick 0.  Running it produces a trace: a
header line carrying hashes of the canonical KB text and scenario, then one
TickRecord per tick with a fixed field order, so that identical inputs yield
byte-identical bodies and replay verification is an exact comparison.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .engine import Engine, EngineConfig, TickRecord
from .krl import KnowledgeBase, print_kb
from .values import Value, value_from_literal


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioEntry:
    tick: int
    assignments: tuple[tuple[str, Value], ...]


@dataclass(frozen=True)
class Scenario:
    entries: tuple[ScenarioEntry, ...]

    def __post_init__(self):
        prev = None
        for entry in self.entries:
            if entry.tick < 0:
                raise ScenarioError(f"negative tick {entry.tick}")
            if prev is None:
                if entry.tick != 0:
                    raise ScenarioError("scenario must start at tick 0")
            elif entry.tick <= prev:
                raise ScenarioError(f"non-ascending tick {entry.tick}")
            prev = entry.tick

    def assignments_for(self, tick: int) -> list[tuple[str, Value]]:
        for entry in self.entries:
            if entry.tick == tick:
                return list(entry.assignments)
        return []

    @property
    def last_tick(self) -> int:
        return self.entries[-1].tick if self.entries else -1


def parse_scenario(text: str) -> Scenario:
    entries: list[ScenarioEntry] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"line {lineno}: not valid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "tick" not in obj:
            raise ScenarioError(f"line {lineno}: entry needs a 'tick' field")
        tick = obj["tick"]
        if not isinstance(tick, int) or isinstance(tick, bool):
            raise ScenarioError(f"line {lineno}: tick must be an integer")
        assignments = []
        for ref, literal in (obj.get("set") or {}).items():
            try:
                assignments.append((ref, value_from_literal(literal)))
            except ValueError as exc:
                raise ScenarioError(f"line {lineno}: {ref}: {exc}") from exc
        entries.append(ScenarioEntry(tick, tuple(assignments)))
    return Scenario(tuple(entries))


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def scenario_canonical(scenario: Scenario) -> str:
    lines = []
    for entry in scenario.entries:
        from .values import to_literal

        obj = {"tick": entry.tick, "set": {ref: to_literal(v) for ref, v in entry.assignments}}
        lines.append(json.dumps(obj, separators=(",", ":"), sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def kb_hash(kb: KnowledgeBase) -> str:
    return hashlib.sha256(print_kb(kb).encode("utf-8")).hexdigest()


def scenario_hash(scenario: Scenario) -> str:
    return hashlib.sha256(scenario_canonical(scenario).encode("utf-8")).hexdigest()


def _config_obj(config: EngineConfig) -> dict:
    return {
        "theta_fire": config.theta_fire,
        "max_firings": config.max_firings,
        "alpha_levels": config.alpha_levels,
        "singleton_epsilon": config.singleton_epsilon,
        "firing_mode": config.firing_mode,
        "cache_enabled": config.cache_enabled,
        "conflict_carryover": config.conflict_carryover,
    }


@dataclass(frozen=True)
class TraceHeader:
    kb_hash: str
    scenario_hash: str
    config: dict
    created_at: str = ""  # excluded from comparisons and hashes

    def to_json_obj(self) -> dict:
        return {
            "kb_hash": self.kb_hash,
            "scenario_hash": self.scenario_hash,
            "config": self.config,
            "created_at": self.created_at,
        }


@dataclass
class Trace:
    header: TraceHeader
    records: list[TickRecord] = field(default_factory=list)

    def record_lines(self) -> list[str]:
        return [json.dumps(r.to_json_obj(), separators=(",", ":")) for r in self.records]

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header.to_json_obj(), separators=(",", ":"))]
        lines.extend(self.record_lines())
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path):
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trace")
        head = json.loads(lines[0])
        header = TraceHeader(
            head["kb_hash"], head["scenario_hash"], head["config"], head.get("created_at", "")
        )
        records = []
        for line in lines[1:]:
            obj = json.loads(line)
            records.append(
                TickRecord(
                    tick=obj["tick"],
                    origins=[tuple(t) for t in obj["origins"]],
                    anomalies=[tuple(a) for a in obj["anomalies"]],
                    fired=list(obj["fired"]),
                    wm_diff=[tuple(d) for d in obj["wm_diff"]],
                    control_actions=[tuple(c) for c in obj["control_actions"]],
                    defuzz_modes=obj["defuzz_modes"],
                    flags=list(obj["flags"]),
                )
            )
        return cls(header, records)

    @classmethod
    def read(cls, path: str | Path) -> "Trace":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


def run_simulation(
    kb: KnowledgeBase,
    scenario: Scenario,
    ticks: int,
    config: EngineConfig | None = None,
    *,
    timestamp: bool = True,
) -> Trace:
    """Run ``ticks`` cycles, feeding each tick's scenario assertions."""
    config = config or EngineConfig.from_kb(kb)
    engine = Engine(kb, config)
    created = datetime.now(timezone.utc).isoformat() if timestamp else ""
    header = TraceHeader(kb_hash(kb), scenario_hash(scenario), _config_obj(config), created)
    trace = Trace(header)
    for tick in range(ticks):
        external = scenario.assignments_for(tick)
        try:
            trace.records.append(engine.run_cycle(external))
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"tick {tick}: {exc}") from exc
    return trace


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    first_divergence: int | None = None
    reason: str | None = None


def verify_replay(trace: Trace, kb: KnowledgeBase, scenario: Scenario) -> ReplayResult:
    """Re-run the simulation and compare records exactly."""
    if trace.header.kb_hash != kb_hash(kb):
        return ReplayResult(False, None, "kb hash mismatch")
    if trace.header.scenario_hash != scenario_hash(scenario):
        return ReplayResult(False, None, "scenario hash mismatch")
    config = EngineConfig(**trace.header.config)
    fresh = run_simulation(kb, scenario, len(trace.records), config, timestamp=False)
    for old, new in zip(trace.records, fresh.records):
        if json.dumps(old.to_json_obj(), separators=(",", ":")) != json.dumps(
            new.to_json_obj(), separators=(",", ":")
        ):
            return ReplayResult(False, old.tick, "record mismatch")
    return ReplayResult(True)
