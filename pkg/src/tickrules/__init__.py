"""Temporal production-rule inference engine.

A static solver over unreliable values (graded truth with NE, certainty
factors, inaccuracy, fuzziness, admissible sets) combined with a temporal
solver over a modified Allen interval logic, driven in discrete tick cycles,
with scenario simulation, byte-stable replayable traces, and an interactive
backward-chaining consultation mode.
"""

from .consult import Consultation, ConsultResult, backward_chain, rank_question_candidates
from .engine import Engine, EngineConfig, RankTuple, TickRecord, select_active
from .krl import (
    KnowledgeBase,
    KrlSyntaxError,
    KrlValidationError,
    normalize_lhs,
    parse_kb,
    print_kb,
    validate_kb,
)
from .memory import Fact, WorkingMemory, snapshot_diff
from .sim import (
    ReplayResult,
    Scenario,
    Trace,
    load_scenario,
    parse_scenario,
    run_simulation,
    verify_replay,
)
from .temporal import EventFlowInterpretation, Occurrence, eval_temporal_formula, relation_holds
from .values import (
    NE,
    AdmissibleRange,
    AdmissibleSet,
    DefuzzResult,
    Inexact,
    MembershipFunction,
    TruthValue,
    UndefinedQuotientError,
    Value,
    combine_cf,
    defuzzify,
    fuzzify,
    neg_arith,
    neg_compare,
    to_literal,
    triangle,
    trapezoid,
    truth_combine,
    value_from_literal,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleRange",
    "AdmissibleSet",
    "Consultation",
    "ConsultResult",
    "DefuzzResult",
    "Engine",
    "EngineConfig",
    "EventFlowInterpretation",
    "Fact",
    "Inexact",
    "KnowledgeBase",
    "KrlSyntaxError",
    "KrlValidationError",
    "MembershipFunction",
    "NE",
    "Occurrence",
    "RankTuple",
    "ReplayResult",
    "Scenario",
    "TickRecord",
    "Trace",
    "TruthValue",
    "UndefinedQuotientError",
    "Value",
    "WorkingMemory",
    "backward_chain",
    "combine_cf",
    "defuzzify",
    "eval_temporal_formula",
    "fuzzify",
    "load_scenario",
    "neg_arith",
    "neg_compare",
    "normalize_lhs",
    "parse_kb",
    "parse_scenario",
    "print_kb",
    "rank_question_candidates",
    "relation_holds",
    "run_simulation",
    "select_active",
    "snapshot_diff",
    "to_literal",
    "triangle",
    "trapezoid",
    "truth_combine",
    "validate_kb",
    "value_from_literal",
    "verify_replay",
]
