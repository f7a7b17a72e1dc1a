"""Abstract syntax for the knowledge representation language (KRL).

Source locations ride along on declarations and expression nodes but are
excluded from equality so that a parse -> print -> parse round trip compares
equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..values import MembershipFunction


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOLOC = Loc(0, 0)


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class Str:
    value: str
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class Bool:
    value: bool
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class InexactLit:
    center: float
    half_width: float
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    """Dotted reference: ``obj.attr`` for object attributes, ``E.c``/``E.l``
    for temporal attributes (resolved during validation)."""

    obj: str
    attr: str
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    @property
    def key(self) -> str:
        return f"{self.obj}.{self.attr}"


@dataclass(frozen=True)
class BinArith:
    op: str  # + - * /
    left: "ArithExpr"
    right: "ArithExpr"
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


ArithExpr = Union[Num, Str, Bool, InexactLit, Ref, BinArith]


@dataclass(frozen=True)
class Comparison:
    op: str  # > < = >= <= !=
    left: ArithExpr
    right: ArithExpr
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class BoolRef:
    """A bare boolean attribute used as an atom."""

    ref: Ref
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class TemporalVar:
    """A bare event/interval name used as an atom: an event is true once it
    has originated at least once; an interval is true while open."""

    name: str
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class AllenAtom:
    """X r Y between temporal objects; r is one of b a m o s d e f."""

    left: str
    rel: str
    right: str
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class BoolOp:
    """Conjunction/disjunction; the parser emits n-ary nodes in source order
    and normalization rewrites them to right-nested binary trees."""

    op: str  # "and" | "or"
    operands: tuple["Expr", ...]
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


Expr = Union[Comparison, BoolRef, TemporalVar, AllenAtom, Not, BoolOp, Bool]

ALLEN_CONNECTIVES = ("b", "a", "m", "o", "s", "d", "e", "f")

# grammar clauses for X r Y by operand kinds
ALLOWED_RELATIONS = {
    ("interval", "interval"): frozenset(ALLEN_CONNECTIVES),
    ("event", "event"): frozenset({"b", "a", "e"}),
    ("event", "interval"): frozenset({"b", "a", "s", "d", "f"}),
    ("interval", "event"): frozenset(),
}


# --- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: str  # "number" | "string" | "boolean"
    range: Optional[tuple[float, float]] = None
    values: Optional[tuple[object, ...]] = None  # enumerated domain
    terms: tuple[tuple[str, MembershipFunction], ...] = ()
    loc: Loc = field(default=NOLOC, compare=False, repr=False)

    def term_table(self) -> dict[str, MembershipFunction]:
        return dict(self.terms)


@dataclass(frozen=True)
class AttrDecl:
    name: str
    type_name: str  # builtin kind or declared type name
    control: bool = False
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    attrs: tuple[AttrDecl, ...]
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class EventDecl:
    name: str
    origin_condition: Expr
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class IntervalDecl:
    name: str
    open_condition: Expr
    close_condition: Expr
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class Action:
    target: Ref
    expr: ArithExpr
    cf: float = 1.0
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class RuleKind:
    kind: str  # "conventional" | "periodic" | "response"
    period: int | None = None
    trigger: str | None = None


CONVENTIONAL = RuleKind("conventional")


@dataclass(frozen=True)
class Rule:
    name: str
    kind: RuleKind
    lhs: Expr
    actions: tuple[Action, ...]
    cf: float = 1.0
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class ConfigDecl:
    entries: tuple[tuple[str, object], ...]
    loc: Loc = field(default=NOLOC, compare=False, repr=False)


@dataclass(frozen=True)
class KnowledgeBase:
    types: tuple[TypeDecl, ...]
    objects: tuple[ObjectDecl, ...]
    events: tuple[EventDecl, ...]
    intervals: tuple[IntervalDecl, ...]
    rules: tuple[Rule, ...]
    config: ConfigDecl | None = None

    def type_named(self, name: str) -> TypeDecl | None:
        for t in self.types:
            if t.name == name:
                return t
        return None

    def object_named(self, name: str) -> ObjectDecl | None:
        for o in self.objects:
            if o.name == name:
                return o
        return None

    def temporal_kind(self, name: str) -> str | None:
        """'event', 'interval', or None."""
        for e in self.events:
            if e.name == name:
                return "event"
        for i in self.intervals:
            if i.name == name:
                return "interval"
        return None

    def attr_decl(self, ref: Ref) -> AttrDecl | None:
        obj = self.object_named(ref.obj)
        if obj is None:
            return None
        for a in obj.attrs:
            if a.name == ref.attr:
                return a
        return None

    def attr_type(self, ref: Ref) -> TypeDecl | None:
        """Resolved TypeDecl for an object attribute (builtins get a stub)."""
        decl = self.attr_decl(ref)
        if decl is None:
            return None
        t = self.type_named(decl.type_name)
        if t is not None:
            return t
        return TypeDecl(decl.type_name, decl.type_name)

    def term_table_for(self, ref: Ref) -> dict[str, MembershipFunction]:
        t = self.attr_type(ref)
        return t.term_table() if t is not None else {}

    def declared_refs(self) -> list[str]:
        out = []
        for o in self.objects:
            for a in o.attrs:
                out.append(f"{o.name}.{a.name}")
        return out


def walk_expr(expr: Expr):
    """Yield every node of an expression tree, preorder."""
    yield expr
    if isinstance(expr, BoolOp):
        for child in expr.operands:
            yield from walk_expr(child)
    elif isinstance(expr, Not):
        yield from walk_expr(expr.operand)


def walk_arith(e: ArithExpr):
    yield e
    if isinstance(e, BinArith):
        yield from walk_arith(e.left)
        yield from walk_arith(e.right)


def atoms_of(expr: Expr) -> list[Expr]:
    """Atomic conditions (leaves of the and/or/not skeleton), left to right."""
    out: list[Expr] = []

    def go(e: Expr):
        if isinstance(e, BoolOp):
            for child in e.operands:
                go(child)
        elif isinstance(e, Not):
            go(e.operand)
        else:
            out.append(e)

    go(expr)
    return out


def refs_of_atom(atom: Expr) -> list[Ref]:
    """Object-attribute refs mentioned by one atom (temporal refs excluded
    by the caller via kb.temporal_kind)."""
    if isinstance(atom, Comparison):
        return [n for side in (atom.left, atom.right) for n in walk_arith(side) if isinstance(n, Ref)]
    if isinstance(atom, BoolRef):
        return [atom.ref]
    return []
