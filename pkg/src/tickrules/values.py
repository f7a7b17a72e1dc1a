"""Value algebra for unreliable knowledge.

Truth values live in [0, 1] plus the distinguished mark NE ("not evaluated
yet", produced when required facts are missing).  Domain values carry NEG
annotations: a certainty factor, inaccuracy (center +- half-width), fuzziness
(piecewise-linear membership functions / linguistic terms) and subdefiniteness
(admissible finite sets or closed ranges).  All operations here are pure and
all types immutable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union


class ValueAlgebraError(Exception):
    """Base class for value-algebra failures."""


class UndefinedQuotientError(ValueAlgebraError):
    """Division by an operand whose interval/support contains zero."""


class IncomparableError(ValueAlgebraError):
    """Comparison between payloads with no defined ordering (e.g. bool vs number)."""


class UnknownTermError(ValueAlgebraError):
    """A linguistic term has no membership function in the active term table."""


# ---------------------------------------------------------------------------
# Truth values
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TruthValue:
    """Element of [0; 1] plus NE.  ``value is None`` encodes NE."""

    value: float | None

    def __post_init__(self):
        if self.value is not None:
            v = float(self.value)
            if math.isnan(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"truth value outside [0, 1]: {self.value!r}")
            object.__setattr__(self, "value", v)

    @property
    def is_ne(self) -> bool:
        return self.value is None

    def __repr__(self) -> str:
        return "NE" if self.value is None else f"TruthValue({self.value!r})"


NE = TruthValue(None)
TRUE = TruthValue(1.0)
FALSE = TruthValue(0.0)


def truth(x: float) -> TruthValue:
    return TruthValue(float(x))


def truth_and(a: TruthValue, b: TruthValue) -> TruthValue:
    # A false conjunct decides the conjunction regardless of NE.
    if a.value == 0.0 or b.value == 0.0:
        return FALSE
    if a.is_ne or b.is_ne:
        return NE
    return TruthValue(min(a.value, b.value))


def truth_or(a: TruthValue, b: TruthValue) -> TruthValue:
    if a.value == 1.0 or b.value == 1.0:
        return TRUE
    if a.is_ne or b.is_ne:
        return NE
    return TruthValue(max(a.value, b.value))


def truth_not(a: TruthValue) -> TruthValue:
    if a.is_ne:
        return NE
    return TruthValue(1.0 - a.value)


def truth_combine(op: str, t1: TruthValue, t2: TruthValue | None = None) -> TruthValue:
    """Combine truth values; ``op`` is one of ``and``, ``or``, ``not``."""
    if op == "not":
        if t2 is not None:
            raise ValueError("'not' is unary")
        return truth_not(t1)
    if t2 is None:
        raise ValueError(f"{op!r} is binary")
    if op == "and":
        return truth_and(t1, t2)
    if op == "or":
        return truth_or(t1, t2)
    raise ValueError(f"unknown connective {op!r}")


# ---------------------------------------------------------------------------
# Value payloads
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Inexact:
    """A number known up to symmetric inaccuracy: center +- half_width."""

    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half-width must be >= 0")

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width


@dataclass(frozen=True, slots=True)
class AdmissibleSet:
    """A value known only to belong to a finite set of numbers."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("admissible set must be non-empty")
        object.__setattr__(self, "values", tuple(sorted(self.values)))


@dataclass(frozen=True, slots=True)
class AdmissibleRange:
    """A value known only to lie in a closed numeric range."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("range lower bound exceeds upper bound")


@dataclass(frozen=True, slots=True)
class MembershipFunction:
    """Piecewise-linear membership function as (x, mu) breakpoints.

    x strictly ascending, mu within [0, 1], at least one mu > 0.  Between
    breakpoints mu is interpolated linearly; outside the breakpoint span it
    is zero.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(m)) for x, m in self.points)
        if not pts:
            raise ValueError("membership function needs at least one breakpoint")
        for i, (x, m) in enumerate(pts):
            if not 0.0 <= m <= 1.0:
                raise ValueError(f"mu outside [0, 1] at breakpoint {i}: {m}")
            if i and x <= pts[i - 1][0]:
                raise ValueError("breakpoint x values must be strictly ascending")
        if all(m == 0.0 for _, m in pts):
            raise ValueError("membership function must be positive somewhere")
        object.__setattr__(self, "points", pts)

    def mu_at(self, x: float) -> float:
        pts = self.points
        if x < pts[0][0] or x > pts[-1][0]:
            return 0.0
        for (x1, m1), (x2, m2) in zip(pts, pts[1:]):
            if x1 <= x <= x2:
                if x == x1:
                    return m1
                if x == x2:
                    return m2
                return m1 + (m2 - m1) * (x - x1) / (x2 - x1)
        return pts[0][1]  # single-breakpoint MF, x == that breakpoint

    @property
    def peak(self) -> float:
        return max(m for _, m in self.points)

    @property
    def support(self) -> tuple[float, float]:
        return (self.points[0][0], self.points[-1][0])

    def modes(self) -> list[tuple[int, int]]:
        """Maximal runs of breakpoints separated by interior zero membership.

        Returns (first, last) breakpoint index pairs; a run contains every
        point of one positive region including its zero-valued feet.
        """
        pts = self.points
        runs: list[tuple[int, int]] = []
        start = None
        for i, (_, m) in enumerate(pts):
            if m > 0.0:
                if start is None:
                    start = i - 1 if i > 0 and pts[i - 1][1] == 0.0 else i
            elif start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, len(pts) - 1))
        return runs


def triangle(left: float, peak: float, right: float) -> MembershipFunction:
    """Triangular MF with feet at ``left``/``right`` and mu=1 at ``peak``."""
    if not left <= peak <= right:
        raise ValueError("triangle requires left <= peak <= right")
    pts: list[tuple[float, float]] = []
    if left < peak:
        pts.append((left, 0.0))
    pts.append((peak, 1.0))
    if right > peak:
        pts.append((right, 0.0))
    return MembershipFunction(tuple(pts))


def trapezoid(a: float, b: float, c: float, d: float) -> MembershipFunction:
    """Trapezoidal MF: feet at a/d, plateau of mu=1 over [b, c]."""
    if not a <= b <= c <= d:
        raise ValueError("trapezoid requires a <= b <= c <= d")
    pts: list[tuple[float, float]] = []
    if a < b:
        pts.append((a, 0.0))
    pts.append((b, 1.0))
    if c > b:
        pts.append((c, 1.0))
    if d > c:
        pts.append((d, 0.0))
    return MembershipFunction(tuple(pts))


Payload = Union[float, int, bool, str, Inexact, AdmissibleSet, AdmissibleRange, MembershipFunction]


@dataclass(frozen=True, slots=True)
class Value:
    """A typed datum with NEG annotations.

    ``payload`` is one of: crisp number, bool, linguistic term (str),
    Inexact, AdmissibleSet, AdmissibleRange, MembershipFunction.
    ``certainty`` defaults to 1.
    """

    payload: Payload
    certainty: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.certainty <= 1.0:
            raise ValueError(f"certainty outside [0, 1]: {self.certainty}")

    def with_payload(self, payload: Payload) -> "Value":
        return Value(payload, self.certainty)

    def with_certainty(self, certainty: float) -> "Value":
        return Value(self.payload, certainty)

    @property
    def is_fuzzy(self) -> bool:
        return isinstance(self.payload, MembershipFunction)

    @property
    def is_numeric(self) -> bool:
        p = self.payload
        return (isinstance(p, (int, float)) and not isinstance(p, bool)) or isinstance(
            p, (Inexact, AdmissibleSet, AdmissibleRange, MembershipFunction)
        )


TermTable = Mapping[str, MembershipFunction]


def combine_cf(cf1: float, cf2: float) -> float:
    """Merge two certainty factors for parallel derivations (probabilistic sum)."""
    if not (0.0 <= cf1 <= 1.0 and 0.0 <= cf2 <= 1.0):
        raise ValueError("certainty factors must lie in [0, 1]")
    return cf1 + cf2 - cf1 * cf2


# ---------------------------------------------------------------------------
# Fuzzification / defuzzification
# ---------------------------------------------------------------------------

def fuzzify(v: Value, term_table: TermTable | None = None, epsilon: float = 1e-6) -> Value:
    """Turn a crisp, inexact or linguistic-term value into an MF-backed one.

    Crisp x becomes a narrow triangle of half-width ``epsilon`` centered at
    x; inexact (c, h) a symmetric triangle (c-h, c, c+h); a linguistic term
    its mapped MF.  Certainty is carried through.  An already fuzzy value is
    returned unchanged (flagged no-op per contract).
    """
    p = v.payload
    if isinstance(p, MembershipFunction):
        return v
    if isinstance(p, bool):
        raise ValueAlgebraError("cannot fuzzify a boolean")
    if isinstance(p, str):
        return v.with_payload(_term_mf(p, term_table))
    if isinstance(p, Inexact):
        if p.half_width > 0:
            return v.with_payload(triangle(p.lo, p.center, p.hi))
        p = p.center
    if isinstance(p, AdmissibleRange):
        return v.with_payload(trapezoid(p.lo, p.lo, p.hi, p.hi))
    if isinstance(p, AdmissibleSet):
        return v.with_payload(_set_to_mf(p.values, epsilon))
    x = float(p)
    eps = abs(epsilon) or 1e-6
    return v.with_payload(triangle(x - eps, x, x + eps))


def _term_mf(term: str, term_table: TermTable | None) -> MembershipFunction:
    if not term_table or term not in term_table:
        raise UnknownTermError(f"no membership function for term {term!r}")
    return term_table[term]


def _set_to_mf(values: Sequence[float], epsilon: float) -> MembershipFunction:
    # Spikes per element; half-widths shrink to a quarter of the local gap
    # so spikes never overlap and x stays strictly ascending.
    pts: list[tuple[float, float]] = []
    vs = sorted(values)
    for i, s in enumerate(vs):
        eps = abs(epsilon) or 1e-6
        if i > 0:
            eps = min(eps, (s - vs[i - 1]) / 4)
        if i + 1 < len(vs):
            eps = min(eps, (vs[i + 1] - s) / 4)
        pts.extend(((s - eps, 0.0), (s, 1.0), (s + eps, 0.0)))
    return MembershipFunction(tuple(pts))


@dataclass(frozen=True, slots=True)
class DefuzzResult:
    """Crisp values recovered from an MF: one centroid per mode, ascending,
    plus the primary value (mode with the greatest peak; ties go to the
    smallest centroid)."""

    modes: tuple[float, ...]
    primary: float


def _segment_area_moment(p1: tuple[float, float], p2: tuple[float, float]) -> tuple[float, float]:
    (x1, m1), (x2, m2) = p1, p2
    w = x2 - x1
    area = (m1 + m2) * w / 2.0
    moment = w * (x1 * (2.0 * m1 + m2) + x2 * (m1 + 2.0 * m2)) / 6.0
    return area, moment


def defuzzify(mf: MembershipFunction) -> DefuzzResult:
    """Centroid defuzzification, multimodal-aware.

    The MF is segmented at interior zero-membership gaps; each mode yields
    its centroid.
    """
    pts = mf.points
    centroids: list[float] = []
    peaks: list[float] = []
    for first, last in mf.modes():
        if first == last:
            centroids.append(pts[first][0])  # isolated spike: point mass
            peaks.append(pts[first][1])
            continue
        area = moment = 0.0
        for i in range(first, last):
            a, m = _segment_area_moment(pts[i], pts[i + 1])
            area += a
            moment += m
        centroids.append(moment / area)
        peaks.append(max(pts[i][1] for i in range(first, last + 1)))
    best = max(range(len(centroids)), key=lambda i: (peaks[i], -centroids[i]))
    ordered: list[float] = []
    for c in sorted(centroids):
        if not ordered or c != ordered[-1]:
            ordered.append(c)
    return DefuzzResult(tuple(ordered), centroids[best])


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------

_ARITH_OPS = ("+", "-", "*", "/")

FInterval = tuple[Fraction, Fraction]


def _iv_combine(op: str, a: FInterval, b: FInterval) -> FInterval:
    al, ah = a
    bl, bh = b
    if op == "+":
        return (al + bl, ah + bh)
    if op == "-":
        return (al - bh, ah - bl)
    if op == "*":
        products = (al * bl, al * bh, ah * bl, ah * bh)
        return (min(products), max(products))
    if op == "/":
        if bl <= 0 <= bh:
            raise UndefinedQuotientError("undefined quotient")
        quotients = (al / bl, al / bh, ah / bl, ah / bh)
        return (min(quotients), max(quotients))
    raise ValueError(f"unknown arithmetic op {op!r}")


def _merge_intervals(ivs: Iterable[FInterval]) -> list[FInterval]:
    out: list[FInterval] = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def _union_combine(op: str, a: Sequence[FInterval], b: Sequence[FInterval]) -> list[FInterval]:
    return _merge_intervals(_iv_combine(op, x, y) for x in a for y in b)


def _mf_alpha_cut(points: Sequence[tuple[Fraction, Fraction]], alpha: Fraction) -> list[FInterval]:
    """Level set {mu >= alpha} of a piecewise-linear MF, as an interval union.

    alpha = 0 yields the closure of the support components.
    """
    if alpha == 0:
        cuts: list[FInterval] = []
        start = None
        for i, (x, m) in enumerate(points):
            if m > 0:
                if start is None:
                    start = points[i - 1][0] if i > 0 and points[i - 1][1] == 0 else x
            elif start is not None:
                cuts.append((start, x))
                start = None
        if start is not None:
            cuts.append((start, points[-1][0]))
        return cuts
    cuts = []
    inside: Fraction | None = None
    n = len(points)
    for i in range(n):
        x, m = points[i]
        if m >= alpha and inside is None:
            if i > 0 and points[i - 1][1] < alpha:
                x1, m1 = points[i - 1]
                inside = x1 + (alpha - m1) * (x - x1) / (m - m1)
            else:
                inside = x
        if inside is not None:
            if i + 1 < n and points[i + 1][1] < alpha:
                x2, m2 = points[i + 1]
                exit_x = x + (alpha - m) * (x2 - x) / (m2 - m) if m > alpha else x
                cuts.append((inside, exit_x))
                inside = None
            elif i + 1 == n:
                cuts.append((inside, x))
    return _merge_intervals(cuts)


def _frac_points(mf: MembershipFunction) -> list[tuple[Fraction, Fraction]]:
    return [(Fraction(x), Fraction(m)) for x, m in mf.points]


def _payload_cuts(
    p: Payload, levels: Sequence[Fraction], term_table: TermTable | None
) -> list[list[FInterval]]:
    """Alpha cuts of any numeric payload, one union per level."""
    if isinstance(p, str):
        p = _term_mf(p, term_table)
    if isinstance(p, MembershipFunction):
        pts = _frac_points(p)
        return [_mf_alpha_cut(pts, a) for a in levels]
    if isinstance(p, Inexact):
        lo, c, hi = Fraction(p.lo), Fraction(p.center), Fraction(p.hi)
        return [[(lo + (c - lo) * a, hi - (hi - c) * a)] for a in levels]
    if isinstance(p, AdmissibleRange):
        return [[(Fraction(p.lo), Fraction(p.hi))] for _ in levels]
    if isinstance(p, AdmissibleSet):
        pts = [(Fraction(s), Fraction(s)) for s in p.values]
        return [list(pts) for _ in levels]
    x = Fraction(float(p))
    return [[(x, x)] for _ in levels]


def _reassemble_mf(
    levels: Sequence[Fraction], unions: Sequence[list[FInterval]], epsilon: float
) -> MembershipFunction:
    """Rebuild a piecewise-linear MF from nested per-level interval unions.

    Union endpoints become breakpoints whose membership is the highest level
    containing them; linear interpolation in between reproduces the standard
    alpha reassembly exactly.  Zero-width modes and positive-membership gaps
    between modes are the only places the representation needs epsilon feet.
    """
    xs: set[Fraction] = set()
    for union in unions:
        for lo, hi in union:
            xs.add(lo)
            xs.add(hi)

    def level_at(x: Fraction) -> Fraction:
        best = Fraction(0)
        for a, union in zip(levels, unions):
            if a > best and any(lo <= x <= hi for lo, hi in union):
                best = a
        return best

    components = unions[0]
    if not components:
        raise ValueAlgebraError("empty result support in fuzzy arithmetic")
    feps = Fraction(abs(epsilon) or 1e-6)
    pieces: list[list[tuple[Fraction, Fraction]]] = []
    for ci, (clo, chi) in enumerate(components):
        gap_l = clo - components[ci - 1][1] if ci > 0 else None
        gap_r = components[ci + 1][0] - chi if ci + 1 < len(components) else None
        eps = feps
        if gap_l is not None:
            eps = min(eps, gap_l / 4)
        if gap_r is not None:
            eps = min(eps, gap_r / 4)
        if clo == chi:
            pieces.append([(clo - eps, Fraction(0)), (clo, level_at(clo)), (clo + eps, Fraction(0))])
            continue
        comp = [(x, level_at(x)) for x in sorted(x for x in xs if clo <= x <= chi)]
        if gap_l is not None and comp[0][1] > 0:
            comp.insert(0, (clo - eps, Fraction(0)))
        if gap_r is not None and comp[-1][1] > 0:
            comp.append((chi + eps, Fraction(0)))
        pieces.append(comp)

    pts: list[tuple[float, float]] = []
    for piece in pieces:
        for x, m in piece:
            fx, fm = float(x), float(m)
            if pts and fx <= pts[-1][0]:
                # distinct rationals collapsed by float rounding: keep higher mu
                if fm > pts[-1][1]:
                    pts[-1] = (pts[-1][0], fm)
                continue
            pts.append((fx, fm))
    return MembershipFunction(tuple(pts))


def _alpha_levels(count: int, *extra: Fraction) -> list[Fraction]:
    """The sampled alpha levels 0, 1/(count-1), ..., 1 plus any extras."""
    if count < 2:
        raise ValueError("alpha level count must be >= 2")
    levels = {Fraction(i, count - 1) for i in range(count)}
    levels.update(a for a in extra if 0 < a <= 1)
    return sorted(levels)


def _payload_peak(p: Payload, term_table: TermTable | None) -> Fraction:
    if isinstance(p, str):
        p = _term_mf(p, term_table)
    if isinstance(p, MembershipFunction):
        return Fraction(p.peak)
    return Fraction(1)


def neg_arith(
    op: str,
    a: Value,
    b: Value,
    *,
    term_table: TermTable | None = None,
    alpha_levels: int = 11,
    epsilon: float = 1e-6,
) -> Value:
    """Arithmetic extended over NEG-factors.

    Crisp op crisp stays crisp; inexact values go through endpoint interval
    arithmetic; any fuzzy operand routes both operands through alpha-cut
    interval arithmetic (exact rational internally) and reassembles a
    piecewise-linear MF; admissible sets combine by the image of the
    operation.  Result certainty is min of the operand certainties.
    """
    if op not in _ARITH_OPS:
        raise ValueError(f"unknown arithmetic op {op!r}")
    cert = min(a.certainty, b.certainty)
    pa, pb = a.payload, b.payload
    if isinstance(pa, bool) or isinstance(pb, bool):
        raise IncomparableError("arithmetic on booleans is undefined")
    if isinstance(pa, str):
        pa = _term_mf(pa, term_table)
    if isinstance(pb, str):
        pb = _term_mf(pb, term_table)

    if isinstance(pa, MembershipFunction) or isinstance(pb, MembershipFunction):
        top = min(_payload_peak(pa, term_table), _payload_peak(pb, term_table))
        levels = _alpha_levels(alpha_levels, top)
        cuts_a = _payload_cuts(pa, levels, term_table)
        cuts_b = _payload_cuts(pb, levels, term_table)
        if op == "/" and any(lo <= 0 <= hi for lo, hi in cuts_b[0]):
            raise UndefinedQuotientError("undefined quotient")
        unions = [_union_combine(op, ca, cb) for ca, cb in zip(cuts_a, cuts_b)]
        return Value(_reassemble_mf(levels, unions, epsilon), cert)

    if isinstance(pa, AdmissibleSet) and isinstance(pb, (AdmissibleSet, int, float)):
        return Value(_set_image(op, pa.values, _as_set(pb)), cert)
    if isinstance(pb, AdmissibleSet) and isinstance(pa, (int, float)):
        return Value(_set_image(op, _as_set(pa), pb.values), cert)

    interval_like = (Inexact, AdmissibleRange, AdmissibleSet)
    if isinstance(pa, interval_like) or isinstance(pb, interval_like):
        # native float endpoint arithmetic: bit-identical to an endpoint
        # oracle (each single operation is correctly rounded)
        lo, hi = _iv_combine_float(op, _as_float_interval(pa), _as_float_interval(pb))
        if isinstance(pa, (AdmissibleRange, AdmissibleSet)) or isinstance(pb, (AdmissibleRange, AdmissibleSet)):
            return Value(AdmissibleRange(lo, hi), cert)
        center = (lo + hi) / 2
        return Value(Inexact(center, hi - center), cert)

    return Value(_crisp_arith(op, pa, pb), cert)


def _as_set(p: Payload) -> tuple[float, ...]:
    if isinstance(p, AdmissibleSet):
        return p.values
    return (float(p),)


def _set_image(op: str, xs: Sequence[float], ys: Sequence[float]) -> AdmissibleSet:
    if op == "/" and any(y == 0 for y in ys):
        raise UndefinedQuotientError("undefined quotient")
    image = {_crisp_arith(op, x, y) for x in xs for y in ys}
    return AdmissibleSet(tuple(image))


def _as_float_interval(p: Payload) -> tuple[float, float]:
    if isinstance(p, (Inexact, AdmissibleRange)):
        return (p.lo, p.hi)
    if isinstance(p, AdmissibleSet):
        return (p.values[0], p.values[-1])
    return (float(p), float(p))


def _iv_combine_float(op: str, a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    al, ah = a
    bl, bh = b
    if op == "+":
        return (al + bl, ah + bh)
    if op == "-":
        return (al - bh, ah - bl)
    if op == "*":
        products = (al * bl, al * bh, ah * bl, ah * bh)
        return (min(products), max(products))
    if bl <= 0 <= bh:
        raise UndefinedQuotientError("undefined quotient")
    quotients = (al / bl, al / bh, ah / bl, ah / bh)
    return (min(quotients), max(quotients))


def _crisp_arith(op: str, x, y):
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if y == 0:
        raise UndefinedQuotientError("undefined quotient")
    return x / y


# ---------------------------------------------------------------------------
# Graded comparison
# ---------------------------------------------------------------------------

_CMP_OPS = (">", "<", "=", ">=", "<=", "!=")

_FLIP = {">": "<", "<": ">", ">=": "<=", "<=": ">=", "=": "=", "!=": "!="}


def _crisp_cmp(op: str, x, y) -> bool:
    if op == ">":
        return x > y
    if op == "<":
        return x < y
    if op == "=":
        return x == y
    if op == ">=":
        return x >= y
    if op == "<=":
        return x <= y
    if op == "!=":
        return x != y
    raise ValueError(f"unknown comparison {op!r}")


def neg_compare(op: str, a: Value, b: Value, *, term_table: TermTable | None = None) -> TruthValue:
    """Graded comparison between NEG-annotated values.

    Crisp pairs give 1/0; interval and finite-set operands give the fraction
    of the operand satisfying the predicate (Lebesgue measure / count);
    membership-function operands give the possibility measure (sup of mu
    over the satisfying region).  Certainty is not folded in; it stays an
    annotation on derived facts.
    """
    if op not in _CMP_OPS:
        raise ValueError(f"unknown comparison {op!r}")
    pa, pb = a.payload, b.payload

    if isinstance(pa, bool) or isinstance(pb, bool):
        if isinstance(pa, bool) and isinstance(pb, bool):
            if op in ("=", "!="):
                return TRUE if _crisp_cmp(op, pa, pb) else FALSE
            raise IncomparableError("booleans admit only =/!=")
        raise IncomparableError("boolean compared with non-boolean")

    if isinstance(pa, str) or isinstance(pb, str):
        if isinstance(pa, str) and isinstance(pb, str):
            has_mf = term_table and (pa in term_table or pb in term_table)
            if not has_mf:
                if op in ("=", "!="):
                    return TRUE if _crisp_cmp(op, pa, pb) else FALSE
                raise IncomparableError("plain strings admit only =/!=")
        if isinstance(pa, str):
            pa = _term_mf(pa, term_table)
        if isinstance(pb, str):
            pb = _term_mf(pb, term_table)

    if isinstance(pa, MembershipFunction) or isinstance(pb, MembershipFunction):
        if isinstance(pa, MembershipFunction):
            return TruthValue(_possibility(op, pa, pb))
        return TruthValue(_possibility(_FLIP[op], pb, pa))

    a_iv = isinstance(pa, (Inexact, AdmissibleRange))
    b_iv = isinstance(pb, (Inexact, AdmissibleRange))
    a_set = isinstance(pa, AdmissibleSet)
    b_set = isinstance(pb, AdmissibleSet)

    if a_set or b_set:
        if a_set and b_set:
            xs, ys = pa.values, pb.values
            hits = sum(1 for x in xs for y in ys if _crisp_cmp(op, x, y))
            return TruthValue(hits / (len(xs) * len(ys)))
        if a_set and b_iv:
            xs = pa.values
            return TruthValue(sum(_interval_fraction(_FLIP[op], _iv_f(pb), x) for x in xs) / len(xs))
        if b_set and a_iv:
            ys = pb.values
            return TruthValue(sum(_interval_fraction(op, _iv_f(pa), y) for y in ys) / len(ys))
        if a_set:
            xs = pa.values
            hits = sum(1 for x in xs if _crisp_cmp(op, x, float(pb)))
            return TruthValue(hits / len(xs))
        ys = pb.values
        hits = sum(1 for y in ys if _crisp_cmp(op, float(pa), y))
        return TruthValue(hits / len(ys))

    if a_iv and b_iv:
        return TruthValue(_fraction_2d(op, _iv_f(pa), _iv_f(pb)))
    if a_iv:
        return TruthValue(_interval_fraction(op, _iv_f(pa), float(pb)))
    if b_iv:
        return TruthValue(_interval_fraction(_FLIP[op], _iv_f(pb), float(pa)))

    return TRUE if _crisp_cmp(op, float(pa), float(pb)) else FALSE


def _iv_f(p: Payload) -> tuple[float, float]:
    assert isinstance(p, (Inexact, AdmissibleRange))
    return (p.lo, p.hi)


def _interval_fraction(op: str, iv: tuple[float, float], c: float) -> float:
    """Fraction of the uniform measure on ``iv`` satisfying ``x op c``."""
    lo, hi = iv
    if hi == lo:
        return 1.0 if _crisp_cmp(op, lo, c) else 0.0
    width = hi - lo
    if op in (">", ">="):
        return min(max((hi - c) / width, 0.0), 1.0)
    if op in ("<", "<="):
        return min(max((c - lo) / width, 0.0), 1.0)
    if op == "=":
        return 0.0
    return 1.0  # != on a non-degenerate interval


def _fraction_2d(op: str, iva: tuple[float, float], ivb: tuple[float, float]) -> float:
    """Uniform product-measure fraction of pairs (x, y) with x op y."""
    a1, a2 = iva
    b1, b2 = ivb
    if a1 == a2:
        return _interval_fraction(_FLIP[op], ivb, a1)
    if b1 == b2:
        return _interval_fraction(op, iva, b1)
    if op == "=":
        return 0.0
    if op == "!=":
        return 1.0
    if op in ("<", "<="):
        return 1.0 - _fraction_2d(">", iva, ivb)
    # area of {x > y} within the rectangle, integrated over x
    hb = b2 - b1

    def seg(x: float) -> float:
        return min(max(x - b1, 0.0), hb)

    xs = sorted({a1, a2, min(max(b1, a1), a2), min(max(b2, a1), a2)})
    area = 0.0
    for x1, x2 in zip(xs, xs[1:]):
        area += (seg(x1) + seg(x2)) / 2.0 * (x2 - x1)
    return area / ((a2 - a1) * hb)


# --- possibility measures for MF operands ----------------------------------

def _possibility(op: str, mf: MembershipFunction, other: Payload) -> float:
    if isinstance(other, MembershipFunction):
        return _possibility_mf_mf(op, mf, other)
    if isinstance(other, AdmissibleSet):
        return max(_possibility_vs_crisp(op, mf, s) for s in other.values)
    if isinstance(other, (Inexact, AdmissibleRange)):
        return _possibility_vs_interval(op, mf, other.lo, other.hi)
    return _possibility_vs_crisp(op, mf, float(other))


def _possibility_vs_crisp(op: str, mf: MembershipFunction, c: float) -> float:
    """sup of mu over {x : x op c}; PL continuity makes open/closed regions
    agree except at the support edges."""
    s_lo, s_hi = mf.support
    if op in (">", ">="):
        if c > s_hi or (op == ">" and c >= s_hi):
            return 0.0
        start = max(c, s_lo)
        best = mf.mu_at(start)
        for x, m in mf.points:
            if x > start:
                best = max(best, m)
        return best
    if op in ("<", "<="):
        if c < s_lo or (op == "<" and c <= s_lo):
            return 0.0
        end = min(c, s_hi)
        best = mf.mu_at(end)
        for x, m in mf.points:
            if x < end:
                best = max(best, m)
        return best
    if op == "=":
        return mf.mu_at(c)
    # !=: only a lone spike exactly at c has no mass beside c
    if len(mf.points) == 1 and mf.points[0][0] == c:
        return 0.0
    return mf.peak


def _possibility_vs_interval(op: str, mf: MembershipFunction, lo: float, hi: float) -> float:
    if lo == hi:
        return _possibility_vs_crisp(op, mf, lo)
    # {x : exists y in [lo, hi] with x op y}
    if op in (">", ">="):
        return _possibility_vs_crisp(op, mf, lo)
    if op in ("<", "<="):
        return _possibility_vs_crisp(op, mf, hi)
    if op == "=":
        best = 0.0
        for x, m in mf.points:
            if lo <= x <= hi:
                best = max(best, m)
        return max(best, mf.mu_at(lo), mf.mu_at(hi))
    return mf.peak  # != against a non-degenerate interval


def _rightmost_at(points: Sequence[tuple[float, float]], alpha: float) -> float | None:
    """Largest x with mu(x) >= alpha, or None if the cut is empty."""
    n = len(points)
    for i in range(n - 1, -1, -1):
        x, m = points[i]
        if m >= alpha:
            if i + 1 < n and points[i + 1][1] < alpha:
                x2, m2 = points[i + 1]
                if m > alpha:
                    return x + (alpha - m) * (x2 - x) / (m2 - m)
            return x
    return None


def _leftmost_at(points: Sequence[tuple[float, float]], alpha: float) -> float | None:
    mirrored = [(-x, m) for x, m in reversed(points)]
    r = _rightmost_at(mirrored, alpha)
    return None if r is None else -r


def _possibility_mf_mf(op: str, A: MembershipFunction, B: MembershipFunction) -> float:
    """sup over {(x, y) : x op y} of min(muA(x), muB(y)).

    Ordering cases use the level-set characterization: the possibility is
    the largest alpha at which the rightmost point of A's cut still exceeds
    the leftmost point of B's cut; that margin is piecewise linear in alpha
    between the breakpoint membership grades, so the supremum is solved
    exactly per knot interval.
    """
    if op == "!=":
        if len(A.points) == 1 and len(B.points) == 1 and A.points[0][0] == B.points[0][0]:
            return 0.0
        return min(A.peak, B.peak)
    if op in ("<", "<="):
        A2 = MembershipFunction(tuple((-x, m) for x, m in reversed(A.points)))
        B2 = MembershipFunction(tuple((-x, m) for x, m in reversed(B.points)))
        return _possibility_mf_mf(">" if op == "<" else ">=", A2, B2)
    if op in (">", ">="):
        top = min(A.peak, B.peak)
        knots = sorted(
            {m for _, m in A.points if m <= top}
            | {m for _, m in B.points if m <= top}
            | {0.0, top},
            reverse=True,
        )

        def margin(alpha: float) -> float:
            f = _rightmost_at(A.points, alpha)
            g = _leftmost_at(B.points, alpha)
            assert f is not None and g is not None  # alpha <= both peaks
            return f - g

        strict = op == ">"

        def ok(d: float) -> bool:
            return d > 0 or (not strict and d == 0)

        # The cut boundaries are linear in alpha strictly between knot
        # grades but may jump AT them (the extremal branch switches
        # segment), so knots are tested exactly and the open bands are
        # probed by direct evaluation just inside their ends (never by
        # extrapolation, which manufactures float slivers).
        for i, hi in enumerate(knots):
            if ok(margin(hi)):
                return hi
            if i + 1 == len(knots):
                break
            lo = knots[i + 1]
            width = hi - lo
            if width <= 0:
                continue
            eps = width * 1e-9
            d_hi = margin(hi - eps)
            d_lo = margin(lo + eps)
            if ok(d_hi):
                return hi  # positive up to the band top: sup = top
            if ok(d_lo):
                # linear inside the band: the zero crossing is the sup
                slope = (d_hi - d_lo) / (width - 2 * eps)
                root = (lo + eps) - d_lo / slope
                if ok(margin((lo + min(root, hi)) / 2)):
                    return min(max(root, lo), hi)
        return 0.0
    # equality: sup_x min(muA(x), muB(x)); candidates are breakpoints of both
    # plus crossings of the two PL functions (true mu re-evaluated, so fake
    # candidates can never overestimate)
    cs = sorted({x for x, _ in A.points} | {x for x, _ in B.points})
    best = 0.0
    for x in cs:
        best = max(best, min(A.mu_at(x), B.mu_at(x)))
    for x1, x2 in zip(cs, cs[1:]):
        a1, a2 = A.mu_at(x1), A.mu_at(x2)
        b1, b2 = B.mu_at(x1), B.mu_at(x2)
        da, db = a2 - a1, b2 - b1
        if da != db:
            t = (b1 - a1) / (da - db)
            if 0.0 < t < 1.0:
                xm = x1 + (x2 - x1) * t
                best = max(best, min(A.mu_at(xm), B.mu_at(xm)))
    return best


# ---------------------------------------------------------------------------
# Wire format (shared by scenario files, traces, and the HTTP service)
# ---------------------------------------------------------------------------

def to_literal(v: Value) -> object:
    """Serialize a Value to the documented JSON literal form."""
    lit = _payload_literal(v.payload)
    if v.certainty != 1.0:
        return {"value": lit, "cf": v.certainty}
    return lit


def _payload_literal(p: Payload) -> object:
    if isinstance(p, (bool, int, float, str)):
        return p
    if isinstance(p, Inexact):
        return {"inexact": [p.center, p.half_width]}
    if isinstance(p, AdmissibleSet):
        return {"set": list(p.values)}
    if isinstance(p, AdmissibleRange):
        return {"range": [p.lo, p.hi]}
    if isinstance(p, MembershipFunction):
        return {"mf": [[x, m] for x, m in p.points]}
    raise ValueError(f"unserializable payload {p!r}")


def value_from_literal(lit: object) -> Value:
    """Parse the documented JSON literal form into a Value."""
    cf = 1.0
    if isinstance(lit, dict) and "value" in lit:
        cf = float(lit.get("cf", 1.0))
        lit = lit["value"]
    if isinstance(lit, (bool, int, float, str)):
        return Value(lit, cf)
    if isinstance(lit, dict):
        if "inexact" in lit:
            c, h = lit["inexact"]
            return Value(Inexact(float(c), float(h)), cf)
        if "set" in lit:
            return Value(AdmissibleSet(tuple(float(x) for x in lit["set"])), cf)
        if "range" in lit:
            lo, hi = lit["range"]
            return Value(AdmissibleRange(float(lo), float(hi)), cf)
        if "mf" in lit:
            return Value(MembershipFunction(tuple((float(x), float(m)) for x, m in lit["mf"])), cf)
    raise ValueError(f"unrecognized value literal: {lit!r}")
