"""Semantic validation of a parsed knowledge base.

Every invariant violation becomes one Diagnostic with a source location;
``validate_kb`` returns the (possibly empty) list rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import ast

_CONFIG_SCHEMA = {
    "theta_fire": "theta",
    "max_firings": "posint",
    "alpha_levels": "levels",
    "singleton_epsilon": "poseps",
    "firing_mode": "mode",
    "cache_enabled": "bool",
    "conflict_carryover": "bool",
}

_BUILTIN_KINDS = ("number", "string", "boolean")


@dataclass(frozen=True)
class Diagnostic:
    message: str
    loc: ast.Loc
    code: str

    def __str__(self) -> str:
        return f"{self.loc}: {self.message} [{self.code}]"


class Diags:
    def __init__(self):
        self.items: list[Diagnostic] = []

    def add(self, message: str, loc: ast.Loc, code: str):
        self.items.append(Diagnostic(message, loc, code))


def validate_kb(kb: ast.KnowledgeBase) -> list[Diagnostic]:
    d = Diags()
    _check_names(kb, d)
    _check_types(kb, d)
    for e in kb.events:
        _check_expr(kb, e.origin_condition, d, static_only=True, where=f"event {e.name}")
    for i in kb.intervals:
        _check_expr(kb, i.open_condition, d, static_only=True, where=f"interval {i.name}")
        _check_expr(kb, i.close_condition, d, static_only=True, where=f"interval {i.name}")
    for r in kb.rules:
        _check_rule(kb, r, d)
    if kb.config is not None:
        _check_config(kb.config, d)
    return d.items


def _check_names(kb: ast.KnowledgeBase, d: Diags):
    seen: dict[str, str] = {}
    groups = (
        ("type", kb.types),
        ("object", kb.objects),
        ("event", kb.events),
        ("interval", kb.intervals),
        ("rule", kb.rules),
    )
    for category, decls in groups:
        for decl in decls:
            if decl.name in seen:
                d.add(
                    f"duplicate {category} name {decl.name!r} (already a {seen[decl.name]})",
                    decl.loc,
                    "duplicate-name",
                )
            else:
                seen[decl.name] = category
    for o in kb.objects:
        attr_names = set()
        for a in o.attrs:
            if a.name in attr_names:
                d.add(f"duplicate attribute {a.name!r} on object {o.name!r}", a.loc, "duplicate-name")
            attr_names.add(a.name)


def _check_types(kb: ast.KnowledgeBase, d: Diags):
    for t in kb.types:
        if t.range is not None:
            if t.kind != "number":
                d.add(f"type {t.name!r}: range on non-number kind", t.loc, "bad-type")
            elif t.range[0] > t.range[1]:
                d.add(f"type {t.name!r}: empty range", t.loc, "bad-type")
        if t.terms and t.kind != "number":
            d.add(f"type {t.name!r}: linguistic terms need a number kind", t.loc, "bad-type")
        if t.values is not None:
            want = {"number": (int, float), "string": (str,), "boolean": (bool,)}[t.kind]
            for v in t.values:
                if isinstance(v, bool) and t.kind != "boolean" or not isinstance(v, want):
                    d.add(f"type {t.name!r}: domain value {v!r} does not match kind {t.kind}", t.loc, "bad-type")
    for o in kb.objects:
        for a in o.attrs:
            if a.type_name not in _BUILTIN_KINDS and kb.type_named(a.type_name) is None:
                d.add(f"unknown type {a.type_name!r} for attribute {o.name}.{a.name}", a.loc, "unknown-type")


def _attr_kind(kb: ast.KnowledgeBase, ref: ast.Ref) -> str | None:
    t = kb.attr_type(ref)
    return t.kind if t else None


def _check_rule(kb: ast.KnowledgeBase, r: ast.Rule, d: Diags):
    if r.kind.kind == "response":
        if not any(e.name == r.kind.trigger for e in kb.events):
            d.add(f"unknown trigger {r.kind.trigger!r} for response rule {r.name!r}", r.loc, "unknown-trigger")
    if r.kind.kind == "periodic" and (r.kind.period is None or r.kind.period < 1):
        d.add(f"rule {r.name!r}: periodic period must be >= 1", r.loc, "bad-period")
    if not 0.0 <= r.cf <= 1.0:
        d.add(f"rule {r.name!r}: cf outside [0, 1]", r.loc, "bad-cf")
    _check_expr(kb, r.lhs, d, static_only=False, where=f"rule {r.name}")
    for act in r.actions:
        if not 0.0 <= act.cf <= 1.0:
            d.add(f"rule {r.name!r}: action cf outside [0, 1]", act.loc, "bad-cf")
        if kb.temporal_kind(act.target.obj) is not None:
            d.add(f"rule {r.name!r}: cannot assign to temporal object {act.target.obj!r}", act.loc, "bad-target")
        elif kb.attr_decl(act.target) is None:
            d.add(f"unknown attribute {act.target.key!r}", act.loc, "unknown-ref")
        else:
            kind = _attr_kind(kb, act.target)
            vk = _arith_kind(kb, act.expr, d, f"rule {r.name}")
            if vk is not None and kind is not None and vk != kind:
                if not (kind == "number" and vk == "string" and _is_term(kb, act.target, act.expr)):
                    d.add(
                        f"rule {r.name!r}: assigning {vk} to {kind} attribute {act.target.key!r}",
                        act.loc,
                        "type-mismatch",
                    )
        _check_arith_refs(kb, act.expr, d)


def _is_term(kb: ast.KnowledgeBase, target: ast.Ref, expr: ast.ArithExpr) -> bool:
    return isinstance(expr, ast.Str) and expr.value in kb.term_table_for(target)


def _check_config(config: ast.ConfigDecl, d: Diags):
    seen = set()
    for key, value in config.entries:
        if key in seen:
            d.add(f"duplicate config key {key!r}", config.loc, "bad-config")
        seen.add(key)
        schema = _CONFIG_SCHEMA.get(key)
        if schema is None:
            d.add(f"unknown config key {key!r}", config.loc, "bad-config")
            continue
        ok = True
        if schema == "theta":
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and 0 < value <= 1
        elif schema == "posint":
            ok = isinstance(value, int) and not isinstance(value, bool) and value >= 1
        elif schema == "levels":
            ok = isinstance(value, int) and not isinstance(value, bool) and value >= 2
        elif schema == "poseps":
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
        elif schema == "mode":
            ok = value in ("multi", "single")
        elif schema == "bool":
            ok = isinstance(value, bool)
        if not ok:
            d.add(f"config key {key!r}: invalid value {value!r}", config.loc, "bad-config")


# --- expression checking ----------------------------------------------------

def _check_expr(kb: ast.KnowledgeBase, expr: ast.Expr, d: Diags, *, static_only: bool, where: str):
    for node in ast.walk_expr(expr):
        if isinstance(node, ast.AllenAtom):
            if static_only:
                d.add(f"{where}: temporal formula not allowed here", node.loc, "temporal-in-static")
                continue
            _check_allen(kb, node, d)
        elif isinstance(node, ast.TemporalVar):
            if static_only:
                d.add(f"{where}: temporal formula not allowed here", node.loc, "temporal-in-static")
            elif kb.temporal_kind(node.name) is None:
                d.add(f"unknown temporal object {node.name!r}", node.loc, "unknown-ref")
        elif isinstance(node, ast.BoolRef):
            kind = _ref_kind(kb, node.ref, d, static_only, where)
            if kind is not None and kind != "boolean":
                d.add(f"{node.ref.key} is not boolean", node.loc, "type-mismatch")
        elif isinstance(node, ast.Comparison):
            _check_comparison(kb, node, d, static_only, where)


def _check_allen(kb: ast.KnowledgeBase, node: ast.AllenAtom, d: Diags):
    kinds = []
    for name in (node.left, node.right):
        kind = kb.temporal_kind(name)
        if kind is None:
            d.add(f"unknown temporal object {name!r}", node.loc, "unknown-ref")
        kinds.append(kind)
    if None in kinds:
        return
    allowed = ast.ALLOWED_RELATIONS[(kinds[0], kinds[1])]
    if node.rel not in allowed:
        d.add(
            f"connective {node.rel!r} not allowed between {kinds[0]} and {kinds[1]}",
            node.loc,
            "bad-relation",
        )


def _ref_kind(kb: ast.KnowledgeBase, ref: ast.Ref, d: Diags, static_only: bool, where: str) -> str | None:
    """Kind of a dotted ref; emits diagnostics for unknown/misplaced refs.

    Returns 'number'/'string'/'boolean' for object attributes, 'temporal'
    for X.c / X.l, or None after a diagnostic.
    """
    tkind = kb.temporal_kind(ref.obj)
    if tkind is not None:
        if static_only:
            d.add(f"{where}: temporal attribute {ref.key} not allowed here", ref.loc, "temporal-in-static")
            return None
        if ref.attr not in ("c", "l"):
            d.add(f"unknown temporal attribute {ref.key!r} (use .c or .l)", ref.loc, "unknown-ref")
            return None
        return "temporal"
    if kb.object_named(ref.obj) is None:
        d.add(f"unknown object {ref.obj!r}", ref.loc, "unknown-ref")
        return None
    if kb.attr_decl(ref) is None:
        d.add(f"unknown attribute {ref.key!r}", ref.loc, "unknown-ref")
        return None
    return _attr_kind(kb, ref)


def _terms_in_scope(kb: ast.KnowledgeBase, e: ast.ArithExpr) -> set[str]:
    """Linguistic terms reachable from any ref inside the expression."""
    out: set[str] = set()
    for node in ast.walk_arith(e):
        if isinstance(node, ast.Ref) and kb.temporal_kind(node.obj) is None:
            out.update(kb.term_table_for(node))
    return out


def _arith_kind(
    kb: ast.KnowledgeBase, e: ast.ArithExpr, d: Diags, where: str, term_ctx: set[str] | None = None
) -> str | None:
    """Static kind of an arithmetic expression, diagnosing misuse."""
    if term_ctx is None:
        term_ctx = _terms_in_scope(kb, e)
    if isinstance(e, ast.Num) or isinstance(e, ast.InexactLit):
        return "number"
    if isinstance(e, ast.Str):
        # a known linguistic term stands for a membership function
        return "number" if e.value in term_ctx else "string"
    if isinstance(e, ast.Bool):
        return "boolean"
    if isinstance(e, ast.Ref):
        if kb.temporal_kind(e.obj) is not None:
            return "number"  # .c/.l; checked where comparisons demand integers
        t = kb.attr_type(e)
        return t.kind if t else None
    assert isinstance(e, ast.BinArith)
    lk = _arith_kind(kb, e.left, d, where, term_ctx)
    rk = _arith_kind(kb, e.right, d, where, term_ctx)
    for side in (lk, rk):
        if side not in (None, "number"):
            d.add(f"{where}: arithmetic over {side} operands", e.loc, "type-mismatch")
            return None
    return "number"


def _check_arith_refs(kb: ast.KnowledgeBase, e: ast.ArithExpr, d: Diags):
    for node in ast.walk_arith(e):
        if isinstance(node, ast.Ref):
            if kb.temporal_kind(node.obj) is None and kb.attr_decl(node) is None:
                if kb.object_named(node.obj) is None:
                    d.add(f"unknown object {node.obj!r}", node.loc, "unknown-ref")
                else:
                    d.add(f"unknown attribute {node.key!r}", node.loc, "unknown-ref")


def _is_temporal_ref(kb: ast.KnowledgeBase, e: ast.ArithExpr) -> bool:
    return isinstance(e, ast.Ref) and kb.temporal_kind(e.obj) is not None


def _check_comparison(kb: ast.KnowledgeBase, node: ast.Comparison, d: Diags, static_only: bool, where: str):
    lt = _is_temporal_ref(kb, node.left)
    rt = _is_temporal_ref(kb, node.right)
    if lt or rt:
        if static_only:
            d.add(f"{where}: temporal attribute not allowed here", node.loc, "temporal-in-static")
            return
        if lt and rt:
            d.add("temporal attributes compare against integers only", node.loc, "bad-temporal-cmp")
            return
        ref = node.left if lt else node.right
        other = node.right if lt else node.left
        _ref_kind(kb, ref, d, static_only, where)  # validates .c/.l
        if not (isinstance(other, ast.Num) and float(other.value).is_integer()):
            d.add(
                f"temporal attribute {ref.key} compares against an integer literal only",
                node.loc,
                "bad-temporal-cmp",
            )
        return

    kinds = []
    for side in (node.left, node.right):
        for sub in ast.walk_arith(side):
            if isinstance(sub, ast.Ref):
                _ref_kind(kb, sub, d, static_only, where)
        kinds.append(_arith_kind(kb, side, d, where))
    lk, rk = kinds
    if lk is None or rk is None:
        return
    if lk == rk:
        if lk in ("string", "boolean") and node.op not in ("=", "!="):
            d.add(f"{lk} values admit only = / != comparisons", node.loc, "type-mismatch")
        return
    pair = {lk, rk}
    if pair == {"number", "string"}:
        # a linguistic term versus a numeric attribute: the term must exist
        # in the attribute's type
        str_side = node.left if lk == "string" else node.right
        num_side = node.right if lk == "string" else node.left
        term = str_side.value if isinstance(str_side, ast.Str) else None
        ref = num_side if isinstance(num_side, ast.Ref) else None
        if term is not None and ref is not None:
            if term not in kb.term_table_for(ref):
                d.add(f"unknown term {term!r} for {ref.key}", node.loc, "unknown-term")
            return
        d.add("string compared with number", node.loc, "type-mismatch")
        return
    d.add(f"cannot compare {lk} with {rk}", node.loc, "type-mismatch")
