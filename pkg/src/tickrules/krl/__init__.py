"""KRL: parse, validate, normalize and print knowledge bases."""
from __future__ import annotations

from . import ast
from .ast import KnowledgeBase
from .lexer import KrlSyntaxError
from .normalize import normalize_kb, normalize_lhs
from .parser import parse_text
from .printer import print_expr, print_kb
from .validate import Diagnostic, validate_kb


class KrlValidationError(Exception):
    """Raised by parse_kb when a structurally valid KB breaks invariants."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


def parse_kb(source_text: str) -> KnowledgeBase:
    """Parse KRL text into a validated, normalized KnowledgeBase.

    Raises KrlSyntaxError on malformed text (with position and expected
    tokens) and KrlValidationError when any invariant fails (duplicate
    names, unresolved references, ill-typed temporal relations, ...).
    """
    kb = normalize_kb(parse_text(source_text))
    diagnostics = validate_kb(kb)
    if diagnostics:
        raise KrlValidationError(diagnostics)
    return kb


__all__ = [
    "ast",
    "KnowledgeBase",
    "KrlSyntaxError",
    "KrlValidationError",
    "Diagnostic",
    "parse_kb",
    "parse_text",
    "validate_kb",
    "normalize_kb",
    "normalize_lhs",
    "print_kb",
    "print_expr",
]
