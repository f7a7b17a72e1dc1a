"""Tokenizer for KRL text. `#` starts a line comment."""
from __future__ import annotations

import re
from dataclasses import dataclass


class KrlSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: list[str] | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected or []
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{suffix}")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # NUMBER | STRING | IDENT | OP | EOF
    value: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|>=|<=|!=|[{}()\[\]:;,.&~><=+\-*/])
    """,
    re.VERBOSE,
)

RESERVED = frozenset(
    """type object event interval rule config attr term kind range values
    origin open close if then cf true false periodic response conventional
    inexact triangle trapezoid points control v unknown""".split()
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise KrlSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        pos = m.end()
        group = m.lastgroup
        value = m.group()
        if group == "nl":
            line += 1
            col = 1
            continue
        if group in ("ws", "comment"):
            col += len(value)
            continue
        if group == "number":
            tokens.append(Token("NUMBER", value, line, col))
        elif group == "string":
            tokens.append(Token("STRING", value, line, col))
        elif group == "ident":
            # `v` is the disjunction operator, reserved outright
            tokens.append(Token("OP" if value == "v" else "IDENT", value, line, col))
        else:
            tokens.append(Token("OP", value, line, col))
        col += len(value)
    tokens.append(Token("EOF", "", line, col))
    return tokens


def unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def parse_number(raw: str):
    if re.fullmatch(r"\d+", raw):
        return int(raw)
    return float(raw)
