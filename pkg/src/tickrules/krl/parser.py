"""Recursive-descent parser for KRL.

The grammar ships in docs/krl-grammar.ebnf.  Allen connective letters are not
reserved words; they are recognized contextually in ``IDENT conn IDENT``
position, so attributes and objects may freely use those names.
"""
from __future__ import annotations

from ..values import MembershipFunction, triangle, trapezoid
from . import ast
from .lexer import KrlSyntaxError, Token, parse_number, tokenize, unquote

_CMP_OPS = (">", "<", "=", ">=", "<=", "!=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # --- primitives ---------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.value == value and tok.kind in ("OP", "IDENT")

    def accept(self, value: str) -> Token | None:
        if self.at(value):
            return self.advance()
        return None

    def expect(self, value: str) -> Token:
        if self.at(value):
            return self.advance()
        tok = self.peek()
        raise KrlSyntaxError(f"unexpected {tok.value!r}" if tok.kind != "EOF" else "unexpected end of input",
                             tok.line, tok.col, expected=[repr(value)])

    def ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise KrlSyntaxError(f"unexpected {tok.value!r}" if tok.kind != "EOF" else "unexpected end of input",
                                 tok.line, tok.col, expected=[what])
        return self.advance()

    def number(self) -> tuple[float, Token]:
        neg = self.accept("-")
        tok = self.peek()
        if tok.kind != "NUMBER":
            raise KrlSyntaxError(f"unexpected {tok.value!r}", tok.line, tok.col, expected=["number"])
        self.advance()
        val = parse_number(tok.value)
        return (-val if neg else val), tok

    def loc(self, tok: Token) -> ast.Loc:
        return ast.Loc(tok.line, tok.col)

    # --- top level ----------------------------------------------------

    def parse_kb(self) -> ast.KnowledgeBase:
        types: list[ast.TypeDecl] = []
        objects: list[ast.ObjectDecl] = []
        events: list[ast.EventDecl] = []
        intervals: list[ast.IntervalDecl] = []
        rules: list[ast.Rule] = []
        config: ast.ConfigDecl | None = None
        while self.peek().kind != "EOF":
            tok = self.peek()
            if self.accept("type"):
                types.append(self.type_decl())
            elif self.accept("object"):
                objects.append(self.object_decl())
            elif self.accept("event"):
                events.append(self.event_decl())
            elif self.accept("interval"):
                intervals.append(self.interval_decl())
            elif self.accept("rule"):
                rules.append(self.rule_decl())
            elif self.accept("config"):
                if config is not None:
                    raise KrlSyntaxError("duplicate config block", tok.line, tok.col)
                config = self.config_decl(tok)
            else:
                raise KrlSyntaxError(
                    f"unexpected {tok.value!r}", tok.line, tok.col,
                    expected=["'type'", "'object'", "'event'", "'interval'", "'rule'", "'config'"],
                )
        return ast.KnowledgeBase(
            tuple(types), tuple(objects), tuple(events), tuple(intervals), tuple(rules), config
        )

    # --- declarations ---------------------------------------------------

    def type_decl(self) -> ast.TypeDecl:
        name = self.ident("type name")
        self.expect("{")
        kind = None
        rng = None
        values = None
        terms: list[tuple[str, MembershipFunction]] = []
        while not self.accept("}"):
            key = self.peek()
            if self.accept("kind"):
                self.expect(":")
                k = self.ident("'number', 'string' or 'boolean'")
                if k.value not in ("number", "string", "boolean"):
                    raise KrlSyntaxError(f"unknown kind {k.value!r}", k.line, k.col,
                                         expected=["'number'", "'string'", "'boolean'"])
                kind = k.value
                self.expect(";")
            elif self.accept("range"):
                self.expect(":")
                self.expect("[")
                lo, _ = self.number()
                self.expect(",")
                hi, _ = self.number()
                self.expect("]")
                self.expect(";")
                rng = (lo, hi)
            elif self.accept("values"):
                self.expect(":")
                self.expect("{")
                vals: list[object] = []
                while True:
                    vals.append(self.domain_value())
                    if not self.accept(","):
                        break
                self.expect("}")
                self.expect(";")
                values = tuple(vals)
            elif self.accept("term"):
                tname = self.ident("term name")
                self.expect(":")
                terms.append((tname.value, self.mf_spec()))
                self.expect(";")
            else:
                raise KrlSyntaxError(f"unexpected {key.value!r}", key.line, key.col,
                                     expected=["'kind'", "'range'", "'values'", "'term'", "'}'"])
        if kind is None:
            raise KrlSyntaxError(f"type {name.value!r} lacks a kind", name.line, name.col)
        return ast.TypeDecl(name.value, kind, rng, values, tuple(terms), loc=self.loc(name))

    def domain_value(self) -> object:
        tok = self.peek()
        if tok.kind == "STRING":
            self.advance()
            return unquote(tok.value)
        if self.accept("true"):
            return True
        if self.accept("false"):
            return False
        val, _ = self.number()
        return val

    def mf_spec(self) -> MembershipFunction:
        tok = self.peek()
        if self.accept("triangle"):
            self.expect("(")
            a, _ = self.number()
            self.expect(",")
            b, _ = self.number()
            self.expect(",")
            c, _ = self.number()
            self.expect(")")
            try:
                return triangle(a, b, c)
            except ValueError as exc:
                raise KrlSyntaxError(str(exc), tok.line, tok.col) from exc
        if self.accept("trapezoid"):
            self.expect("(")
            nums = [self.number()[0]]
            for _ in range(3):
                self.expect(",")
                nums.append(self.number()[0])
            self.expect(")")
            try:
                return trapezoid(*nums)
            except ValueError as exc:
                raise KrlSyntaxError(str(exc), tok.line, tok.col) from exc
        if self.accept("points"):
            self.expect("(")
            pts: list[tuple[float, float]] = []
            while True:
                self.expect("(")
                x, _ = self.number()
                self.expect(",")
                m, _ = self.number()
                self.expect(")")
                pts.append((x, m))
                if not self.accept(","):
                    break
            self.expect(")")
            try:
                return MembershipFunction(tuple(pts))
            except ValueError as exc:
                raise KrlSyntaxError(str(exc), tok.line, tok.col) from exc
        raise KrlSyntaxError(f"unexpected {tok.value!r}", tok.line, tok.col,
                             expected=["'triangle'", "'trapezoid'", "'points'"])

    def object_decl(self) -> ast.ObjectDecl:
        name = self.ident("object name")
        self.expect("{")
        attrs: list[ast.AttrDecl] = []
        while not self.accept("}"):
            self.expect("attr")
            aname = self.ident("attribute name")
            self.expect(":")
            tname = self.ident("type name")
            control = bool(self.accept("control"))
            self.expect(";")
            attrs.append(ast.AttrDecl(aname.value, tname.value, control, loc=self.loc(aname)))
        return ast.ObjectDecl(name.value, tuple(attrs), loc=self.loc(name))

    def event_decl(self) -> ast.EventDecl:
        name = self.ident("event name")
        self.expect("{")
        self.expect("origin")
        self.expect(":")
        cond = self.expr()
        self.expect(";")
        self.expect("}")
        return ast.EventDecl(name.value, cond, loc=self.loc(name))

    def interval_decl(self) -> ast.IntervalDecl:
        name = self.ident("interval name")
        self.expect("{")
        open_cond = close_cond = None
        for _ in range(2):
            if self.accept("open"):
                self.expect(":")
                open_cond = self.expr()
                self.expect(";")
            elif self.accept("close"):
                self.expect(":")
                close_cond = self.expr()
                self.expect(";")
        self.expect("}")
        if open_cond is None or close_cond is None:
            raise KrlSyntaxError(f"interval {name.value!r} needs 'open' and 'close' conditions",
                                 name.line, name.col)
        return ast.IntervalDecl(name.value, open_cond, close_cond, loc=self.loc(name))

    def rule_decl(self) -> ast.Rule:
        name = self.ident("rule name")
        self.expect("{")
        kind = ast.CONVENTIONAL
        lhs = None
        actions: tuple[ast.Action, ...] | None = None
        cf = 1.0
        while not self.accept("}"):
            tok = self.peek()
            if self.accept("kind"):
                self.expect(":")
                kind = self.rule_kind()
                self.expect(";")
            elif self.accept("if"):
                self.expect(":")
                lhs = self.expr()
                self.expect(";")
            elif self.accept("then"):
                self.expect(":")
                acts = [self.action()]
                while self.accept(","):
                    acts.append(self.action())
                self.expect(";")
                actions = tuple(acts)
            elif self.accept("cf"):
                self.expect(":")
                cf, _ = self.number()
                self.expect(";")
            else:
                raise KrlSyntaxError(f"unexpected {tok.value!r}", tok.line, tok.col,
                                     expected=["'kind'", "'if'", "'then'", "'cf'", "'}'"])
        if lhs is None:
            raise KrlSyntaxError(f"rule {name.value!r} lacks an 'if' clause", name.line, name.col)
        if actions is None:
            raise KrlSyntaxError(f"rule {name.value!r} lacks a 'then' clause", name.line, name.col)
        return ast.Rule(name.value, kind, lhs, actions, cf, loc=self.loc(name))

    def rule_kind(self) -> ast.RuleKind:
        tok = self.peek()
        if self.accept("conventional"):
            return ast.CONVENTIONAL
        if self.accept("periodic"):
            self.expect("(")
            period, ptok = self.number()
            self.expect(")")
            if not float(period).is_integer() or period < 1:
                raise KrlSyntaxError(f"periodic period must be a positive integer, got {period}",
                                     ptok.line, ptok.col)
            return ast.RuleKind("periodic", period=int(period))
        if self.accept("response"):
            self.expect("(")
            trigger = self.ident("event name")
            self.expect(")")
            return ast.RuleKind("response", trigger=trigger.value)
        raise KrlSyntaxError(f"unexpected {tok.value!r}", tok.line, tok.col,
                             expected=["'conventional'", "'periodic'", "'response'"])

    def action(self) -> ast.Action:
        obj = self.ident("attribute reference")
        self.expect(".")
        attr = self.ident("attribute name")
        target = ast.Ref(obj.value, attr.value, loc=self.loc(obj))
        self.expect(":=")
        expr = self.additive()
        cf = 1.0
        if self.accept("cf"):
            cf, _ = self.number()
        return ast.Action(target, expr, cf, loc=self.loc(obj))

    def config_decl(self, tok: Token) -> ast.ConfigDecl:
        self.expect("{")
        entries: list[tuple[str, object]] = []
        while not self.accept("}"):
            key = self.ident("config key")
            self.expect(":")
            val_tok = self.peek()
            if val_tok.kind == "STRING":
                self.advance()
                value: object = unquote(val_tok.value)
            elif self.accept("true"):
                value = True
            elif self.accept("false"):
                value = False
            elif val_tok.kind == "IDENT":
                self.advance()
                value = val_tok.value
            else:
                value, _ = self.number()
            self.expect(";")
            entries.append((key.value, value))
        return ast.ConfigDecl(tuple(entries), loc=self.loc(tok))

    # --- expressions ----------------------------------------------------

    def expr(self) -> ast.Expr:
        return self.or_expr()

    def or_expr(self) -> ast.Expr:
        tok = self.peek()
        operands = [self.and_expr()]
        while self.accept("v"):
            operands.append(self.and_expr())
        if len(operands) == 1:
            return operands[0]
        return ast.BoolOp("or", tuple(operands), loc=self.loc(tok))

    def and_expr(self) -> ast.Expr:
        tok = self.peek()
        operands = [self.unary()]
        while self.accept("&"):
            operands.append(self.unary())
        if len(operands) == 1:
            return operands[0]
        return ast.BoolOp("and", tuple(operands), loc=self.loc(tok))

    def unary(self) -> ast.Expr:
        tok = self.peek()
        if self.accept("~"):
            return ast.Not(self.unary(), loc=self.loc(tok))
        return self.atom()

    def atom(self) -> ast.Expr:
        tok = self.peek()
        if self.at("("):
            # parenthesized boolean group; arithmetic parens live inside
            # comparisons (`x.a + 1 > 2` needs none at the comparison level)
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if self.accept("true"):
            return ast.Bool(True, loc=self.loc(tok))
        if self.accept("false"):
            return ast.Bool(False, loc=self.loc(tok))
        if tok.kind == "IDENT" and self.peek(1).value != "." and self.peek(1).kind == "IDENT":
            # `X r Y` with X, Y temporal objects and r an Allen connective
            left = self.advance()
            rel = self.advance()
            if rel.value not in ast.ALLEN_CONNECTIVES:
                raise KrlSyntaxError(
                    f"{rel.value!r} is not an Allen connective", rel.line, rel.col,
                    expected=[f"one of {'/'.join(ast.ALLEN_CONNECTIVES)}"],
                )
            right = self.ident("temporal object name")
            return ast.AllenAtom(left.value, rel.value, right.value, loc=self.loc(left))
        if tok.kind == "IDENT" and self.peek(1).value != ".":
            # bare temporal variable as a formula
            self.advance()
            return ast.TemporalVar(tok.value, loc=self.loc(tok))
        left = self.additive()
        op_tok = self.peek()
        if op_tok.value in _CMP_OPS and op_tok.kind == "OP":
            self.advance()
            right = self.additive()
            return ast.Comparison(op_tok.value, left, right, loc=self.loc(op_tok))
        if isinstance(left, ast.Ref):
            return ast.BoolRef(left, loc=left.loc)
        raise KrlSyntaxError(
            f"unexpected {op_tok.value!r}" if op_tok.kind != "EOF" else "unexpected end of input",
            op_tok.line, op_tok.col, expected=["comparison operator"],
        )

    def additive(self) -> ast.ArithExpr:
        left = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.value in ("+", "-"):
                self.advance()
                left = ast.BinArith(tok.value, left, self.term(), loc=self.loc(tok))
            else:
                return left

    def term(self) -> ast.ArithExpr:
        left = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.value in ("*", "/"):
                self.advance()
                left = ast.BinArith(tok.value, left, self.factor(), loc=self.loc(tok))
            else:
                return left

    def factor(self) -> ast.ArithExpr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return ast.Num(parse_number(tok.value), loc=self.loc(tok))
        if tok.kind == "STRING":
            self.advance()
            return ast.Str(unquote(tok.value), loc=self.loc(tok))
        if self.accept("true"):
            return ast.Bool(True, loc=self.loc(tok))
        if self.accept("false"):
            return ast.Bool(False, loc=self.loc(tok))
        if self.accept("-"):
            inner = self.factor()
            if isinstance(inner, ast.Num):
                return ast.Num(-inner.value, loc=self.loc(tok))
            return ast.BinArith("-", ast.Num(0, loc=self.loc(tok)), inner, loc=self.loc(tok))
        if self.accept("inexact"):
            self.expect("(")
            c, _ = self.number()
            self.expect(",")
            h, _ = self.number()
            self.expect(")")
            return ast.InexactLit(c, h, loc=self.loc(tok))
        if self.accept("("):
            inner = self.additive()
            self.expect(")")
            return inner
        if tok.kind == "IDENT":
            self.advance()
            self.expect(".")
            attr = self.ident("attribute name")
            return ast.Ref(tok.value, attr.value, loc=self.loc(tok))
        raise KrlSyntaxError(
            f"unexpected {tok.value!r}" if tok.kind != "EOF" else "unexpected end of input",
            tok.line, tok.col, expected=["number", "string", "reference", "'('"],
        )


def parse_text(source_text: str) -> ast.KnowledgeBase:
    """Parse KRL text into a raw (unvalidated, unnormalized) KnowledgeBase."""
    return _Parser(tokenize(source_text)).parse_kb()
