"""KRL parsing, validation, normalization and round-tripping."""
import itertools

import pytest

from tickrules.krl import (
    KrlSyntaxError,
    KrlValidationError,
    normalize_lhs,
    parse_kb,
    parse_text,
    print_expr,
    print_kb,
    validate_kb,
)
from tickrules.krl import ast
from tickrules.krl.normalize import normalize_kb

DEMO = """
# minimal thermal monitor
type celsius {
  kind: number;
  range: [0, 1000];
  term low: triangle(0, 50, 150);
  term high: trapezoid(150, 300, 1000, 1000);
}

object x {
  attr t: celsius;
  attr armed: boolean;
}
object y {
  attr alarm: boolean control;
  attr note: string;
}

event E { origin: x.t > 90; }
event F { origin: x.t < 10; }
interval I { open: x.t > 50; close: x.t < 40; }

rule r1 {
  if: x.t > 90 & x.armed;
  then: y.alarm := true cf 0.9;
  cf: 0.95;
}
rule r2 {
  kind: periodic(5);
  if: x.t > 0;
  then: y.note := "checked";
}
rule r3 {
  kind: response(E);
  if: E.c > 0 & I.l > 2;
  then: y.note := "hot while pressurized";
}
rule r4 {
  if: E b F v ~(x.t = 42);
  then: y.note := "ordering";
}
"""


class TestParse:
    def test_minimal_event(self):
        kb = parse_kb("object x { attr t: number; }\nevent E { origin: x.t > 90; }")
        assert kb.events[0].name == "E"
        cond = kb.events[0].origin_condition
        assert isinstance(cond, ast.Comparison)
        assert cond.left == ast.Ref("x", "t")

    def test_demo_parses(self):
        kb = parse_kb(DEMO)
        assert [r.name for r in kb.rules] == ["r1", "r2", "r3", "r4"]
        assert kb.rules[1].kind.period == 5
        assert kb.rules[2].kind.trigger == "E"
        assert kb.type_named("celsius").range == (0, 1000)

    def test_event_relation_between_events_ok(self):
        kb = parse_kb(
            "object x { attr t: number; }\n"
            "event E { origin: x.t > 1; }\nevent F { origin: x.t > 2; }\n"
            "rule r { if: E b F; then: x.t := 0; }"
        )
        atom = kb.rules[0].lhs
        assert atom == ast.AllenAtom("E", "b", "F")

    def test_meets_between_events_rejected(self):
        with pytest.raises(KrlValidationError) as err:
            parse_kb(
                "object x { attr t: number; }\n"
                "event E { origin: x.t > 1; }\nevent F { origin: x.t > 2; }\n"
                "rule r { if: E m F; then: x.t := 0; }"
            )
        assert "not allowed between event and event" in str(err.value)

    def test_syntax_error_has_position_and_expected(self):
        with pytest.raises(KrlSyntaxError) as err:
            parse_kb("object x { attr t number; }")
        assert err.value.line == 1
        assert err.value.expected

    def test_duplicate_rule_name(self):
        text = (
            "object x { attr t: number; }\n"
            "rule r1 { if: x.t > 0; then: x.t := 1; }\n"
            "rule r1 { if: x.t > 1; then: x.t := 2; }"
        )
        with pytest.raises(KrlValidationError) as err:
            parse_kb(text)
        assert "duplicate" in str(err.value)

    def test_unresolved_reference(self):
        with pytest.raises(KrlValidationError) as err:
            parse_kb("object x { attr t: number; }\nrule r { if: x.q > 0; then: x.t := 1; }")
        assert "unknown attribute" in str(err.value)

    def test_comment_and_unicode(self):
        kb = parse_kb('object x { attr t: number; } # trailing comment\nrule r { if: x.t = 1; then: x.t := 2; } # c')
        assert kb.rules[0].name == "r"


class TestValidateDiagnostics:
    def test_unknown_trigger(self):
        kb = parse_text("object x { attr t: number; }\nrule r { kind: response(Ghost); if: x.t > 0; then: x.t := 1; }")
        diags = validate_kb(kb)
        assert len(diags) == 1
        assert "unknown trigger" in diags[0].message.lower()

    def test_temporal_count_comparison_ok(self):
        kb = parse_kb(
            "object x { attr t: number; }\nevent E { origin: x.t > 1; }\n"
            "rule r { if: E.c > 3; then: x.t := 0; }"
        )
        assert not validate_kb(kb)

    def test_two_rules_same_name_single_diag(self):
        kb = parse_text(
            "object x { attr t: number; }\n"
            "rule r1 { if: x.t > 0; then: x.t := 1; }\n"
            "rule r1 { if: x.t > 1; then: x.t := 2; }"
        )
        diags = validate_kb(kb)
        assert len(diags) == 1
        assert diags[0].code == "duplicate-name"

    def test_temporal_in_origin_condition(self):
        kb = parse_text(
            "object x { attr t: number; }\nevent E { origin: x.t > 1; }\n"
            "event F { origin: E.c > 0; }"
        )
        assert any(d.code == "temporal-in-static" for d in validate_kb(kb))

    def test_unknown_term_diagnosed(self):
        kb = parse_text(
            "object x { attr t: number; }\n"
            'rule r { if: x.t = "sideways"; then: x.t := 0; }'
        )
        assert any(d.code == "unknown-term" for d in validate_kb(kb))

    def test_temporal_vs_non_integer_rejected(self):
        kb = parse_text(
            "object x { attr t: number; }\nevent E { origin: x.t > 1; }\n"
            "rule r { if: E.c > 1.5; then: x.t := 0; }"
        )
        assert any(d.code == "bad-temporal-cmp" for d in validate_kb(kb))

    def test_config_keys(self):
        kb = parse_text("object x { attr t: number; }\nconfig { theta_fire: 0.7; nonsense: 3; }")
        diags = validate_kb(kb)
        assert len(diags) == 1
        assert diags[0].code == "bad-config"


class TestGrammarGate:
    """All 16 allowed (operand-kind, connective) combinations accept; the
    other 16 reject."""

    ALLOWED = {
        ("interval", "interval"): set("bamosdef"),
        ("event", "event"): {"b", "a", "e"},
        ("event", "interval"): {"b", "a", "s", "d", "f"},
        ("interval", "event"): set(),
    }

    def kb_text(self, lkind, rkind, rel):
        decls = ["object x { attr t: number; }"]
        decls.append("event E { origin: x.t > 1; }" if lkind == "event" else "interval E { open: x.t > 1; close: x.t < 0; }")
        decls.append("event F { origin: x.t > 2; }" if rkind == "event" else "interval F { open: x.t > 2; close: x.t < 0; }")
        decls.append(f"rule r {{ if: E {rel} F; then: x.t := 0; }}")
        return "\n".join(decls)

    def test_exhaustive_grammar_gate(self):
        accepted = rejected = 0
        for lkind, rkind in itertools.product(("event", "interval"), repeat=2):
            for rel in "bamosdef":
                text = self.kb_text(lkind, rkind, rel)
                if rel in self.ALLOWED[(lkind, rkind)]:
                    parse_kb(text)
                    accepted += 1
                else:
                    with pytest.raises(KrlValidationError):
                        parse_kb(text)
                    rejected += 1
        assert accepted == 16
        assert rejected == 16


class TestNormalize:
    def ref_atom(self, name):
        return ast.Comparison("=", ast.Ref("x", name), ast.Num(1))

    def test_four_way_conjunction(self):
        a, b, c, d = (self.ref_atom(n) for n in "abcd")
        out = normalize_lhs(ast.BoolOp("and", (a, b, c, d)))
        assert out == ast.BoolOp("and", (a, ast.BoolOp("and", (b, ast.BoolOp("and", (c, d))))))

    def test_single_atom_identity(self):
        a = self.ref_atom("a")
        assert normalize_lhs(a) is a

    def test_mixed_nesting(self):
        a, b, c = (self.ref_atom(n) for n in "abc")
        out = normalize_lhs(ast.BoolOp("and", (a, ast.BoolOp("or", (b, c)))))
        assert out == ast.BoolOp("and", (a, ast.BoolOp("or", (b, c))))

    def test_atom_order_preserved(self):
        atoms = [self.ref_atom(n) for n in "abcde"]
        out = normalize_lhs(ast.BoolOp("and", tuple(atoms)))
        assert ast.atoms_of(out) == atoms

    def test_parenthesized_same_op_flattened(self):
        a, b, c = (self.ref_atom(n) for n in "abc")
        left_nested = ast.BoolOp("and", (ast.BoolOp("and", (a, b)), c))
        assert normalize_lhs(left_nested) == normalize_lhs(ast.BoolOp("and", (a, b, c)))


class TestRoundTrip:
    def test_parse_print_parse_fixpoint(self):
        kb1 = parse_kb(DEMO)
        text = print_kb(kb1)
        kb2 = parse_kb(text)
        assert kb1 == kb2
        assert print_kb(kb2) == text

    def test_expression_precedence_survives(self):
        kb = parse_kb(
            "object x { attr a: number; attr b: number; }\n"
            "rule r { if: x.a > 1 & (x.b < 2 v x.a = 3) & ~(x.b > 4); then: x.a := x.b * (x.a + 1); }"
        )
        text = print_kb(kb)
        assert parse_kb(text) == kb

    def test_normalized_form_is_printable(self):
        kb = parse_kb(
            "object x { attr a: number; }\n"
            "rule r { if: x.a > 1 & x.a > 2 & x.a > 3 & x.a > 4; then: x.a := 0; }"
        )
        lhs = kb.rules[0].lhs
        assert isinstance(lhs, ast.BoolOp) and len(lhs.operands) == 2
        assert print_expr(lhs) == "x.a > 1 & x.a > 2 & x.a > 3 & x.a > 4"


class TestRuleKindEdges:
    def test_zero_period_rejected_at_parse(self):
        with pytest.raises(KrlSyntaxError, match="positive integer"):
            parse_kb(
                "object x { attr t: number; }\n"
                "rule r { kind: periodic(0); if: x.t > 0; then: x.t := 1; }"
            )

    def test_fractional_period_rejected(self):
        with pytest.raises(KrlSyntaxError):
            parse_kb(
                "object x { attr t: number; }\n"
                "rule r { kind: periodic(2.5); if: x.t > 0; then: x.t := 1; }"
            )
