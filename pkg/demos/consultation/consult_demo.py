"""Walkthrough: backward-chaining triage consultation, scripted.

Run from the repository root:

    python3 demos/consultation/consult_demo.py

The engine works backward from m.fault.  Whenever it gets stuck on unknown
leaf observations it asks for the most informative one first: frequency of
use across rules, then domain size, then position in the antecedent, then
membership in mutually exclusive evidence.  A decisively false conjunct
rejects a rule without asking for the rest of its parameters.
"""
from pathlib import Path

from tickrules import Value, parse_kb
from tickrules.consult import Consultation

HERE = Path(__file__).parent

kb = parse_kb((HERE / "triage.krl").read_text())

# A technician's answers: the machine runs warm (70), the housing is sealed,
# and the breaker has tripped.
answers = {"m.temp": Value(70.0), "m.sealed": Value(True), "m.breaker_trip": Value(True)}

consult = Consultation(kb, "m.fault")
while not consult.done:
    question = consult.pending
    answer = answers.get(question.ref)
    shown = "unknown" if answer is None else answer.payload
    print(f"Q{len(consult.question_log)}: {question.ref}  domain={question.domain}")
    print(f"    -> {shown}")
    consult.answer(answer)

# m.temp = 70 kills the overheat rule (70 <= 90) before m.vibration is ever
# asked; sealed = true kills the leak rule on its negated first conjunct;
# the electrical rule then needs only the breaker.
if consult.result is None:
    print("\nverdict: undetermined")
else:
    print(f"\nverdict: m.fault = {consult.result.payload!r} "
          f"(certainty {consult.result.certainty:g})")
print(f"questions asked: {[q.ref for q in consult.question_log]}")
print("never asked: m.vibration, m.oil_spots (pruned with their rules)")
