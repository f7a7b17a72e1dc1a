/** Consultation flow: poll the pending question, submit typed answers,
 * finish with the goal value and certainty. Pure state machine around the
 * API client so contract tests can drive it against a recorded service. */
import { ApiClient, ApiError } from "./api.js";
import type { ConsultOutcome, PendingQuestion, ValueLiteral } from "./api.js";

export interface AnsweredQuestion {
  ref: string;
  answer: ValueLiteral | null; // null = unknown
}

export type ConsultationPhase =
  | { phase: "asking"; question: PendingQuestion }
  | { phase: "running" } // inference busy, no pending question yet
  | { phase: "done"; result: ConsultOutcome }
  | { phase: "stale" } // session disappeared (404)
  | { phase: "error"; message: string };

export class ConsultationFlow {
  history: AnsweredQuestion[] = [];
  state: ConsultationPhase = { phase: "running" };

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  /** Poll for the next pending question (or completion). */
  async refresh(): Promise<ConsultationPhase> {
    try {
      const out = await this.api.question(this.sessionId);
      if (out.question !== null) {
        this.state = { phase: "asking", question: out.question };
      } else if (out.done && out.result) {
        this.state = { phase: "done", result: out.result };
      } else {
        this.state = { phase: "running" };
      }
    } catch (err) {
      this.state = this.failure(err);
    }
    return this.state;
  }

  /** Submit the answer for the currently pending question. */
  async submit(answer: ValueLiteral | null): Promise<ConsultationPhase> {
    if (this.state.phase !== "asking") {
      throw new Error("no pending question");
    }
    const ref = this.state.question.ref;
    try {
      const out = await this.api.answer(this.sessionId, answer);
      this.history.push({ ref, answer });
      if (out.done && out.result) {
        this.state = { phase: "done", result: out.result };
      } else {
        await this.refresh();
      }
    } catch (err) {
      this.state = this.failure(err);
    }
    return this.state;
  }

  /** Drive the whole consultation with a scripted answer source. */
  async runScript(
    answers: Record<string, ValueLiteral | null>,
  ): Promise<ConsultOutcome> {
    await this.refresh();
    while (this.state.phase === "asking") {
      const scripted = answers[this.state.question.ref];
      await this.submit(scripted === undefined ? null : scripted);
    }
    if (this.state.phase !== "done") {
      throw new Error(`consultation ended in phase ${this.state.phase}`);
    }
    return this.state.result;
  }

  private failure(err: unknown): ConsultationPhase {
    if (err instanceof ApiError && err.staleSession) {
      return { phase: "stale" };
    }
    return { phase: "error", message: err instanceof Error ? err.message : String(err) };
  }
}

/** The CLI prints `result: <goal> = <json> (cf <x>)` or `undetermined`;
 * reproducing that line verbatim is what the parity check compares. */
export function resultLine(goal: string, result: ConsultOutcome): string {
  if (!result.determined) {
    return "undetermined";
  }
  const cf = Number((result.cf ?? 1).toPrecision(6));
  return `result: ${goal} = ${JSON.stringify(result.value)} (cf ${cf})`;
}
