/** Input-widget selection for a pending question, inferred from the
 * declared type carried in the question's domain. Every widget also offers
 * "unknown". */
import type { PendingQuestion, QuestionDomain, ValueLiteral } from "./api.js";

export type WidgetKind = "choice" | "number" | "text";

export interface WidgetSpec {
  kind: WidgetKind;
  /** enumerated options for choice widgets, rendered in order */
  choices?: (string | number | boolean)[];
  /** numeric bounds when declared */
  range?: [number, number];
  /** linguistic terms offered as shortcuts beside a numeric field */
  terms?: string[];
}

export function widgetFor(domain: QuestionDomain): WidgetSpec {
  if (domain.choices && domain.choices.length > 0) {
    return { kind: "choice", choices: domain.choices };
  }
  if (domain.kind === "number") {
    return { kind: "number", range: domain.range, terms: domain.terms };
  }
  return { kind: "text" };
}

/** Parse what the user typed/picked into a value literal for the wire. */
export function answerFromInput(question: PendingQuestion, raw: string): ValueLiteral | null {
  const text = raw.trim();
  if (text === "" || text.toLowerCase() === "unknown") {
    return null;
  }
  const domain = question.domain;
  if (domain.kind === "boolean") {
    return text === "true";
  }
  if (domain.kind === "number") {
    const num = Number(text);
    if (!Number.isNaN(num)) {
      return num;
    }
    if (domain.terms && domain.terms.includes(text)) {
      return text; // a linguistic term is a legal answer for a fuzzy variable
    }
    throw new Error(`${text} is not a number or known term`);
  }
  return text;
}
