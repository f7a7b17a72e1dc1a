/** HTML renderers. Pure string builders so contract tests can assert on
 * the rendered output without a DOM; main.ts mounts them via innerHTML. */
import { formatCf, formatLiteral } from "./api.js";
import type { ConflictRow, ConsultOutcome, PendingQuestion, TickRecordPayload, WmRow } from "./api.js";
import type { AnsweredQuestion } from "./consultation.js";
import type { TimelineLayout } from "./timeline.js";
import { widgetFor } from "./widgets.js";

export function esc(text: unknown): string {
  return String(text)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// --- consultation panel -----------------------------------------------------

export function renderQuestion(question: PendingQuestion): string {
  const widget = widgetFor(question.domain);
  const parts = [`<div class="question" data-ref="${esc(question.ref)}">`];
  parts.push(`<div class="question-ref">${esc(question.ref)}</div>`);
  if (widget.kind === "choice") {
    parts.push(`<div class="choices">`);
    for (const choice of widget.choices ?? []) {
      parts.push(
        `<button class="choice" data-answer="${esc(JSON.stringify(choice))}">${esc(choice)}</button>`,
      );
    }
    parts.push(`</div>`);
  } else {
    const bounds = widget.range ? ` min="${widget.range[0]}" max="${widget.range[1]}"` : "";
    const type = widget.kind === "number" ? "number" : "text";
    const hint = widget.range ? `in [${widget.range[0]}, ${widget.range[1]}]` : "";
    parts.push(
      `<input class="answer-input" type="${type}"${bounds} placeholder="${esc(hint)}">` +
        `<button class="submit">answer</button>`,
    );
    for (const term of widget.terms ?? []) {
      parts.push(`<button class="choice term" data-answer="${esc(JSON.stringify(term))}">${esc(term)}</button>`);
    }
  }
  parts.push(`<button class="unknown">unknown</button>`);
  parts.push(`</div>`);
  return parts.join("");
}

export function renderHistory(history: AnsweredQuestion[]): string {
  const rows = history
    .map(
      (item) =>
        `<tr><td>${esc(item.ref)}</td><td>${item.answer === null ? "unknown" : esc(formatLiteral(item.answer))}</td></tr>`,
    )
    .join("");
  return `<table class="history"><thead><tr><th>parameter</th><th>answer</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderResult(goal: string, result: ConsultOutcome): string {
  if (!result.determined) {
    return `<div class="result undetermined">undetermined</div>`;
  }
  return (
    `<div class="result determined">` +
    `<span class="goal">${esc(goal)}</span> = ` +
    `<span class="value">${esc(JSON.stringify(result.value))}</span> ` +
    `<span class="cf">(certainty ${esc(formatCf(result.cf ?? 1))})</span></div>`
  );
}

export function renderRunning(): string {
  return `<div class="running">inference running / complete — no question pending</div>`;
}

export function renderStaleBanner(): string {
  return `<div class="banner stale">session no longer exists; start a new one</div>`;
}

// --- timeline ---------------------------------------------------------------

const LANE_WIDTH = 640;

function x(tick: number, horizon: number): number {
  const usable = Math.max(horizon, 1);
  return Math.round((tick / usable) * LANE_WIDTH);
}

export function renderTimeline(layout: TimelineLayout): string {
  const parts = [`<div class="timeline" data-horizon="${layout.horizon}">`];
  for (const lane of layout.lanes) {
    parts.push(`<div class="lane ${lane.kind}" data-object="${esc(lane.name)}">`);
    parts.push(`<span class="lane-name">${esc(lane.name)}</span>`);
    parts.push(`<svg class="lane-track" width="${LANE_WIDTH + 16}" height="22">`);
    parts.push(`<line class="axis" x1="0" y1="11" x2="${LANE_WIDTH}" y2="11"/>`);
    for (const span of lane.spans) {
      const x1 = x(span.start, layout.horizon);
      const x2 = x(span.end, layout.horizon);
      const cls = span.open ? "span open" : "span";
      parts.push(`<rect class="${cls}" x="${x1}" y="5" width="${Math.max(x2 - x1, 2)}" height="12"/>`);
      if (span.open) {
        // open-end glyph: the occurrence extends to the current tick
        parts.push(`<path class="open-end" d="M ${x2} 5 l 8 6 l -8 6"/>`);
      }
    }
    for (const marker of lane.markers) {
      parts.push(`<circle class="marker" cx="${x(marker.tick, layout.horizon)}" cy="11" r="4"/>`);
    }
    for (const badge of lane.badges) {
      parts.push(
        `<text class="badge" data-kind="${esc(badge.kind)}" x="${x(badge.tick, layout.horizon)}" y="9">!</text>`,
      );
    }
    parts.push(`</svg></div>`);
  }
  parts.push(`</div>`);
  return parts.join("");
}

// --- working memory / conflict set / control feed ---------------------------

export function renderWm(rows: WmRow[]): string {
  const body = rows
    .map(
      (row) =>
        `<tr><td>${esc(row.ref)}</td><td>${esc(formatLiteral(row.value))}</td>` +
        `<td>${esc(formatCf(row.cf))}</td><td>${row.tick}</td></tr>`,
    )
    .join("");
  return (
    `<table class="wm"><thead><tr><th>ref</th><th>value</th><th>cf</th><th>tick</th></tr></thead>` +
    `<tbody>${body}</tbody></table>`
  );
}

export function renderConflictSet(rows: ConflictRow[]): string {
  if (rows.length === 0) {
    return `<div class="conflict-empty">conflict set empty (quiescent)</div>`;
  }
  const body = rows
    .map(
      (row, i) =>
        `<tr><td>${i + 1}</td><td>${esc(row.rule)}</td><td>${esc(formatCf(row.truth))}</td>` +
        `<td>${row.rank.join(" / ")}</td></tr>`,
    )
    .join("");
  return (
    `<table class="conflict"><thead><tr><th>#</th><th>rule</th><th>truth</th>` +
    `<th>spec / nov / rel / decl</th></tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderControlFeed(records: TickRecordPayload[]): string {
  const items: string[] = [];
  for (const record of records) {
    for (const [ref, literal] of record.control_actions) {
      items.push(
        `<li><span class="tick">t${record.tick}</span> ${esc(ref)} := ${esc(formatLiteral(literal))}</li>`,
      );
    }
  }
  return `<ul class="control-feed">${items.join("") || "<li class='none'>none yet</li>"}</ul>`;
}
