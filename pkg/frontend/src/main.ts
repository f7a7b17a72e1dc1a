/** Browser wiring: one session per tab, all mutation through the session
 * API, polling for consultation questions. */
import { ApiClient } from "./api.js";
import type { StatePayload, TickRecordPayload, ValueLiteral } from "./api.js";
import { ConsultationFlow } from "./consultation.js";
import {
  renderConflictSet,
  renderControlFeed,
  renderHistory,
  renderQuestion,
  renderResult,
  renderRunning,
  renderStaleBanner,
  renderTimeline,
  renderWm,
} from "./render.js";
import { layoutTimeline } from "./timeline.js";
import { answerFromInput } from "./widgets.js";

const POLL_MS = 700;

const api = new ApiClient("");
let sessionId: string | null = null;
let mode: "simulation" | "consultation" = "simulation";
let flow: ConsultationFlow | null = null;
let goal = "";
const tickRecords: TickRecordPayload[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function refreshState(): Promise<void> {
  if (!sessionId) return;
  let state: StatePayload;
  try {
    state = await api.state(sessionId);
  } catch {
    el("question-panel").innerHTML = renderStaleBanner();
    return;
  }
  el("wm-panel").innerHTML = renderWm(state.wm);
  el("conflict-panel").innerHTML = renderConflictSet(state.conflict_set);
  el("timeline-panel").innerHTML = renderTimeline(layoutTimeline(state.timeline, state.tick));
  el("control-panel").innerHTML = renderControlFeed(tickRecords);
}

async function refreshConsultation(): Promise<void> {
  if (!flow) return;
  const state = await flow.refresh();
  const panel = el("question-panel");
  if (state.phase === "asking") {
    panel.innerHTML = renderQuestion(state.question) + renderHistory(flow.history);
    bindQuestionInputs();
  } else if (state.phase === "done") {
    panel.innerHTML = renderResult(goal, state.result) + renderHistory(flow.history);
  } else if (state.phase === "stale") {
    panel.innerHTML = renderStaleBanner();
  } else {
    panel.innerHTML = renderRunning();
    setTimeout(refreshConsultation, POLL_MS);
  }
  await refreshState();
}

function bindQuestionInputs(): void {
  const panel = el("question-panel");
  const submit = async (value: ValueLiteral | null) => {
    if (!flow) return;
    await flow.submit(value);
    await refreshConsultation();
  };
  panel.querySelectorAll<HTMLButtonElement>("button.choice").forEach((button) => {
    button.onclick = () => void submit(JSON.parse(button.dataset.answer ?? "null"));
  });
  const unknown = panel.querySelector<HTMLButtonElement>("button.unknown");
  if (unknown) unknown.onclick = () => void submit(null);
  const submitBtn = panel.querySelector<HTMLButtonElement>("button.submit");
  const input = panel.querySelector<HTMLInputElement>("input.answer-input");
  if (submitBtn && input && flow && flow.state.phase === "asking") {
    const question = flow.state.question;
    submitBtn.onclick = () => {
      try {
        void submit(answerFromInput(question, input.value));
      } catch (err) {
        el("flash").textContent = String(err);
      }
    };
  }
}

async function startSession(): Promise<void> {
  const krl = el<HTMLTextAreaElement>("krl-input").value;
  mode = el<HTMLSelectElement>("mode-select").value as typeof mode;
  goal = el<HTMLInputElement>("goal-input").value.trim();
  tickRecords.length = 0;
  try {
    const created = await api.createSession(
      mode === "consultation" ? { krl, mode, goal } : { krl, mode },
    );
    sessionId = created.id;
    el("flash").textContent = `session ${created.id} (${created.mode})`;
  } catch (err) {
    el("flash").textContent = String(err);
    return;
  }
  el("tick-controls").style.display = mode === "simulation" ? "block" : "none";
  if (mode === "consultation") {
    flow = new ConsultationFlow(api, sessionId);
    await refreshConsultation();
  } else {
    flow = null;
    el("question-panel").innerHTML = renderRunning();
    await refreshState();
  }
}

async function postTick(): Promise<void> {
  if (!sessionId) return;
  const raw = el<HTMLTextAreaElement>("tick-input").value.trim();
  let set: Record<string, ValueLiteral> = {};
  if (raw) {
    try {
      set = JSON.parse(raw);
    } catch (err) {
      el("flash").textContent = `tick data is not JSON: ${err}`;
      return;
    }
  }
  try {
    const record = await api.tick(sessionId, set);
    tickRecords.push(record);
    el("flash").textContent = `tick ${record.tick}: fired ${record.fired.join(", ") || "nothing"}`;
  } catch (err) {
    el("flash").textContent = String(err);
  }
  await refreshState();
}

export function boot(): void {
  el("start-session").onclick = () => void startSession();
  el("post-tick").onclick = () => void postTick();
}

if (typeof document !== "undefined" && document.getElementById("start-session")) {
  boot();
}
