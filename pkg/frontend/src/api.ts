/** Typed client for the session HTTP API. All rendering state downstream
 * derives solely from these responses; the UI never computes truth values
 * or relations itself. */

export type ValueLiteral =
  | number
  | string
  | boolean
  | { inexact: [number, number] }
  | { set: number[] }
  | { range: [number, number] }
  | { mf: [number, number][] }
  | { value: ValueLiteral; cf: number };

export interface QuestionDomain {
  kind: "number" | "string" | "boolean";
  choices?: (string | number | boolean)[];
  range?: [number, number];
  terms?: string[];
}

export interface PendingQuestion {
  id: string;
  ref: string;
  domain: QuestionDomain;
}

export interface ConsultOutcome {
  determined: boolean;
  value?: ValueLiteral;
  cf?: number;
}

export interface QuestionResponse {
  question: PendingQuestion | null;
  done: boolean;
  result: ConsultOutcome | null;
}

export interface WmRow {
  ref: string;
  value: ValueLiteral;
  cf: number;
  tick: number;
  provenance: string;
}

export interface ConflictRow {
  rule: string;
  truth: number;
  rank: [number, number, number, number];
}

export interface TimelinePayload {
  objects: Record<string, { kind: "event" | "interval"; occurrences: [number, number | null][] }>;
  anomalies: [number, string, string][];
}

export interface StatePayload {
  mode: string;
  tick: number;
  wm: WmRow[];
  conflict_set: ConflictRow[];
  timeline: TimelinePayload;
  done?: boolean;
  result?: ConsultOutcome | null;
}

export interface TickRecordPayload {
  tick: number;
  origins: [string, string][];
  anomalies: [number, string, string][];
  fired: string[];
  wm_diff: [string, ValueLiteral | null, ValueLiteral][];
  control_actions: [string, ValueLiteral][];
  defuzz_modes: Record<string, { modes: number[]; primary: number }>;
  flags: string[];
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }

  /** 404 on a session resource: the session is gone (stale tab). */
  get staleSession(): boolean {
    return this.status === 404;
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchFn(this.base + path, init);
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const message =
        typeof payload === "object" && payload && "error" in payload
          ? String((payload as { error: unknown }).error)
          : `${resp.status}`;
      throw new ApiError(resp.status, message);
    }
    return payload as T;
  }

  createSession(body: {
    krl: string;
    mode?: "simulation" | "consultation";
    goal?: string;
    config?: Record<string, unknown>;
  }): Promise<{ id: string; mode: string }> {
    return this.request("POST", "/sessions", body);
  }

  state(id: string): Promise<StatePayload> {
    return this.request("GET", `/sessions/${id}/state`);
  }

  tick(id: string, set: Record<string, ValueLiteral>): Promise<TickRecordPayload> {
    return this.request("POST", `/sessions/${id}/tick`, { set });
  }

  question(id: string): Promise<QuestionResponse> {
    return this.request("GET", `/sessions/${id}/question`);
  }

  answer(id: string, value: ValueLiteral | null): Promise<{ accepted: boolean; done: boolean; result: ConsultOutcome | null }> {
    const body = value === null ? { unknown: true } : { value };
    return this.request("POST", `/sessions/${id}/answer`, body);
  }

  timeline(id: string): Promise<TimelinePayload> {
    return this.request("GET", `/sessions/${id}/timeline`);
  }

  deleteSession(id: string): Promise<Record<string, never>> {
    return this.request("DELETE", `/sessions/${id}`);
  }
}

/** Render a value literal the way the CLI does (JSON body, cf aside). */
export function formatLiteral(literal: ValueLiteral): string {
  if (typeof literal === "object" && literal !== null && "value" in literal) {
    const wrapped = literal as { value: ValueLiteral; cf: number };
    return `${formatLiteral(wrapped.value)} (cf ${formatCf(wrapped.cf)})`;
  }
  return JSON.stringify(literal);
}

export function formatCf(cf: number): string {
  return Number(cf.toPrecision(6)).toString();
}
