/** Replay fetch built from a recorded service session: requests are matched
 * by method+path in recorded order, so tests run against exactly what the
 * real service answered. */
import type { FetchLike } from "../src/api.js";

export interface RecordedExchange {
  method: string;
  path: string;
  body: unknown;
  status: number;
  response: unknown;
}

export class RecordedService {
  private queues = new Map<string, RecordedExchange[]>();
  readonly bodyMismatches: string[] = [];

  constructor(recording: RecordedExchange[]) {
    for (const exchange of recording) {
      const key = `${exchange.method} ${exchange.path}`;
      const queue = this.queues.get(key) ?? [];
      queue.push(exchange);
      this.queues.set(key, queue);
    }
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const key = `${method} ${url}`;
    const queue = this.queues.get(key);
    const exchange = queue?.shift();
    if (!exchange) {
      throw new Error(`request not in recording: ${key}`);
    }
    if (exchange.body !== null && exchange.body !== undefined) {
      const sent = init?.body ? JSON.parse(String(init.body)) : undefined;
      if (JSON.stringify(sent) !== JSON.stringify(exchange.body)) {
        this.bodyMismatches.push(
          `${key}: sent ${JSON.stringify(sent)} recorded ${JSON.stringify(exchange.body)}`,
        );
      }
    }
    return new Response(JSON.stringify(exchange.response), {
      status: exchange.status,
      headers: { "Content-Type": "application/json" },
    });
  };
}
