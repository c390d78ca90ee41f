/**
 * Thin client over the engine's HTTP contract. At most one query is in
 * flight; submitting a new one aborts the pending request.
 */

import type { PaperSummary, Peg, QuerySpec } from "./schema.js";
import { parsePaperList, parsePeg } from "./schema.js";

export class QueryFailed extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export interface QueryOutcome {
  /** Exact response bytes (the canonical export). */
  response: string;
  peg: Peg;
}

export class ApiClient {
  private pending: AbortController | null = null;

  constructor(private readonly base: string = "") {}

  async query(spec: QuerySpec): Promise<QueryOutcome> {
    this.pending?.abort();
    const controller = new AbortController();
    this.pending = controller;
    try {
      const response = await fetch(`${this.base}/query`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(spec),
        signal: controller.signal,
      });
      const text = await response.text();
      if (!response.ok) {
        throw new QueryFailed(response.status, detailOf(text));
      }
      return { response: text, peg: parsePeg(text) };
    } finally {
      if (this.pending === controller) this.pending = null;
    }
  }

  async papers(q: string): Promise<PaperSummary[]> {
    const response = await fetch(
      `${this.base}/papers?q=${encodeURIComponent(q)}`
    );
    if (!response.ok) throw new QueryFailed(response.status, "paper search failed");
    return parsePaperList(await response.json());
  }

  async communities(): Promise<unknown> {
    const response = await fetch(`${this.base}/communities`);
    return response.json();
  }

  async config(): Promise<Record<string, unknown>> {
    const response = await fetch(`${this.base}/config`);
    return (await response.json()) as Record<string, unknown>;
  }
}

function detailOf(text: string): string {
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (Array.isArray(body.detail)) {
      return body.detail
        .map((e) => (typeof e === "object" && e ? JSON.stringify(e) : String(e)))
        .join("; ");
    }
  } catch {
    /* not JSON */
  }
  return text || "request failed";
}
