/**
 * Wire types of the engine's HTTP contract and strict runtime parsing.
 *
 * Everything rendered by the explorer is parsed through these functions
 * first; a response that does not match the schema never reaches the
 * renderer (the previous view is kept instead).
 */

export interface PegNode {
  id: string;
  title: string;
  year: number;
  communities: number[];
}

export interface PegEdge {
  from: string;
  to: string;
  chains: string[];
}

export interface PegChain {
  label: string;
  papers: string[];
  score: number;
  topic_words: string[];
}

export interface Peg {
  nodes: PegNode[];
  edges: PegEdge[];
  chains: PegChain[];
}

export type QueryKind = "keyword" | "single_paper" | "two_paper";

export interface QuerySpec {
  kind: QueryKind;
  keyword?: string;
  paper_a?: string;
  paper_b?: string;
  chain_length?: number;
  r?: number;
  com_t?: number;
}

export interface PaperSummary {
  id: string;
  title: string;
  year: number;
  authors: string[];
  abstract: string;
  communities: number[];
}

export class SchemaError extends Error {}

function fail(path: string, message: string): never {
  throw new SchemaError(`${path}: ${message}`);
}

function asObject(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    fail(path, "expected an object");
  }
  return value as Record<string, unknown>;
}

function asArray(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) fail(path, "expected an array");
  return value;
}

function asString(value: unknown, path: string): string {
  if (typeof value !== "string") fail(path, "expected a string");
  return value;
}

function asNumber(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    fail(path, "expected a finite number");
  }
  return value;
}

function stringList(value: unknown, path: string): string[] {
  return asArray(value, path).map((v, i) => asString(v, `${path}[${i}]`));
}

function numberList(value: unknown, path: string): number[] {
  return asArray(value, path).map((v, i) => asNumber(v, `${path}[${i}]`));
}

/** Parse and validate a /query response body. */
export function parsePeg(data: unknown): Peg {
  const root = typeof data === "string" ? JSON.parse(data) : data;
  const obj = asObject(root, "peg");
  const nodes = asArray(obj.nodes, "nodes").map((raw, i) => {
    const n = asObject(raw, `nodes[${i}]`);
    return {
      id: asString(n.id, `nodes[${i}].id`),
      title: asString(n.title, `nodes[${i}].title`),
      year: asNumber(n.year, `nodes[${i}].year`),
      communities: numberList(n.communities, `nodes[${i}].communities`),
    };
  });
  const ids = new Set(nodes.map((n) => n.id));
  if (ids.size !== nodes.length) fail("nodes", "duplicate node ids");

  const edges = asArray(obj.edges, "edges").map((raw, i) => {
    const e = asObject(raw, `edges[${i}]`);
    const edge = {
      from: asString(e.from, `edges[${i}].from`),
      to: asString(e.to, `edges[${i}].to`),
      chains: stringList(e.chains, `edges[${i}].chains`),
    };
    if (!ids.has(edge.from) || !ids.has(edge.to)) {
      fail(`edges[${i}]`, "edge endpoint is not a node");
    }
    return edge;
  });

  const chains = asArray(obj.chains, "chains").map((raw, i) => {
    const c = asObject(raw, `chains[${i}]`);
    const chain = {
      label: asString(c.label, `chains[${i}].label`),
      papers: stringList(c.papers, `chains[${i}].papers`),
      score: asNumber(c.score, `chains[${i}].score`),
      topic_words: stringList(c.topic_words, `chains[${i}].topic_words`),
    };
    for (const pid of chain.papers) {
      if (!ids.has(pid)) fail(`chains[${i}]`, `chain paper ${pid} is not a node`);
    }
    return chain;
  });
  if (chains.length === 0) fail("chains", "a graph carries at least one chain");
  return { nodes, edges, chains };
}

/** Validate an outgoing query before it is sent. */
export function validateSpec(spec: QuerySpec): string[] {
  const errors: string[] = [];
  const need: Record<QueryKind, (keyof QuerySpec)[]> = {
    keyword: ["keyword"],
    single_paper: ["paper_a"],
    two_paper: ["paper_a", "paper_b"],
  };
  const forbidden: Record<QueryKind, (keyof QuerySpec)[]> = {
    keyword: ["paper_a", "paper_b"],
    single_paper: ["keyword", "paper_b"],
    two_paper: ["keyword"],
  };
  if (!(spec.kind in need)) {
    return [`unknown query kind ${String(spec.kind)}`];
  }
  for (const field of need[spec.kind]) {
    if (!spec[field]) errors.push(`${spec.kind} requires ${field}`);
  }
  for (const field of forbidden[spec.kind]) {
    if (spec[field]) errors.push(`${spec.kind} must not set ${field}`);
  }
  if (spec.kind === "two_paper" && spec.paper_a && spec.paper_a === spec.paper_b) {
    errors.push("two_paper requires distinct papers");
  }
  if (spec.chain_length !== undefined && (!Number.isInteger(spec.chain_length) || spec.chain_length < 2)) {
    errors.push("chain length must be an integer >= 2");
  }
  if (spec.r !== undefined && spec.r < 0) errors.push("r must be >= 0");
  if (spec.com_t !== undefined && (spec.com_t <= 0 || spec.com_t > 1)) {
    errors.push("com_t must be in (0, 1]");
  }
  return errors;
}

export function parsePaperList(data: unknown): PaperSummary[] {
  return asArray(data, "papers").map((raw, i) => {
    const p = asObject(raw, `papers[${i}]`);
    return {
      id: asString(p.id, `papers[${i}].id`),
      title: asString(p.title, `papers[${i}].title`),
      year: asNumber(p.year, `papers[${i}].year`),
      authors: stringList(p.authors ?? [], `papers[${i}].authors`),
      abstract: asString(p.abstract ?? "", `papers[${i}].abstract`),
      communities: numberList(p.communities ?? [], `papers[${i}].communities`),
    };
  });
}
