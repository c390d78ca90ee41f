/**
 * Explorer view state: current query, current graph, selection, and an
 * append-only history stack. All transitions are pure functions so the
 * page can re-render from state alone and back-navigation replays a
 * stored response without touching the network.
 */

import type { Peg, QuerySpec } from "./schema.js";
import { validateSpec } from "./schema.js";

export interface HistoryEntry {
  spec: QuerySpec;
  /** The exact response bytes; the rendered graph is derived from them. */
  response: string;
  peg: Peg;
}

export interface PanelParams {
  chainLength: number;
  r: number;
  comT: number;
}

export interface ViewState {
  current: HistoryEntry | null;
  history: HistoryEntry[];
  selection: string | null;
  anchor: string | null;
  params: PanelParams;
}

export const DEFAULT_PARAMS: PanelParams = { chainLength: 6, r: 0.05, comT: 0.2 };

export function initialState(params: Partial<PanelParams> = {}): ViewState {
  return {
    current: null,
    history: [],
    selection: null,
    anchor: null,
    params: { ...DEFAULT_PARAMS, ...params },
  };
}

/** Record a successful query response; history grows, never mutates. */
export function applyResponse(
  state: ViewState,
  spec: QuerySpec,
  response: string,
  peg: Peg
): ViewState {
  const entry: HistoryEntry = { spec, response, peg };
  return {
    ...state,
    current: entry,
    history: state.current ? [...state.history, state.current] : state.history,
    selection: null,
  };
}

/** Restore the previous view from the stored response; no network call. */
export function goBack(state: ViewState): ViewState {
  const previous = state.history[state.history.length - 1];
  if (!previous) return state;
  return {
    ...state,
    current: previous,
    history: state.history.slice(0, -1),
    selection: null,
  };
}

export function selectNode(state: ViewState, id: string | null): ViewState {
  return { ...state, selection: id };
}

export function pinAnchor(state: ViewState, id: string | null): ViewState {
  return { ...state, anchor: id };
}

export type PivotMode = "single" | "pair-with-anchor";

/**
 * Build the follow-up query for a clicked node: evolve from the node, or
 * connect the pinned anchor to it. Throws on an invalid combination.
 */
export function pivotSpec(state: ViewState, nodeId: string, mode: PivotMode): QuerySpec {
  const overrides = paramOverrides(state.params);
  let spec: QuerySpec;
  if (mode === "single") {
    spec = { kind: "single_paper", paper_a: nodeId, ...overrides };
  } else {
    if (!state.anchor) throw new Error("pin an anchor node before connecting");
    spec = {
      kind: "two_paper",
      paper_a: state.anchor,
      paper_b: nodeId,
      ...overrides,
    };
  }
  const errors = validateSpec(spec);
  if (errors.length) throw new Error(errors.join("; "));
  return spec;
}

export function paramOverrides(params: PanelParams): Partial<QuerySpec> {
  return { chain_length: params.chainLength, r: params.r, com_t: params.comT };
}

/** Inline validation for the parameter panel; empty result means valid. */
export function validateParams(params: PanelParams): string[] {
  const errors: string[] = [];
  if (!Number.isInteger(params.chainLength) || params.chainLength < 2) {
    errors.push("chain length must be an integer >= 2");
  }
  if (!(params.r >= 0)) errors.push("r must be >= 0");
  if (!(params.comT > 0 && params.comT <= 1)) errors.push("com_t must be in (0, 1]");
  return errors;
}

/** Re-issue the current query with the panel's parameter overrides. */
export function respecWithParams(state: ViewState): QuerySpec {
  if (!state.current) throw new Error("no query to re-run");
  return { ...state.current.spec, ...paramOverrides(state.params) };
}
