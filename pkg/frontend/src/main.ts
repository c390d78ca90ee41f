/** Page wiring: form, parameter panel, SVG mount, history, pivots. */

import { ApiClient, QueryFailed } from "./api.js";
import { pegToDot, renderPegSvg } from "./render.js";
import type { QuerySpec } from "./schema.js";
import { validateSpec } from "./schema.js";
import {
  ViewState,
  applyResponse,
  goBack,
  initialState,
  pinAnchor,
  pivotSpec,
  respecWithParams,
  selectNode,
  validateParams,
} from "./state.js";

const api = new ApiClient("");
let state: ViewState = initialState();
const abstracts = new Map<string, string>();

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

function banner(message: string | null): void {
  const el = $("banner");
  el.textContent = message ?? "";
  el.classList.toggle("hidden", message === null);
}

function chainSummary(): string {
  if (!state.current) return "";
  return state.current.peg.chains
    .map(
      (c) =>
        `<li><span class="swatch" data-chain="${c.label}"></span>` +
        `<b>${c.label}</b> score ${c.score.toFixed(5)} ` +
        `<i>${c.topic_words.join(", ")}</i></li>`
    )
    .join("");
}

function redraw(): void {
  const mount = $("graph");
  if (!state.current) {
    mount.innerHTML = '<p class="empty">Run a query to see its evolution graph.</p>';
    return;
  }
  mount.innerHTML = renderPegSvg(state.current.peg, {
    abstracts,
    selection: state.selection,
    anchor: state.anchor,
  });
  $("chains").innerHTML = chainSummary();
  document.querySelectorAll<SVGGElement>("#graph g.node").forEach((g) => {
    g.addEventListener("click", () => onNodeClick(g.dataset.id!));
  });
  $("back").toggleAttribute("disabled", state.history.length === 0);
  colorSwatches();
}

function colorSwatches(): void {
  import("./colors.js").then(({ chainColor }) => {
    document.querySelectorAll<HTMLElement>(".swatch").forEach((el) => {
      el.style.background = chainColor(el.dataset.chain ?? "");
    });
  });
}

function onNodeClick(id: string): void {
  state = selectNode(state, id);
  redraw();
  $("node-actions").classList.remove("hidden");
  $("selected-node").textContent = id;
}

async function runQuery(spec: QuerySpec): Promise<void> {
  const errors = validateSpec(spec);
  if (errors.length) {
    banner(errors.join("; "));
    return;
  }
  banner(null);
  $("run").setAttribute("disabled", "");
  try {
    const outcome = await api.query(spec);
    state = applyResponse(state, spec, outcome.response, outcome.peg);
    await prefetchAbstracts();
    redraw();
  } catch (error) {
    if ((error as Error).name === "AbortError") return;
    banner(error instanceof QueryFailed ? error.message : String(error));
  } finally {
    $("run").removeAttribute("disabled");
  }
}

async function prefetchAbstracts(): Promise<void> {
  if (!state.current) return;
  await Promise.all(
    state.current.peg.nodes.map(async (node) => {
      if (abstracts.has(node.id)) return;
      try {
        const hits = await api.papers(node.id);
        const hit = hits.find((h) => h.id === node.id);
        if (hit) abstracts.set(node.id, hit.abstract);
      } catch {
        /* hover data is best-effort */
      }
    })
  );
}

function panelParams() {
  return {
    chainLength: Number($("param-n").getAttribute("value") ?? ($("param-n") as HTMLInputElement).value),
    r: Number(($("param-r") as HTMLInputElement).value),
    comT: Number(($("param-comt") as HTMLInputElement).value),
  };
}

function currentSpecFromForm(): QuerySpec | null {
  const kind = ($("kind") as HTMLSelectElement).value as QuerySpec["kind"];
  const params = panelParams();
  state = { ...state, params };
  const problems = validateParams(params);
  if (problems.length) {
    banner(problems.join("; "));
    return null;
  }
  const overrides = {
    chain_length: params.chainLength,
    r: params.r,
    com_t: params.comT,
  };
  const keyword = ($("keyword") as HTMLInputElement).value.trim();
  const paperA = ($("paper-a") as HTMLInputElement).value.trim();
  const paperB = ($("paper-b") as HTMLInputElement).value.trim();
  if (kind === "keyword") return { kind, keyword, ...overrides };
  if (kind === "single_paper") return { kind, paper_a: paperA, ...overrides };
  return { kind, paper_a: paperA, paper_b: paperB, ...overrides };
}

function download(name: string, text: string, type: string): void {
  const url = URL.createObjectURL(new Blob([text], { type }));
  const link = document.createElement("a");
  link.href = url;
  link.download = name;
  link.click();
  URL.revokeObjectURL(url);
}

function wire(): void {
  $("kind").addEventListener("change", () => {
    const kind = ($("kind") as HTMLSelectElement).value;
    $("keyword-row").classList.toggle("hidden", kind !== "keyword");
    $("paper-a-row").classList.toggle("hidden", kind === "keyword");
    $("paper-b-row").classList.toggle("hidden", kind !== "two_paper");
  });
  $("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const spec = currentSpecFromForm();
    if (spec) void runQuery(spec);
  });
  $("rerun").addEventListener("click", () => {
    state = { ...state, params: panelParams() };
    const problems = validateParams(state.params);
    if (problems.length) {
      banner(problems.join("; "));
      return;
    }
    try {
      void runQuery(respecWithParams(state));
    } catch (error) {
      banner(String(error));
    }
  });
  $("back").addEventListener("click", () => {
    state = goBack(state);
    redraw();
  });
  $("pivot-single").addEventListener("click", () => {
    if (!state.selection) return;
    try {
      void runQuery(pivotSpec(state, state.selection, "single"));
    } catch (error) {
      banner(String(error));
    }
  });
  $("pin").addEventListener("click", () => {
    state = pinAnchor(state, state.selection);
    redraw();
  });
  $("pivot-pair").addEventListener("click", () => {
    if (!state.selection) return;
    try {
      void runQuery(pivotSpec(state, state.selection, "pair-with-anchor"));
    } catch (error) {
      banner(String(error));
    }
  });
  $("export-json").addEventListener("click", () => {
    if (state.current) download("peg.json", state.current.response, "application/json");
  });
  $("export-dot").addEventListener("click", () => {
    if (state.current) download("peg.dot", pegToDot(state.current.peg), "text/plain");
  });
  void api.config().then((payload) => {
    const config = payload.config as Record<string, unknown>;
    $("weights-display").textContent =
      `relation weights (index-baked): ${JSON.stringify(config.weights)}`;
    ($("param-n") as HTMLInputElement).value = String(config.chain_length ?? 6);
    ($("param-r") as HTMLInputElement).value = String(config.r ?? 0.05);
    ($("param-comt") as HTMLInputElement).value = String(config.com_t ?? 0.2);
  });
  redraw();
}

document.addEventListener("DOMContentLoaded", wire);
