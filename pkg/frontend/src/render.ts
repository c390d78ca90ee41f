/**
 * Pure SVG rendering of a parsed graph. No DOM access: the renderer
 * returns a string, so it is testable anywhere and the page simply
 * injects the result.
 */

import { chainColor } from "./colors.js";
import { layoutPeg, NODE_RADIUS } from "./layout.js";
import type { Peg } from "./schema.js";

export interface RenderDetails {
  /** Extra hover data per paper id (abstract snippet etc.). */
  abstracts?: Map<string, string>;
  selection?: string | null;
  anchor?: string | null;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function truncate(text: string, limit: number): string {
  return text.length <= limit ? text : text.slice(0, limit - 1) + "…";
}

export function renderPegSvg(peg: Peg, details: RenderDetails = {}): string {
  const layout = layoutPeg(peg);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" class="peg">`
  );

  for (const edge of peg.edges) {
    const a = layout.positions.get(edge.from)!;
    const b = layout.positions.get(edge.to)!;
    // one strand per chain so shared edges show every chain's color
    edge.chains.forEach((label, strand) => {
      const offset = (strand - (edge.chains.length - 1) / 2) * 5;
      const midX = (a.x + b.x) / 2;
      parts.push(
        `<path d="M ${a.x} ${a.y} C ${midX} ${a.y + offset}, ` +
          `${midX} ${b.y + offset}, ${b.x} ${b.y}" fill="none" ` +
          `stroke="${chainColor(label)}" stroke-width="2.5" ` +
          `data-edge="${escapeXml(edge.from)}->${escapeXml(edge.to)}" ` +
          `data-chain="${escapeXml(label)}" marker-end="url(#arrow)"/>`
      );
    });
  }

  const chainsOf = new Map<string, string[]>();
  for (const chain of peg.chains) {
    for (const pid of chain.papers) {
      const labels = chainsOf.get(pid) ?? [];
      labels.push(chain.label);
      chainsOf.set(pid, labels);
    }
  }

  for (const node of peg.nodes) {
    const pos = layout.positions.get(node.id)!;
    const labels = chainsOf.get(node.id) ?? [];
    const fill = labels.length ? chainColor(labels[0]!) : "#999999";
    const selected = details.selection === node.id;
    const anchored = details.anchor === node.id;
    const rings = labels
      .slice(1)
      .map(
        (label, i) =>
          `<circle cx="${pos.x}" cy="${pos.y}" r="${NODE_RADIUS + 4 + 4 * i}" ` +
          `fill="none" stroke="${chainColor(label)}" stroke-width="3"/>`
      )
      .join("");
    const abstract = details.abstracts?.get(node.id) ?? "";
    const hover =
      `${node.title} (${node.year})\ncommunities: ${node.communities.join(", ")}` +
      (abstract ? `\n${truncate(abstract, 220)}` : "");
    parts.push(
      `<g class="node${selected ? " selected" : ""}${anchored ? " anchored" : ""}" ` +
        `data-id="${escapeXml(node.id)}" tabindex="0">` +
        rings +
        `<circle cx="${pos.x}" cy="${pos.y}" r="${NODE_RADIUS}" fill="${fill}" ` +
        `stroke="${selected ? "#111111" : anchored ? "#444444" : "white"}" ` +
        `stroke-width="${selected || anchored ? 4 : 2}"/>` +
        `<title>${escapeXml(hover)}</title>` +
        `<text x="${pos.x}" y="${pos.y - NODE_RADIUS - 10}" text-anchor="middle" ` +
        `class="node-label">${escapeXml(truncate(node.title, 24))} (${node.year})</text>` +
        `</g>`
    );
  }

  parts.push(
    `<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="7" refY="4" ` +
      `orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#888888"/></marker></defs>`
  );
  parts.push("</svg>");
  return parts.join("\n");
}

/** Deterministic client-side DOT text derived from the stored response. */
export function pegToDot(peg: Peg): string {
  const esc = (s: string) => s.replace(/\\/g, "\\\\").replace(/"/g, '\\"');
  const lines = ["digraph peg {", "  rankdir=LR;"];
  for (const node of peg.nodes) {
    lines.push(`  "${esc(node.id)}" [label="${esc(`${node.title} (${node.year})`)}"];`);
  }
  for (const edge of peg.edges) {
    const color = edge.chains.map(chainColor).join(":");
    lines.push(
      `  "${esc(edge.from)}" -> "${esc(edge.to)}" ` +
        `[chain="${esc(edge.chains.join(","))}", color="${color}"];`
    );
  }
  lines.push("}");
  return lines.join("\n") + "\n";
}
