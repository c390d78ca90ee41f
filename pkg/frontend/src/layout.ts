/**
 * Layered left-to-right layout: one column per distinct year, shared
 * nodes merged (they exist once and carry every chain's color).
 */

import type { Peg } from "./schema.js";

export interface NodePosition {
  x: number;
  y: number;
}

export interface Layout {
  positions: Map<string, NodePosition>;
  width: number;
  height: number;
  columnYears: number[];
}

export const NODE_RADIUS = 26;
const COLUMN_GAP = 150;
const ROW_GAP = 96;
const MARGIN = 70;

export function layoutPeg(peg: Peg): Layout {
  const years = [...new Set(peg.nodes.map((n) => n.year))].sort((a, b) => a - b);
  const columnOf = new Map(years.map((y, i) => [y, i]));
  const byColumn = new Map<number, string[]>();
  const sorted = [...peg.nodes].sort(
    (a, b) => a.year - b.year || (a.id < b.id ? -1 : 1)
  );
  for (const node of sorted) {
    const column = columnOf.get(node.year)!;
    const bucket = byColumn.get(column) ?? [];
    bucket.push(node.id);
    byColumn.set(column, bucket);
  }
  const positions = new Map<string, NodePosition>();
  let maxRows = 1;
  for (const [column, bucket] of byColumn) {
    maxRows = Math.max(maxRows, bucket.length);
    bucket.forEach((id, row) => {
      positions.set(id, {
        x: MARGIN + column * COLUMN_GAP,
        y: MARGIN + row * ROW_GAP,
      });
    });
  }
  return {
    positions,
    width: MARGIN * 2 + Math.max(0, years.length - 1) * COLUMN_GAP,
    height: MARGIN * 2 + (maxRows - 1) * ROW_GAP,
    columnYears: years,
  };
}
