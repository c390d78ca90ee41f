/** Chain colors: a pure function of the chain label, same palette as the
 * server's DOT export, cycling over eight colors. */

export const PALETTE = [
  "#1b9e77", "#d95f02", "#7570b3", "#e7298a",
  "#66a61e", "#e6ab02", "#a6761d", "#666666",
] as const;

export function chainColor(label: string): string {
  const tail = label.split("-").pop() ?? "";
  const ordinal = /^\d+$/.test(tail) ? parseInt(tail, 10) - 1 : 0;
  return PALETTE[((ordinal % PALETTE.length) + PALETTE.length) % PALETTE.length]!;
}
