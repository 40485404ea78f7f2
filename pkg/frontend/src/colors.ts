// Deterministic colors: objects are colored by class name, match groups by
// their match value, so the same entity always renders the same way.

const PALETTE = [
  "#e6194b", "#3cb44b", "#ffe119", "#0082c8", "#f58231",
  "#911eb4", "#46f0f0", "#f032e6", "#d2f53c", "#fabed4",
  "#008080", "#dcbeff", "#aa6e28", "#fffac8", "#800000",
  "#aaffc3", "#808000", "#ffd8b1", "#000080", "#808080",
];

function hashText(text: string): number {
  let hash = 2166136261;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 16777619);
  }
  return hash >>> 0;
}

export function colorForName(name: string | null): string {
  if (name === null) return "#9e9e9e";
  return PALETTE[hashText(name) % PALETTE.length];
}

export function colorForMatch(match: number): string {
  return PALETTE[match % PALETTE.length];
}
