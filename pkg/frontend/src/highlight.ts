// Span-driven highlight segmentation. The server sends exact character
// offsets already validated against token boundaries; the client's only job
// is to wrap those precise ranges, never to re-find them with regexes.

import type { Highlight } from "./types.js";

export interface Segment {
  text: string;
  kind: Highlight["kind"] | null;
}

/** Split source into plain and highlighted segments, in order. */
export function segment(source: string, highlights: Highlight[]): Segment[] {
  const ordered = [...highlights].sort((a, b) => a.start - b.start || a.end - b.end);
  const segments: Segment[] = [];
  let position = 0;
  for (const mark of ordered) {
    const start = Math.max(mark.start, position);
    const end = Math.min(mark.end, source.length);
    if (end <= start) continue; // degenerate or overlapping leftover
    if (start > position) {
      segments.push({ text: source.slice(position, start), kind: null });
    }
    segments.push({ text: source.slice(start, end), kind: mark.kind });
    position = end;
  }
  if (position < source.length) {
    segments.push({ text: source.slice(position), kind: null });
  }
  return segments;
}

/** Rebuilding the segments must reproduce the source exactly. */
export function segmentsText(segments: Segment[]): string {
  return segments.map((s) => s.text).join("");
}
