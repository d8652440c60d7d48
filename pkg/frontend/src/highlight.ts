/** Evidence-span highlighting. Spans arrive as UTF-8 byte ranges computed by
 * the service's parser; the UI slices the encoded text verbatim and never
 * re-derives offsets itself. */

import type { EvidenceSpanDto, Polarity } from './types.js';

export interface TextSegment {
  text: string;
  polarity: Polarity | null; // null = plain text between spans
}

/** Split report text into plain and highlighted segments by byte offsets.
 * Overlapping or out-of-range spans are dropped rather than guessed at. */
export function segmentReport(text: string, spans: EvidenceSpanDto[]): TextSegment[] {
  const bytes = new TextEncoder().encode(text);
  const decoder = new TextDecoder();
  const ordered = [...spans].sort((a, b) => a.start - b.start);

  const segments: TextSegment[] = [];
  let cursor = 0;
  for (const span of ordered) {
    if (span.start < cursor || span.end > bytes.length || span.start >= span.end) {
      continue;
    }
    if (span.start > cursor) {
      segments.push({ text: decoder.decode(bytes.subarray(cursor, span.start)), polarity: null });
    }
    segments.push({
      text: decoder.decode(bytes.subarray(span.start, span.end)),
      polarity: span.polarity,
    });
    cursor = span.end;
  }
  if (cursor < bytes.length) {
    segments.push({ text: decoder.decode(bytes.subarray(cursor)), polarity: null });
  }
  return segments.filter((segment) => segment.text.length > 0);
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

const POLARITY_CLASS: Record<Polarity, string> = {
  AFFIRMED: 'ev-affirmed',
  NEGATED: 'ev-negated',
  UNCERTAIN: 'ev-uncertain',
};

/** HTML for the report body with <mark> elements around evidence spans. */
export function reportHtml(text: string, spans: EvidenceSpanDto[]): string {
  return segmentReport(text, spans)
    .map((segment) =>
      segment.polarity === null
        ? escapeHtml(segment.text)
        : `<mark class="${POLARITY_CLASS[segment.polarity]}" ` +
          `title="${segment.polarity}">${escapeHtml(segment.text)}</mark>`,
    )
    .join('');
}
