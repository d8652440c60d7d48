/** Pure view-model builders. Everything here only reformats values the
 * service already computed; no QA arithmetic happens client-side. */

import type { MetricsDto, TriageItemDto } from './types.js';

/** Render a fraction as a percentage with two decimals, e.g. 0.005263 -> "0.53%". */
export function formatPercent(fraction: number): string {
  return `${(100 * fraction).toFixed(2)}%`;
}

export function formatPValue(p: number): string {
  return p.toFixed(4);
}

export function formatInterval(ci: [number, number]): string {
  return `[${formatPercent(ci[0])}, ${formatPercent(ci[1])}]`;
}

export interface MetricsPanelModel {
  state: 'ready';
  flaggedRate: string;
  nonflaggedRate: string;
  flaggedDetail: string;
  nonflaggedDetail: string;
  flaggedInterval: string;
  nonflaggedInterval: string;
  effortReduction: string;
  pValue: string;
  queueShare: string;
  rateBasis: string;
}

export interface MetricsPendingModel {
  state: 'pending';
  message: string;
}

export interface MetricsEmptyModel {
  state: 'empty';
  message: string;
}

export type MetricsModel = MetricsPanelModel | MetricsPendingModel | MetricsEmptyModel;

export function metricsPanelModel(metrics: MetricsDto): MetricsPanelModel {
  return {
    state: 'ready',
    flaggedRate: formatPercent(metrics.missed_rate_flagged),
    nonflaggedRate: formatPercent(metrics.missed_rate_nonflagged),
    flaggedDetail: `${metrics.missed_flagged} of ${metrics.flagged_count} flagged`,
    nonflaggedDetail:
      `${metrics.missed_nonflagged} of ${metrics.nonflagged_count} non-flagged`,
    flaggedInterval: formatInterval(metrics.ci_flagged),
    nonflaggedInterval: formatInterval(metrics.ci_nonflagged),
    effortReduction: formatPercent(metrics.effort_reduction),
    pValue: formatPValue(metrics.p_value),
    queueShare: `${metrics.queue_size} of ${metrics.cohort_size} studies reviewed`,
    rateBasis: metrics.rate_basis,
  };
}

export function metricsPendingModel(pending: number): MetricsPendingModel {
  return {
    state: 'pending',
    message: `${pending} case${pending === 1 ? '' : 's'} pending adjudication`,
  };
}

export function metricsEmptyModel(): MetricsEmptyModel {
  return { state: 'empty', message: 'No cohort loaded yet.' };
}

export function formatEnqueuedAt(iso: string): string {
  // Timestamps arrive as RFC 3339; show them compactly, still unambiguous.
  return iso.replace('T', ' ').replace('Z', ' UTC');
}

export function queueRowModel(item: TriageItemDto): {
  studyId: string;
  concordance: string;
  arm: string;
  enqueuedAt: string;
} {
  return {
    studyId: item.study_id,
    concordance: item.concordance,
    arm: item.arm ?? '-',
    enqueuedAt: formatEnqueuedAt(item.enqueued_at),
  };
}
