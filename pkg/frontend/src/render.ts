/** HTML renderers: pure functions from data to markup strings so views are
 * testable without a DOM. Event wiring happens in app.ts after insertion. */

import { escapeHtml, reportHtml } from './highlight.js';
import {
  formatEnqueuedAt,
  metricsPanelModel,
  type MetricsModel,
} from './format.js';
import type {
  MetricsDto,
  Outcome,
  QueueFilters,
  ReportDto,
  TriageDetailDto,
  TriageItemDto,
} from './types.js';

const OUTCOMES: { value: Outcome; label: string }[] = [
  { value: 'TRUE_POSITIVE_MISSED', label: 'True finding, missed by the report' },
  { value: 'REPORTED_NLP_ERROR', label: 'Reported in text, classifier missed it' },
  { value: 'AI_FALSE_POSITIVE', label: 'AI false positive' },
  { value: 'OTHER', label: 'Other' },
];

export function renderBanner(message: string): string {
  return (
    `<div class="banner" role="alert">${escapeHtml(message)} ` +
    '<button type="button" data-action="retry">Retry</button></div>'
  );
}

export function renderQueueView(items: TriageItemDto[], filters: QueueFilters): string {
  const option = (value: string, label: string, selected: boolean) =>
    `<option value="${value}"${selected ? ' selected' : ''}>${label}</option>`;

  const filterBar =
    '<form class="filters" data-role="filters">' +
    '<label>Arm <select name="arm">' +
    option('', 'all', !filters.arm) +
    option('flagged', 'flagged', filters.arm === 'flagged') +
    option('nonflagged', 'non-flagged', filters.arm === 'nonflagged') +
    '</select></label>' +
    '<label>Class <select name="class">' +
    option('', 'all', !filters.concordance) +
    option('AI_POS_NLP_NEG', 'AI+ / NLP-', filters.concordance === 'AI_POS_NLP_NEG') +
    option('AI_NEG_NLP_POS', 'AI- / NLP+', filters.concordance === 'AI_NEG_NLP_POS') +
    '</select></label>' +
    '</form>';

  if (items.length === 0) {
    return (
      `<section class="queue">${filterBar}` +
      '<p class="empty">No pending cases. The queue is drained.</p></section>'
    );
  }

  const rows = items
    .map(
      (item) =>
        `<tr data-study-id="${escapeHtml(item.study_id)}">` +
        `<td><a href="#/case/${encodeURIComponent(item.study_id)}">` +
        `${escapeHtml(item.study_id)}</a></td>` +
        `<td>${item.concordance}</td>` +
        `<td>${item.arm ?? '-'}</td>` +
        `<td>${escapeHtml(formatEnqueuedAt(item.enqueued_at))}</td></tr>`,
    )
    .join('');

  return (
    `<section class="queue">${filterBar}` +
    `<p class="count">${items.length} pending case${items.length === 1 ? '' : 's'}</p>` +
    '<table><thead><tr><th>Study</th><th>Concordance</th><th>Arm</th>' +
    `<th>Enqueued</th></tr></thead><tbody>${rows}</tbody></table></section>`
  );
}

export function renderCaseView(detail: TriageDetailDto, report: ReportDto): string {
  const ai = detail.ai;
  const aiLine = ai
    ? `${ai.ai_positive ? 'POSITIVE' : 'NEGATIVE'} for ${escapeHtml(ai.finding_code)}` +
      (ai.ai_score !== undefined ? ` (score ${ai.ai_score.toFixed(3)})` : '') +
      ` — model ${escapeHtml(ai.model_version)}`
    : 'no AI finding on record';

  const verdict = detail.adjudication;
  const verdictBlock = verdict
    ? '<p class="verdict">Adjudicated <strong>' +
      `${verdict.outcome}</strong> by ${escapeHtml(verdict.reviewer_id)}` +
      (verdict.note ? ` — ${escapeHtml(verdict.note)}` : '') +
      '</p>'
    : '';

  const radios = OUTCOMES.map(
    (outcome, index) =>
      '<label class="outcome">' +
      `<input type="radio" name="outcome" value="${outcome.value}"` +
      `${index === 0 ? ' required' : ''}> ${outcome.label}</label>`,
  ).join('');

  return (
    '<section class="case">' +
    `<p><a href="#/queue">&larr; back to queue</a></p>` +
    `<h2>${escapeHtml(detail.study_id)}</h2>` +
    `<p class="meta">AI read: ${aiLine}</p>` +
    `<p class="meta">Arm: ${detail.arm ?? '-'} &middot; ` +
    `NLP label: ${report.label ?? 'n/a'} &middot; ` +
    `Concordance: ${detail.concordance} &middot; Status: ${detail.status}</p>` +
    verdictBlock +
    `<pre class="report">${reportHtml(report.text, report.evidence)}</pre>` +
    '<form class="adjudication" data-role="adjudication">' +
    `<fieldset><legend>Expert verdict</legend>${radios}</fieldset>` +
    '<label>Reviewer <input name="reviewer_id" required placeholder="reviewer id"></label>' +
    '<label>Note <textarea name="note" rows="2"></textarea></label>' +
    '<button type="submit">Submit adjudication</button>' +
    '<p class="form-error" data-role="form-error" hidden></p>' +
    '</form></section>'
  );
}

export function renderNotFound(studyId: string): string {
  return (
    '<section class="case"><p><a href="#/queue">&larr; back to queue</a></p>' +
    `<p class="empty">No triage item for ${escapeHtml(studyId)}.</p></section>`
  );
}

export function renderMetricsPanel(model: MetricsModel): string {
  if (model.state === 'pending' || model.state === 'empty') {
    return `<div class="metrics"><h3>Metrics</h3><p>${escapeHtml(model.message)}</p></div>`;
  }
  return (
    '<div class="metrics"><h3>Metrics</h3><dl>' +
    `<dt>Missed rate, flagged</dt><dd><strong>${model.flaggedRate}</strong> ` +
    `<span class="detail">${model.flaggedDetail} &middot; 95% CI ${model.flaggedInterval}</span></dd>` +
    `<dt>Missed rate, non-flagged</dt><dd><strong>${model.nonflaggedRate}</strong> ` +
    `<span class="detail">${model.nonflaggedDetail} &middot; 95% CI ${model.nonflaggedInterval}</span></dd>` +
    `<dt>Effort reduction</dt><dd><strong>${model.effortReduction}</strong> ` +
    `<span class="detail">${model.queueShare}</span></dd>` +
    `<dt>Fisher exact p</dt><dd>${model.pValue}</dd>` +
    `<dt>Rate basis</dt><dd>${model.rateBasis}</dd>` +
    '</dl></div>'
  );
}

export function renderMetricsFromDto(metrics: MetricsDto): string {
  return renderMetricsPanel(metricsPanelModel(metrics));
}
