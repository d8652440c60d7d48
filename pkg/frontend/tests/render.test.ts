import { describe, expect, it } from 'vitest';

import { metricsPanelModel, metricsPendingModel } from '../src/format.js';
import { adjudicationFromForm, parseRoute } from '../src/app.js';
import {
  renderBanner,
  renderCaseView,
  renderMetricsPanel,
  renderNotFound,
  renderQueueView,
} from '../src/render.js';
import type { MetricsDto, ReportDto, TriageDetailDto, TriageItemDto } from '../src/types.js';

const ITEM: TriageItemDto = {
  study_id: 'QA-00004',
  concordance: 'AI_POS_NLP_NEG',
  status: 'PENDING',
  enqueued_at: '2024-03-01T08:00:00Z',
  arm: 'flagged',
};

const DETAIL: TriageDetailDto = {
  ...ITEM,
  ai: {
    study_id: 'QA-00004',
    finding_code: 'ICH',
    ai_positive: true,
    ai_score: 0.871,
    model_version: 'img-ai-1.2',
    received_at: '2024-03-01T07:00:00Z',
  },
  adjudication: null,
};

const REPORT: ReportDto = {
  study_id: 'QA-00004',
  text: 'No acute intracranial hemorrhage.',
  finalized_at: '2024-03-01T09:00:00Z',
  label: 'NEGATIVE',
  classifier_version: 'ich-lexicon-1.0',
  evidence: [{
    sentence_index: 0, start: 9, end: 32,
    matched_term: 'intracranial hemorrhage', polarity: 'NEGATED',
  }],
};

describe('renderQueueView', () => {
  it('lists pending items with id, class, arm, and enqueue time', () => {
    const html = renderQueueView([ITEM], {});
    expect(html).toContain('QA-00004');
    expect(html).toContain('AI_POS_NLP_NEG');
    expect(html).toContain('flagged');
    expect(html).toContain('#/case/QA-00004');
    expect(html).toContain('1 pending case');
  });

  it('shows the drained state without a table', () => {
    const html = renderQueueView([], {});
    expect(html).toContain('queue is drained');
    expect(html).not.toContain('<tbody>');
  });

  it('marks the active filters as selected', () => {
    const html = renderQueueView([], { arm: 'nonflagged' });
    expect(html).toContain('<option value="nonflagged" selected>');
  });
});

describe('renderCaseView', () => {
  it('shows AI verdict, arm, highlighted report, and the form', () => {
    const html = renderCaseView(DETAIL, REPORT);
    expect(html).toContain('POSITIVE for ICH');
    expect(html).toContain('(score 0.871)');
    expect(html).toContain('Arm: flagged');
    expect(html).toContain('ev-negated');
    expect(html).toContain('data-role="adjudication"');
    expect(html).toContain('name="reviewer_id"');
    expect(html).toContain('value="TRUE_POSITIVE_MISSED"');
  });

  it('renders negated-only evidence with negated styling only', () => {
    const html = renderCaseView(DETAIL, REPORT);
    expect(html).toContain('ev-negated');
    expect(html).not.toContain('ev-affirmed');
    expect(html).not.toContain('ev-uncertain');
  });

  it('shows a prior verdict when present', () => {
    const adjudicated: TriageDetailDto = {
      ...DETAIL,
      status: 'ADJUDICATED',
      adjudication: {
        study_id: 'QA-00004', reviewer_id: 'nr-1',
        outcome: 'AI_FALSE_POSITIVE', decided_at: '2024-03-02T08:00:00Z',
      },
    };
    const html = renderCaseView(adjudicated, REPORT);
    expect(html).toContain('AI_FALSE_POSITIVE');
    expect(html).toContain('nr-1');
  });
});

describe('renderMetricsPanel', () => {
  const METRICS: MetricsDto = {
    cohort_size: 1936, ai_positive_total: 381, flagged_count: 190,
    nonflagged_count: 191, queue_size: 29, missed_flagged: 1,
    missed_nonflagged: 5, missed_rate_flagged: 0.005263,
    missed_rate_nonflagged: 0.026178, rate_basis: 'AI_POSITIVE',
    effort_reduction: 0.985021, ci_flagged: [0.00093, 0.029206],
    ci_nonflagged: [0.011232, 0.059808], p_value: 0.215049,
  };

  it('displays the three headline percentages', () => {
    const html = renderMetricsPanel(metricsPanelModel(METRICS));
    expect(html).toContain('0.53%');
    expect(html).toContain('2.62%');
    expect(html).toContain('98.50%');
    expect(html).toContain('0.2150');
  });

  it('renders the pending state as a message, not numbers', () => {
    const html = renderMetricsPanel(metricsPendingModel(29));
    expect(html).toContain('29 cases pending adjudication');
    expect(html).not.toContain('%');
  });
});

describe('renderNotFound / renderBanner', () => {
  it('not-found view names the study and escapes it', () => {
    expect(renderNotFound('<x>')).toContain('&lt;x&gt;');
  });

  it('banner offers a retry control', () => {
    expect(renderBanner('Service unreachable')).toContain('data-action="retry"');
  });
});

describe('routing and form parsing', () => {
  it('parses queue and case routes', () => {
    expect(parseRoute('')).toEqual({ view: 'queue' });
    expect(parseRoute('#/queue')).toEqual({ view: 'queue' });
    expect(parseRoute('#/case/QA-00004')).toEqual({ view: 'case', studyId: 'QA-00004' });
    expect(parseRoute('#/case/A%2FB')).toEqual({ view: 'case', studyId: 'A/B' });
  });

  it('builds an adjudication payload from form data', () => {
    const data = new FormData();
    data.set('outcome', 'TRUE_POSITIVE_MISSED');
    data.set('reviewer_id', '  nr-1  ');
    data.set('note', '');
    expect(adjudicationFromForm(data)).toEqual({
      reviewer_id: 'nr-1',
      outcome: 'TRUE_POSITIVE_MISSED',
    });
  });

  it('rejects a form without outcome or reviewer', () => {
    const missingOutcome = new FormData();
    missingOutcome.set('reviewer_id', 'nr-1');
    expect(() => adjudicationFromForm(missingOutcome)).toThrow(/outcome/);

    const missingReviewer = new FormData();
    missingReviewer.set('outcome', 'OTHER');
    expect(() => adjudicationFromForm(missingReviewer)).toThrow(/reviewer/);
  });
});
