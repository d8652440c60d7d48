/** Page wiring: hash routing, data fetching, form submission, error banner.
 * All rendering goes through the pure builders in render.ts; all data and
 * mutations go through ApiClient. */

import { ApiClient, ApiError, ServiceUnreachable } from './api.js';
import {
  metricsEmptyModel,
  metricsPanelModel,
  metricsPendingModel,
  type MetricsModel,
} from './format.js';
import {
  renderBanner,
  renderCaseView,
  renderMetricsPanel,
  renderNotFound,
  renderQueueView,
} from './render.js';
import type { AdjudicationFormValues, Outcome, QueueFilters } from './types.js';

export function parseRoute(hash: string): { view: 'queue' } | { view: 'case'; studyId: string } {
  const caseMatch = /^#\/case\/(.+)$/.exec(hash);
  if (caseMatch && caseMatch[1]) {
    return { view: 'case', studyId: decodeURIComponent(caseMatch[1]) };
  }
  return { view: 'queue' };
}

/** Form payload for a submission; throws on missing required fields. */
export function adjudicationFromForm(data: FormData): AdjudicationFormValues {
  const outcome = data.get('outcome');
  const reviewer = data.get('reviewer_id');
  if (typeof outcome !== 'string' || !outcome) {
    throw new Error('select an outcome');
  }
  if (typeof reviewer !== 'string' || !reviewer.trim()) {
    throw new Error('reviewer id is required');
  }
  const note = data.get('note');
  const values: AdjudicationFormValues = {
    reviewer_id: reviewer.trim(),
    outcome: outcome as Outcome,
  };
  if (typeof note === 'string' && note.trim()) {
    values.note = note.trim();
  }
  return values;
}

export class App {
  private filters: QueueFilters = {};

  constructor(
    private readonly client: ApiClient,
    private readonly main: HTMLElement,
    private readonly aside: HTMLElement,
    private readonly bannerHost: HTMLElement,
  ) {}

  start(): void {
    window.addEventListener('hashchange', () => void this.route());
    void this.route();
  }

  async route(): Promise<void> {
    const route = parseRoute(window.location.hash);
    if (route.view === 'case') {
      await this.showCase(route.studyId);
    } else {
      await this.showQueue();
    }
  }

  private clearBanner(): void {
    this.bannerHost.innerHTML = '';
  }

  private showUnreachable(): void {
    // Never leave stale rows looking live: blank the data regions too.
    this.main.innerHTML = '';
    this.aside.innerHTML = '';
    this.bannerHost.innerHTML = renderBanner(
      'Service unreachable. Check the base URL and that the QA service is running.',
    );
    this.bannerHost
      .querySelector('[data-action="retry"]')
      ?.addEventListener('click', () => void this.route());
  }

  async showQueue(): Promise<void> {
    try {
      const items = await this.client.fetchQueue(this.filters);
      this.clearBanner();
      this.main.innerHTML = renderQueueView(items, this.filters);
      this.wireFilterBar();
      await this.refreshMetrics();
    } catch (error) {
      if (error instanceof ServiceUnreachable) {
        this.showUnreachable();
        return;
      }
      throw error;
    }
  }

  private wireFilterBar(): void {
    const bar = this.main.querySelector<HTMLFormElement>('[data-role="filters"]');
    bar?.addEventListener('change', () => {
      const data = new FormData(bar);
      const arm = data.get('arm');
      const cls = data.get('class');
      this.filters = {
        ...(arm ? { arm: arm as QueueFilters['arm'] } : {}),
        ...(cls ? { concordance: cls as QueueFilters['concordance'] } : {}),
      };
      void this.showQueue();
    });
  }

  async refreshMetrics(): Promise<void> {
    let model: MetricsModel;
    try {
      model = metricsPanelModel(await this.client.fetchMetrics());
    } catch (error) {
      if (error instanceof ApiError && error.code === 'incomplete_adjudication') {
        model = metricsPendingModel(error.pending ?? 0);
      } else if (error instanceof ApiError && error.status === 409) {
        model = metricsEmptyModel();
      } else if (error instanceof ServiceUnreachable) {
        this.showUnreachable();
        return;
      } else {
        throw error;
      }
    }
    this.aside.innerHTML = renderMetricsPanel(model);
  }

  async showCase(studyId: string): Promise<void> {
    try {
      const detail = await this.client.fetchCase(studyId);
      const report = await this.client.fetchReport(studyId);
      this.clearBanner();
      this.main.innerHTML = renderCaseView(detail, report);
      this.wireAdjudicationForm(studyId);
      await this.refreshMetrics();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.main.innerHTML = renderNotFound(studyId);
        return;
      }
      if (error instanceof ServiceUnreachable) {
        this.showUnreachable();
        return;
      }
      throw error;
    }
  }

  private wireAdjudicationForm(studyId: string): void {
    const form = this.main.querySelector<HTMLFormElement>('[data-role="adjudication"]');
    const errorLine = this.main.querySelector<HTMLElement>('[data-role="form-error"]');
    form?.addEventListener('submit', (event) => {
      event.preventDefault();
      void (async () => {
        try {
          const values = adjudicationFromForm(new FormData(form));
          await this.client.submitAdjudication(studyId, values);
          window.location.hash = '#/queue';
          await this.route(); // optimistic refresh: queue + metrics re-read
        } catch (error) {
          if (errorLine && (error instanceof ApiError || error instanceof Error)) {
            errorLine.textContent = error.message;
            errorLine.hidden = false;
          } else {
            throw error;
          }
        }
      })();
    });
  }
}
