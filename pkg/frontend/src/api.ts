/** Typed client for the QA service. The UI holds no authoritative state:
 * every number it shows comes from these calls, every mutation goes through
 * submitAdjudication. */

import type {
  AdjudicationFormValues,
  MetricsDto,
  QueueFilters,
  ReportDto,
  TriageDetailDto,
  TriageItemDto,
  WorklistRowDto,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly pending?: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** Network-level failure: service down, DNS, refused connection. */
export class ServiceUnreachable extends Error {
  constructor(readonly cause_: unknown) {
    super('service unreachable');
    this.name = 'ServiceUnreachable';
  }
}

interface ErrorBody {
  error?: { code?: string; message?: string; pending?: number };
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'error';
  let message = `${response.status} ${response.statusText}`;
  let pending: number | undefined;
  try {
    const body = (await response.json()) as ErrorBody;
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      pending = body.error.pending;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, code, message, pending);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  fetchQueue(filters: QueueFilters = {}): Promise<TriageItemDto[]> {
    const params = new URLSearchParams();
    if (filters.arm) params.set('arm', filters.arm);
    if (filters.concordance) params.set('class', filters.concordance);
    const query = params.toString();
    return this.request<TriageItemDto[]>(`/v1/triage/queue${query ? `?${query}` : ''}`);
  }

  fetchCase(studyId: string): Promise<TriageDetailDto> {
    return this.request<TriageDetailDto>(`/v1/triage/${encodeURIComponent(studyId)}`);
  }

  fetchReport(studyId: string): Promise<ReportDto> {
    return this.request<ReportDto>(`/v1/reports/${encodeURIComponent(studyId)}`);
  }

  fetchMetrics(): Promise<MetricsDto> {
    return this.request<MetricsDto>('/v1/metrics');
  }

  fetchWorklist(): Promise<WorklistRowDto[]> {
    return this.request<WorklistRowDto[]>('/v1/worklist');
  }

  submitAdjudication(
    studyId: string,
    form: AdjudicationFormValues,
  ): Promise<TriageItemDto> {
    return this.request<TriageItemDto>(
      `/v1/triage/${encodeURIComponent(studyId)}/adjudication`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(form),
      },
    );
  }
}
