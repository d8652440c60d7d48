/** Wire shapes served by the QA service; field names mirror the JSON exactly. */

export type Arm = 'flagged' | 'nonflagged';

export type ConcordanceClass =
  | 'AI_POS_NLP_POS'
  | 'AI_POS_NLP_NEG'
  | 'AI_NEG_NLP_POS'
  | 'AI_NEG_NLP_NEG';

export type Outcome =
  | 'TRUE_POSITIVE_MISSED'
  | 'REPORTED_NLP_ERROR'
  | 'AI_FALSE_POSITIVE'
  | 'OTHER';

export type Polarity = 'AFFIRMED' | 'NEGATED' | 'UNCERTAIN';

export interface TriageItemDto {
  study_id: string;
  concordance: ConcordanceClass;
  status: 'PENDING' | 'ADJUDICATED';
  enqueued_at: string;
  arm: Arm | null;
}

export interface AiFindingDto {
  study_id: string;
  finding_code: string;
  ai_positive: boolean;
  ai_score?: number;
  model_version: string;
  received_at: string;
}

export interface AdjudicationDto {
  study_id: string;
  reviewer_id: string;
  outcome: Outcome;
  decided_at: string;
  note?: string;
}

export interface TriageDetailDto extends TriageItemDto {
  ai: AiFindingDto | null;
  adjudication: AdjudicationDto | null;
}

export interface EvidenceSpanDto {
  sentence_index: number;
  start: number; // UTF-8 byte offset into the report text
  end: number;
  matched_term: string;
  polarity: Polarity;
}

export interface ReportDto {
  study_id: string;
  text: string;
  finalized_at: string;
  label: 'POSITIVE' | 'NEGATIVE' | null;
  classifier_version: string | null;
  evidence: EvidenceSpanDto[];
}

export interface MetricsDto {
  cohort_size: number;
  ai_positive_total: number;
  flagged_count: number;
  nonflagged_count: number;
  queue_size: number;
  missed_flagged: number;
  missed_nonflagged: number;
  missed_rate_flagged: number;
  missed_rate_nonflagged: number;
  rate_basis: 'AI_POSITIVE' | 'CONFIRMED_POSITIVE';
  effort_reduction: number;
  ci_flagged: [number, number];
  ci_nonflagged: [number, number];
  p_value: number;
}

export interface WorklistRowDto {
  study_id: string;
  flag_shown: boolean;
}

export interface AdjudicationFormValues {
  reviewer_id: string;
  outcome: Outcome;
  note?: string;
  decided_at?: string;
  amend?: boolean;
}

export interface QueueFilters {
  arm?: Arm;
  concordance?: ConcordanceClass;
}
