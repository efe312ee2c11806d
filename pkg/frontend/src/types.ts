// Wire types mirroring the service's JSON documents.

export type FactTypeName =
  | "value"
  | "difference"
  | "proportion"
  | "trend"
  | "categorization"
  | "distribution"
  | "rank"
  | "association"
  | "extreme"
  | "outlier";

export interface FilterRecord {
  field: string;
  value: string;
}

export interface MeasureRecord {
  field: string;
  aggregate: string;
}

export interface FactRecord {
  type: FactTypeName;
  measure: MeasureRecord[];
  subspace: FilterRecord[];
  breakdown: { field: string }[];
  focus: FilterRecord[];
}

export interface StoryCriteria {
  diversity: number;
  logicality: number;
  integrity: number;
  entropy: number;
  reward: number;
}

export interface StoryRecord {
  facts: FactRecord[];
  relations: string[];
  reward: number;
  criteria: StoryCriteria;
  goal_unmet: boolean;
  warning: string | null;
}

export interface ChartRecord {
  chart: string;
  category_field: string | null;
  measure_fields: string[];
  data: Record<string, unknown>[];
  highlights: string[];
  caption: string;
  annotation: string | null;
}

export interface FactScoreRecord {
  probability: number;
  self_information_bits: number;
  significance: number;
  importance: number;
  zero_support: boolean;
}

export interface StoryDocument {
  id: string;
  dataset_id: string;
  revision: number;
  story: StoryRecord;
  charts: ChartRecord[];
  captions: string[];
  scores: FactScoreRecord[];
  params: Record<string, unknown>;
}

export interface DatasetHandle {
  id: string;
  row_count: number;
  schema: { name: string; kind: string }[];
  created_at: string;
}

export interface ShareResponse {
  url: string;
  embed: string;
  token: string;
}

export interface GenerateParams {
  goal: {
    max_length: number;
    min_information_bits?: number | null;
    time_budget?: number | null;
    iteration_budget?: number | null;
  };
  weights: { diversity: number; logicality: number; integrity: number };
  chart_diversity: number;
  seed: number;
}

export interface ApiError {
  code: string;
  message: string;
  details: unknown[];
}

export type RenderMode = "storyline" | "swiper" | "factsheet";
