// Wire types of the query service (see the repository README for the
// documented schema; this file mirrors it field for field).

export interface PredicateGroups {
  lane: string[];
  relation: string[];
  action: string[];
}

export type ConstraintKind = "changes" | "stays_constant" | "changes_into";

export interface ConstraintBody {
  kind: ConstraintKind;
  c: string[];
  c_prime?: string[];
}

export interface QueryBody {
  start: string[];
  end: string[];
  constraint: ConstraintBody | null;
  seed?: number;
  max_results?: number;
  min_len?: number;
  max_len?: number;
  continuation?: string;
}

export interface CarPayload {
  id: string;
  lane: number;
  x: number;
  speed: number;
}

export interface FramePayload {
  step: number;
  agent: CarPayload;
  npcs: CarPayload[];
  action: string;
  letter: string[];
  active_policy: string;
}

export interface ClipPayload {
  clip_id: string;
  trace_id: string;
  k: number;
  ell: number;
  frames: FramePayload[];
}

export interface QueryResultPayload {
  clips: ClipPayload[];
  warnings: string[];
  continuation: string | null;
  sample_seed: number;
  total_matches: number;
  formula: string;
  timing: Record<string, number>;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string;
}
