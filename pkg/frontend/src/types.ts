// Shapes the scoring service puts on the wire. Decimal quantities arrive as
// strings and stay strings; the client never re-derives a score.

export type Objective = "IT_FLAG" | "OT_FLAG";
export type Cup = "enterprise" | "ot";

export type RecordKind =
  | "AlertIngested"
  | "ResetApplied"
  | "ValidationFrozen"
  | "ProvisionRequested"
  | "ProvisionAcked"
  | "LabelAssigned";

export interface EventRecordDoc {
  seq: number;
  kind: RecordKind;
  committed_at: string;
  payload: Record<string, unknown>;
}

export interface AlertIngestedPayload {
  alert_id: number;
  ids: string;
  severity: "Critical" | "High" | "Medium" | "Low";
  native_severity: number;
  sensor_timestamp: string;
  rule_id: string;
  rule_name: string;
  team: number | null;
  src_ip: string | null;
  dst_ip: string | null;
  raw_ref: number;
}

export interface ResetAppliedPayload {
  team: number;
  epoch: number;
  reset_count: number;
  multiplier: string;
  lockout_until: string;
}

export interface ValidationFrozenPayload {
  team: number;
  objective: Objective;
  epoch: number;
  frozen_penalty: string;
  writeup: string;
  frozen_at: string;
  hosts_accessed: number;
  network_footprint: number;
  time_to_objective_us: number;
}

export interface ValidationDoc {
  team: number;
  objective: Objective;
  epoch: number;
  frozen_penalty: string;
  writeup: string;
  frozen_at: string;
  hosts_accessed: number;
  network_footprint: number;
  time_to_objective_us: number;
}

// Full recomputed snapshot sent as an `event: score` frame and by
// GET /teams/{team}/score. counts rows are [ids, severity, n].
export interface ScoreSnapshot {
  seq: number;
  team: number;
  epoch: number;
  penalty: string;
  effective_penalty: string;
  multiplier: string;
  reset_count: number;
  lockout_until: string | null;
  counts: [string, string, number][];
  hosts_accessed: number;
  network_footprint: number;
  validations: ValidationDoc[];
  locked?: boolean;
}

export interface LeaderboardRow {
  cup: Cup;
  rank: number;
  team: number;
  frozen_penalty: string;
  hosts_accessed: number;
  network_footprint: number;
  time_to_objective_seconds: string;
  frozen_at: string;
}

export interface TickerEntry {
  alertId: number;
  ruleName: string;
  ids: string;
  severity: string;
  // effective-penalty delta between the two surrounding snapshots; a
  // difference of server values, not a recomputation of the sum
  contribution: string | null;
  at: string;
}
