// Pure fold from stream frames to the view model. Snapshots are taken
// verbatim: the client never recomputes a penalty, it only displays the
// latest snapshot the service sent (ticker contributions are differences of
// two server-sent values).

import { decSub } from "./decimal.js";
import type { TimelineEvent } from "./timeline.js";
import type {
  AlertIngestedPayload,
  EventRecordDoc,
  Objective,
  ResetAppliedPayload,
  ScoreSnapshot,
  TickerEntry,
  ValidationFrozenPayload,
} from "./types.js";

export interface TeamView {
  team: number;
  snapshot: ScoreSnapshot | null;
  ticker: TickerEntry[];
}

const TICKER_LIMIT = 30;

export class DashboardState {
  readonly teams = new Map<number, TeamView>();
  readonly timeline: TimelineEvent[] = [];
  seq = 0;

  private pendingAlert: { team: number; entry: TickerEntry } | null = null;

  private teamView(team: number): TeamView {
    let view = this.teams.get(team);
    if (!view) {
      view = { team, snapshot: null, ticker: [] };
      this.teams.set(team, view);
    }
    return view;
  }

  applyRecord(record: EventRecordDoc): void {
    if (record.seq <= this.seq) return; // replayed duplicate
    this.seq = record.seq;
    this.pendingAlert = null;

    if (record.kind === "AlertIngested") {
      const p = record.payload as unknown as AlertIngestedPayload;
      if (p.team === null || p.team === undefined) return;
      this.pendingAlert = {
        team: p.team,
        entry: {
          alertId: p.alert_id,
          ruleName: p.rule_name,
          ids: p.ids,
          severity: p.severity,
          contribution: null,
          at: record.committed_at,
        },
      };
    } else if (record.kind === "ResetApplied") {
      const p = record.payload as unknown as ResetAppliedPayload;
      this.timeline.push({
        team: p.team,
        label: `Reset ${p.reset_count}`,
        at: record.committed_at,
        penalty: null,
      });
    } else if (record.kind === "ValidationFrozen") {
      const p = record.payload as unknown as ValidationFrozenPayload;
      this.timeline.push({
        team: p.team,
        label: p.objective === "IT_FLAG" ? "IT Flag" : "OT Flag",
        at: p.frozen_at,
        penalty: p.frozen_penalty,
      });
    }
  }

  applyScore(snapshot: ScoreSnapshot): void {
    const view = this.teamView(snapshot.team);
    const previous = view.snapshot;
    view.snapshot = snapshot;

    const pending = this.pendingAlert;
    if (pending && pending.team === snapshot.team && snapshot.seq === this.seq) {
      const entry = pending.entry;
      if (previous && previous.epoch === snapshot.epoch) {
        entry.contribution = decSub(
          snapshot.effective_penalty,
          previous.effective_penalty,
        );
      } else if (!previous) {
        entry.contribution = snapshot.effective_penalty;
      }
      view.ticker.unshift(entry);
      if (view.ticker.length > TICKER_LIMIT) view.ticker.pop();
      this.pendingAlert = null;
    }
  }

  validationsFor(team: number, objective: Objective) {
    const snapshot = this.teams.get(team)?.snapshot;
    if (!snapshot) return [];
    return snapshot.validations.filter((v) => v.objective === objective);
  }

  teamNumbers(): number[] {
    return [...this.teams.keys()].sort((a, b) => a - b);
  }
}
