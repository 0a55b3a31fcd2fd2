// Dashboard composition: wires the stream fold, the HTTP client, and the
// DOM together. The static skeleton (form controls) is built once so user
// input survives re-renders; data regions are re-rendered wholesale from the
// state fold, which keeps the view a pure function of the stream plus the
// server's leaderboard responses.

import { ApiClient, type FetchLike } from "./api.js";
import { DashboardState, type TeamView } from "./state.js";
import { ScoreStream, type EventSourceFactory } from "./stream.js";
import { buildTimeline } from "./timeline.js";
import { renderTimelineInto } from "./timeline-view.js";
import { ageLabel, ageSeconds, clockLabel, countdownTo } from "./format.js";
import type { Cup, LeaderboardRow, Objective, ScoreSnapshot } from "./types.js";

export interface AppOptions {
  baseUrl: string;
  team?: number;
  token?: string;
  makeEventSource?: EventSourceFactory;
  fetchFn?: FetchLike;
  confirmFn?: (message: string) => boolean;
  retryMs?: number;
  staleAfterSeconds?: number;
  now?: () => Date;
}

export interface AppHandle {
  state: DashboardState;
  stream: ScoreStream;
  api: ApiClient;
  render(): void;
  whenIdle(): Promise<void>;
  dispose(): void;
}

const CUPS: Cup[] = ["enterprise", "ot"];

function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function mountApp(root: HTMLElement, options: AppOptions): AppHandle {
  const now = options.now ?? (() => new Date());
  const confirmAction =
    options.confirmFn ?? ((message: string) => window.confirm(message));
  const staleAfter = options.staleAfterSeconds ?? 10;

  const state = new DashboardState();
  const api = new ApiClient(options.baseUrl, {
    fetchFn: options.fetchFn,
    token: options.token,
  });
  const stream = new ScoreStream({
    baseUrl: options.baseUrl,
    retryMs: options.retryMs,
    makeEventSource: options.makeEventSource,
  });

  let showAllTeams = true;
  let actionTeam = options.team ?? 1;
  const leaderboards = new Map<Cup, LeaderboardRow[]>();
  const inflight = new Set<Promise<unknown>>();

  root.innerHTML = `
    <header>
      <h1>rangescore</h1>
      <span data-testid="status"></span>
      <div data-testid="stale-banner" hidden></div>
    </header>
    <section class="controls">
      <label>team
        <input data-testid="team-select" type="number" min="1" value="${actionTeam}">
      </label>
      <button data-testid="visibility-toggle" type="button"></button>
    </section>
    <section data-testid="leaderboards"></section>
    <section data-testid="teams"></section>
    <section data-testid="timeline-section">
      <h2>timeline</h2>
      <svg data-testid="timeline" viewBox="0 0 640 240" width="640" height="240"></svg>
    </section>
    <section class="actions">
      <form data-testid="validate-form">
        <select data-testid="objective">
          <option value="IT_FLAG">IT flag</option>
          <option value="OT_FLAG">OT flag</option>
        </select>
        <textarea data-testid="writeup" placeholder="attacker writeup"></textarea>
        <button data-testid="validate-btn" type="submit" disabled>validate</button>
      </form>
      <div data-testid="validate-result"></div>
      <button data-testid="reset-btn" type="button">reset environment</button>
      <div data-testid="reset-result"></div>
    </section>
  `;

  const el = {
    status: root.querySelector<HTMLElement>('[data-testid="status"]')!,
    banner: root.querySelector<HTMLElement>('[data-testid="stale-banner"]')!,
    teamSelect: root.querySelector<HTMLInputElement>('[data-testid="team-select"]')!,
    visibility: root.querySelector<HTMLButtonElement>('[data-testid="visibility-toggle"]')!,
    leaderboards: root.querySelector<HTMLElement>('[data-testid="leaderboards"]')!,
    teams: root.querySelector<HTMLElement>('[data-testid="teams"]')!,
    timeline: root.querySelector<SVGSVGElement>('[data-testid="timeline"]')!,
    form: root.querySelector<HTMLFormElement>('[data-testid="validate-form"]')!,
    objective: root.querySelector<HTMLSelectElement>('[data-testid="objective"]')!,
    writeup: root.querySelector<HTMLTextAreaElement>('[data-testid="writeup"]')!,
    validateBtn: root.querySelector<HTMLButtonElement>('[data-testid="validate-btn"]')!,
    validateResult: root.querySelector<HTMLElement>('[data-testid="validate-result"]')!,
    resetBtn: root.querySelector<HTMLButtonElement>('[data-testid="reset-btn"]')!,
    resetResult: root.querySelector<HTMLElement>('[data-testid="reset-result"]')!,
  };

  function track<T>(promise: Promise<T>): Promise<T> {
    inflight.add(promise);
    promise.finally(() => inflight.delete(promise));
    return promise;
  }

  function refreshLeaderboards(): void {
    for (const cup of CUPS) {
      track(
        api.leaderboard(cup).then((result) => {
          if (result.ok && result.value) leaderboards.set(cup, result.value);
          renderLeaderboards();
        }),
      );
    }
  }

  function renderStatus(): void {
    el.status.textContent = stream.status;
    const age =
      stream.lastFrameAt === null ? null : ageSeconds(stream.lastFrameAt, now());
    const stale =
      stream.status !== "live" || (age !== null && age > staleAfter);
    if (stale) {
      el.banner.hidden = false;
      el.banner.textContent =
        age === null
          ? "stale data: no updates received yet"
          : `stale data: last update ${ageLabel(age)} ago`;
    } else {
      el.banner.hidden = true;
      el.banner.textContent = "";
    }
  }

  function renderLeaderboards(): void {
    const blocks = CUPS.map((cup) => {
      const rows = leaderboards.get(cup) ?? [];
      const body = rows
        .map(
          (row) => `
            <tr>
              <td>${row.rank}</td>
              <td>team ${row.team}</td>
              <td>${esc(row.frozen_penalty)}</td>
              <td>${row.hosts_accessed}</td>
              <td>${row.network_footprint}</td>
              <td>${esc(row.time_to_objective_seconds)}s</td>
            </tr>`,
        )
        .join("");
      return `
        <table data-cup="${cup}">
          <caption>${cup} cup</caption>
          <thead><tr>
            <th>#</th><th>team</th><th>penalty</th>
            <th>hosts</th><th>footprint</th><th>time</th>
          </tr></thead>
          <tbody>${body}</tbody>
        </table>`;
    });
    el.leaderboards.innerHTML = blocks.join("");
  }

  function renderCounts(snapshot: ScoreSnapshot): string {
    if (snapshot.counts.length === 0) return "<p class='quiet'>no alerts this epoch</p>";
    const rows = snapshot.counts
      .map(
        ([ids, severity, n]) =>
          `<tr><td>${esc(ids)}</td><td>${esc(severity)}</td><td>${n}</td></tr>`,
      )
      .join("");
    return `<table class="counts"><tbody>${rows}</tbody></table>`;
  }

  function renderValidationStatus(view: TeamView): string {
    const objectives: Objective[] = ["IT_FLAG", "OT_FLAG"];
    return objectives
      .map((objective) => {
        const entries = view.snapshot?.validations.filter(
          (v) => v.objective === objective,
        ) ?? [];
        const latest = entries[entries.length - 1];
        const label = objective === "IT_FLAG" ? "IT flag" : "OT flag";
        const text = latest
          ? `frozen at ${esc(latest.frozen_penalty)}`
          : "open";
        return `<span data-testid="val-${objective}" class="${latest ? "frozen" : "open"}">${label}: ${text}</span>`;
      })
      .join(" ");
  }

  function renderTeamCard(view: TeamView): string {
    const snapshot = view.snapshot;
    if (!snapshot) return "";
    const lockLeft = snapshot.lockout_until
      ? countdownTo(snapshot.lockout_until, now())
      : null;
    const ticker = view.ticker
      .map(
        (entry) => `
          <li>
            <span class="rule">${esc(entry.ruleName)}</span>
            <span class="sev">${esc(entry.severity)}</span>
            ${entry.contribution === null ? "" : `<span class="delta">+${esc(entry.contribution)}</span>`}
          </li>`,
      )
      .join("");
    return `
      <article class="team-card" data-team="${snapshot.team}">
        <h3>team ${snapshot.team}</h3>
        <div class="effective" data-testid="effective-${snapshot.team}">${esc(snapshot.effective_penalty)}</div>
        <dl>
          <dt>penalty</dt><dd>${esc(snapshot.penalty)}</dd>
          <dt>multiplier</dt><dd>${esc(snapshot.multiplier)}</dd>
          <dt>resets</dt><dd>${snapshot.reset_count}</dd>
          <dt>lockout</dt>
          <dd data-testid="lockout-${snapshot.team}">${lockLeft ?? "none"}</dd>
        </dl>
        <div class="validations">${renderValidationStatus(view)}</div>
        ${renderCounts(snapshot)}
        <ol class="ticker" data-testid="ticker-${snapshot.team}">${ticker}</ol>
      </article>`;
  }

  function renderTeams(): void {
    const teams = state
      .teamNumbers()
      .filter((team) => showAllTeams || team === actionTeam)
      .map((team) => state.teams.get(team)!)
      .map((view) => renderTeamCard(view))
      .join("");
    el.teams.innerHTML = teams;
  }

  function renderActions(): void {
    el.visibility.textContent = showAllTeams ? "showing: all teams" : "showing: my team";
    el.validateBtn.disabled = el.writeup.value.trim() === "";
    const snapshot = state.teams.get(actionTeam)?.snapshot;
    const lockLeft = snapshot?.lockout_until
      ? countdownTo(snapshot.lockout_until, now())
      : null;
    el.resetBtn.disabled = lockLeft !== null;
    el.resetBtn.textContent = lockLeft
      ? `reset locked ${lockLeft}`
      : "reset environment";
  }

  function render(): void {
    renderStatus();
    renderTeams();
    renderTimelineInto(
      el.timeline,
      buildTimeline(state.timeline, showAllTeams ? {} : { team: actionTeam }),
    );
    renderActions();
  }

  stream.onRecord = (record) => {
    state.applyRecord(record);
    if (record.kind === "ValidationFrozen") refreshLeaderboards();
    render();
  };
  stream.onScore = (snapshot) => {
    state.applyScore(snapshot);
    render();
  };
  stream.onStatus = () => renderStatus();

  el.teamSelect.addEventListener("change", () => {
    const value = Number.parseInt(el.teamSelect.value, 10);
    if (Number.isFinite(value) && value >= 1) actionTeam = value;
    render();
  });
  el.visibility.addEventListener("click", () => {
    showAllTeams = !showAllTeams;
    render();
  });
  el.writeup.addEventListener("input", () => renderActions());

  el.form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const writeup = el.writeup.value;
    if (writeup.trim() === "") return; // empty writeup never leaves the client
    const objective = el.objective.value as Objective;
    if (!confirmAction(`Freeze team ${actionTeam}'s score for ${objective}?`)) return;
    track(
      api.validate(actionTeam, objective, writeup).then((result) => {
        if (result.ok && result.value) {
          el.validateResult.innerHTML = `<span class="badge">frozen at ${esc(result.value.frozen_penalty)} (${clockLabel(result.value.frozen_at)})</span>`;
          el.writeup.value = "";
        } else if (result.error) {
          el.validateResult.textContent = result.error.detail;
        }
        render();
      }),
    );
  });

  el.resetBtn.addEventListener("click", () => {
    if (!confirmAction(`Reset team ${actionTeam}'s environment? Lockout and multiplier rules apply.`)) {
      return;
    }
    track(
      api.reset(actionTeam).then((result) => {
        if (result.ok && result.value) {
          el.resetResult.textContent = `reset ${result.value["reset_count"]} committed; lockout until ${result.value["lockout_until"]}`;
        } else if (result.error) {
          el.resetResult.textContent = result.error.detail;
        }
        render();
      }),
    );
  });

  const tick = setInterval(() => {
    renderStatus();
    renderActions();
    renderTeams(); // lockout countdowns live in the cards
  }, 1000);

  refreshLeaderboards();
  render();
  stream.connect();

  async function whenIdle(): Promise<void> {
    while (inflight.size > 0) {
      await Promise.all([...inflight]);
    }
  }

  return {
    state,
    stream,
    api,
    render,
    whenIdle,
    dispose() {
      clearInterval(tick);
      stream.close();
    },
  };
}
