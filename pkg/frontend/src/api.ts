// Thin wrappers over the service's HTTP surface. Every mutating call is
// driven by an explicit user action in the app layer; nothing here fires on
// its own.

import type { Cup, LeaderboardRow, Objective, ScoreSnapshot, ValidationDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiError {
  status: number;
  detail: string;
}

export interface ApiResult<T> {
  ok: boolean;
  value?: T;
  error?: ApiError;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly token: string | null;

  constructor(baseUrl: string, options: { fetchFn?: FetchLike; token?: string } = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.token = options.token ?? null;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["x-operator-token"] = this.token;
    return headers;
  }

  private async call<T>(path: string, init?: RequestInit): Promise<ApiResult<T>> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json().catch(() => null);
    if (response.ok) return { ok: true, value: body as T };
    const detail =
      body && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : `HTTP ${response.status}`;
    return { ok: false, error: { status: response.status, detail } };
  }

  score(team: number): Promise<ApiResult<ScoreSnapshot>> {
    return this.call(`/teams/${team}/score`);
  }

  leaderboard(cup: Cup): Promise<ApiResult<LeaderboardRow[]>> {
    return this.call(`/leaderboard/${cup}`);
  }

  validate(team: number, objective: Objective, writeup: string): Promise<ApiResult<ValidationDoc>> {
    return this.call(`/teams/${team}/validate`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ objective, writeup }),
    });
  }

  reset(team: number): Promise<ApiResult<Record<string, unknown>>> {
    return this.call(`/teams/${team}/reset`, {
      method: "POST",
      headers: this.headers(),
    });
  }
}
