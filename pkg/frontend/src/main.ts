// Browser entry point. Query parameters select the backend and the team:
//   index.html?base=http://127.0.0.1:8000&team=2&token=...

import { mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("base") ?? window.location.origin;
const teamParam = params.get("team");
const team = teamParam ? Number.parseInt(teamParam, 10) : undefined;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

mountApp(root, {
  baseUrl: base,
  team: Number.isFinite(team) ? team : undefined,
  token: params.get("token") ?? undefined,
});
