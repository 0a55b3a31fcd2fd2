// Competition timeline model: flag, reset, and writeup markers positioned
// by timestamp, with the penalty axis on a log scale (lower is better).
// Geometry only; exact penalty strings stay untouched for display.

export interface TimelineEvent {
  team?: number;
  label: string;
  at: string;
  penalty?: string | null;
}

export interface TimelineMarker {
  label: string;
  at: string;
  team?: number;
  penalty: string | null;
  x: number; // 0..1 along the time axis
  y: number | null; // 0..1 up the penalty axis (0 = best); null = baseline
}

export interface AxisTick {
  value: number;
  y: number;
}

export interface Timeline {
  markers: TimelineMarker[];
  axis: { minExp: number; maxExp: number; decades: number; ticks: AxisTick[] };
}

export function decadesBetween(a: string | number, b: string | number): number {
  return Math.abs(Math.log10(Number(a)) - Math.log10(Number(b)));
}

export function buildTimeline(
  events: TimelineEvent[],
  options: { team?: number } = {},
): Timeline {
  const picked = events
    .filter((e) => options.team === undefined || e.team === options.team)
    .map((e, i) => ({ e, t: Date.parse(e.at), i }))
    .sort((a, b) => (a.t !== b.t ? a.t - b.t : a.i - b.i));

  const values = picked
    .map(({ e }) => Number(e.penalty))
    .filter((v) => Number.isFinite(v) && v > 0);
  let minExp = 0;
  let maxExp = 3;
  if (values.length > 0) {
    minExp = Math.floor(Math.log10(Math.min(...values)));
    maxExp = Math.ceil(Math.log10(Math.max(...values)));
    if (maxExp <= minExp) maxExp = minExp + 1;
  }
  const decades = maxExp - minExp;

  const t0 = picked.length > 0 ? picked[0]!.t : 0;
  const span = picked.length > 0 ? picked[picked.length - 1]!.t - t0 : 0;

  const markers: TimelineMarker[] = picked.map(({ e, t }) => {
    const value = Number(e.penalty);
    const usable = Number.isFinite(value) && value > 0;
    return {
      label: e.label,
      at: e.at,
      team: e.team,
      penalty: e.penalty ?? null,
      x: span > 0 ? (t - t0) / span : 0,
      y: usable ? (Math.log10(value) - minExp) / decades : null,
    };
  });

  const ticks: AxisTick[] = [];
  for (let exp = minExp; exp <= maxExp; exp += 1) {
    ticks.push({ value: 10 ** exp, y: (exp - minExp) / decades });
  }
  return { markers, axis: { minExp, maxExp, decades, ticks } };
}
