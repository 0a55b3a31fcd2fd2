// Small presentation helpers shared by the views.

export function countdownTo(isoUntil: string, now: Date): string | null {
  const until = Date.parse(isoUntil);
  if (Number.isNaN(until)) return null;
  const left = Math.ceil((until - now.getTime()) / 1000);
  if (left <= 0) return null;
  const mm = Math.floor(left / 60);
  const ss = left % 60;
  return `${String(mm).padStart(2, "0")}:${String(ss).padStart(2, "0")}`;
}

export function ageSeconds(sinceMs: number, now: Date): number {
  return Math.max(0, Math.floor((now.getTime() - sinceMs) / 1000));
}

export function ageLabel(seconds: number): string {
  if (seconds < 60) return `${seconds}s`;
  const m = Math.floor(seconds / 60);
  return `${m}m ${seconds % 60}s`;
}

export function clockLabel(iso: string): string {
  const at = new Date(iso);
  if (Number.isNaN(at.getTime())) return iso;
  const hh = String(at.getUTCHours()).padStart(2, "0");
  const mm = String(at.getUTCMinutes()).padStart(2, "0");
  return `${hh}:${mm}`;
}
