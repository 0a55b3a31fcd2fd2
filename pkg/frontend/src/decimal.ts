// Minimal exact decimal-string arithmetic. Scores arrive as decimal strings
// and float parsing would corrupt them (0.05 * 3 style artifacts), so the
// few operations the UI needs are done on scaled BigInts.

function parts(value: string): { units: bigint; scale: number } {
  const trimmed = value.trim();
  if (!/^-?\d+(\.\d+)?$/.test(trimmed)) {
    throw new Error(`not a decimal string: ${JSON.stringify(value)}`);
  }
  const neg = trimmed.startsWith("-");
  const body = neg ? trimmed.slice(1) : trimmed;
  const [whole, frac = ""] = body.split(".");
  const units = BigInt(whole + frac) * (neg ? -1n : 1n);
  return { units, scale: frac.length };
}

function toScale(units: bigint, from: number, to: number): bigint {
  return units * 10n ** BigInt(to - from);
}

function render(units: bigint, scale: number): string {
  const neg = units < 0n;
  const digits = (neg ? -units : units).toString().padStart(scale + 1, "0");
  const whole = digits.slice(0, digits.length - scale) || "0";
  const frac = scale > 0 ? "." + digits.slice(digits.length - scale) : "";
  return (neg ? "-" : "") + whole + frac;
}

export function decSub(a: string, b: string): string {
  const pa = parts(a);
  const pb = parts(b);
  const scale = Math.max(pa.scale, pb.scale);
  return render(toScale(pa.units, pa.scale, scale) - toScale(pb.units, pb.scale, scale), scale);
}

export function decCompare(a: string, b: string): number {
  const pa = parts(a);
  const pb = parts(b);
  const scale = Math.max(pa.scale, pb.scale);
  const ua = toScale(pa.units, pa.scale, scale);
  const ub = toScale(pb.units, pb.scale, scale);
  return ua < ub ? -1 : ua > ub ? 1 : 0;
}

export function decIsZero(a: string): boolean {
  return parts(a).units === 0n;
}
