import type { TimingSample } from "./ladder.js";

export interface ExponentFit {
  exponent: number;
  r2: number;
  samples_used: number;
}

/** Fit seconds ~ c * length^e by ordinary least squares in log-log space.
 *
 *  Samples below `floorSeconds` are dominated by process/interpreter noise
 *  and are excluded, as are timed-out or errored rungs. */
export function fitExponent(
  samples: TimingSample[],
  floorSeconds = 1e-3,
): ExponentFit {
  const usable = samples.filter(
    (s) => !s.timed_out && !s.error && Number.isFinite(s.seconds) && s.seconds >= floorSeconds,
  );
  if (usable.length < 3) {
    throw new Error(
      `need at least 3 usable samples above the ${floorSeconds}s noise floor, got ${usable.length}`,
    );
  }
  const xs = usable.map((s) => Math.log(s.length));
  const ys = usable.map((s) => Math.log(s.seconds));
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) ** 2;
    syy += (ys[i] - my) ** 2;
  }
  if (sxx === 0) throw new Error("all usable samples have the same length");
  const slope = sxy / sxx;
  const r2 = syy === 0 ? 1 : (sxy * sxy) / (sxx * syy);
  return { exponent: slope, r2, samples_used: n };
}
