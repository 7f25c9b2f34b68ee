import { spawnSync } from "node:child_process";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { FamilySidecar, materialize } from "./family.js";

const CHILD = join(dirname(fileURLToPath(import.meta.url)), "measure-child.mjs");

export interface TimingSample {
  k: number;
  length: number;
  /** Median wall-clock seconds over the repetitions (NaN if unusable). */
  seconds: number;
  mean_seconds: number;
  reps: number;
  matched: boolean | null;
  timed_out: boolean;
  error?: string;
}

export interface LadderOptions {
  ladder: number[];
  /** Timed repetitions per rung (median reported). */
  repetitions?: number;
  /** Hard per-rung wall-clock budget in milliseconds. */
  timeoutMs?: number;
  /** "search" = engine scans all start positions; "anchored" pins the start. */
  mode?: "search" | "anchored";
  /** Extra pump-block copies for the two-block layout. */
  repeats?: number;
}

function median(xs: number[]): number {
  const s = [...xs].sort((a, b) => a - b);
  const m = s.length >> 1;
  return s.length % 2 ? s[m] : (s[m - 1] + s[m]) / 2;
}

/** Time one input in an isolated node subprocess with a hard timeout. */
export function timeInput(
  pattern: string,
  flags: string,
  input: string,
  mode: "search" | "anchored",
  reps: number,
  timeoutMs: number,
): Omit<TimingSample, "k" | "length"> {
  const res = spawnSync(process.execPath, [CHILD], {
    input: JSON.stringify({ pattern, flags, input, mode, reps }),
    encoding: "utf-8",
    timeout: timeoutMs,
    killSignal: "SIGKILL",
    maxBuffer: 1 << 20,
  });
  const base = { seconds: NaN, mean_seconds: NaN, reps, matched: null, timed_out: false };
  if (res.error && (res.error as NodeJS.ErrnoException).code === "ETIMEDOUT") {
    return { ...base, timed_out: true };
  }
  if (res.error) return { ...base, error: String(res.error) };
  if (res.status !== 0) {
    // A SIGKILL'd child with no error object is still a timeout.
    if (res.signal === "SIGKILL") return { ...base, timed_out: true };
    return { ...base, error: `worker exited with status ${res.status}: ${res.stderr}` };
  }
  const out = JSON.parse(res.stdout);
  if (out.compileError) return { ...base, error: out.compileError };
  const secs: number[] = out.seconds;
  return {
    ...base,
    seconds: median(secs),
    mean_seconds: secs.reduce((a, b) => a + b, 0) / secs.length,
    matched: out.matched,
  };
}

/** Replay an attack family at each pump count in the ladder.
 *
 *  Each rung runs in its own subprocess; a rung that exceeds the timeout is
 *  marked timed_out and the ladder continues with the remaining rungs. */
export function runLadder(fam: FamilySidecar, opts: LadderOptions): TimingSample[] {
  const reps = opts.repetitions ?? 5;
  const timeoutMs = opts.timeoutMs ?? 10_000;
  const mode = opts.mode ?? "search";
  const out: TimingSample[] = [];
  for (const k of opts.ladder) {
    const input = materialize(fam, k, undefined, opts.repeats ?? 1);
    const t = timeInput(fam.pattern, fam.flags ?? "", input, mode, reps, timeoutMs);
    out.push({ k, length: input.length, ...t });
  }
  return out;
}
