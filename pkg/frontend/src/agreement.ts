import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface MatchCase {
  pattern: string;
  input: string;
}

export interface Disagreement {
  case: MatchCase;
  engine: boolean;
  matcher: boolean | string;
}

/** Deterministic PRNG (mulberry32) so the differential corpus is reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const ATOMS = ["a", "b", "c", "[ab]", "[bc]"];

function pick<T>(rnd: () => number, xs: T[]): T {
  return xs[Math.floor(rnd() * xs.length)];
}

function piece(rnd: () => number): string {
  const a = pick(rnd, ATOMS);
  const r = rnd();
  if (r < 0.25) return a + "*";
  if (r < 0.4) return a + "?";
  return a;
}

function seq(rnd: () => number, n: number): string {
  let s = "";
  for (let i = 0; i < n; i++) s += piece(rnd);
  return s;
}

/** Random pattern restricted to constructs where the engine and the matcher
 *  agree on acceptance: any backreference points at a capture group that is
 *  mandatory on every path and already closed, so it can never be unset. */
export function randomPattern(rnd: () => number): string {
  const r = rnd();
  if (r < 0.45) {
    // mandatory capture followed later by its backreference
    const body = rnd() < 0.3 ? seq(rnd, 1) + "|" + seq(rnd, 1) : seq(rnd, 2);
    return `(${body})` + seq(rnd, 1 + Math.floor(rnd() * 2)) + "\\1" + seq(rnd, Math.floor(rnd() * 2));
  }
  if (r < 0.65) {
    return `(?:${seq(rnd, 2)}|${seq(rnd, 2)})` + seq(rnd, Math.floor(rnd() * 3));
  }
  return seq(rnd, 2 + Math.floor(rnd() * 3));
}

export function randomInput(rnd: () => number, maxLen = 8): string {
  const n = Math.floor(rnd() * (maxLen + 1));
  let s = "";
  for (let i = 0; i < n; i++) s += pick(rnd, ["a", "b", "c"]);
  return s;
}

export function generateCases(count: number, seed: number): MatchCase[] {
  const rnd = mulberry32(seed);
  const out: MatchCase[] = [];
  while (out.length < count) {
    out.push({ pattern: randomPattern(rnd), input: randomInput(rnd) });
  }
  return out;
}

/** Run the matcher CLI over a batch of cases and return its accept verdicts. */
export function matcherVerdicts(cases: MatchCase[]): (boolean | string)[] {
  const dir = mkdtempSync(join(tmpdir(), "redosbr-agree-"));
  try {
    const batch = join(dir, "cases.jsonl");
    writeFileSync(
      batch,
      cases.map((c) => JSON.stringify({ pattern: c.pattern, input: c.input })).join("\n") + "\n",
    );
    const res = spawnSync("python3", ["-m", "redosbr.cli", "match", "--batch", batch], {
      encoding: "utf-8",
      maxBuffer: 1 << 24,
    });
    if (res.status !== 0) {
      throw new Error(`redosbr match --batch failed: ${res.stderr}`);
    }
    const lines = res.stdout.trim().split("\n");
    if (lines.length !== cases.length) {
      throw new Error(`expected ${cases.length} verdict rows, got ${lines.length}`);
    }
    return lines.map((line) => {
      const row = JSON.parse(line);
      if (row.error) return `matcher error: ${row.error}`;
      if (row.aborted) return "matcher aborted on step limit";
      return row.accepted as boolean;
    });
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Differential check: Node RegExp search vs the instrumented matcher. */
export function agreementCheck(cases: MatchCase[]): Disagreement[] {
  const verdicts = matcherVerdicts(cases);
  const bad: Disagreement[] = [];
  cases.forEach((c, i) => {
    const engine = new RegExp(c.pattern).test(c.input);
    if (verdicts[i] !== engine) {
      bad.push({ case: c, engine, matcher: verdicts[i] });
    }
  });
  return bad;
}
