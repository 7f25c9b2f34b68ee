// engine-harness CLI: replay an attack-family sidecar against Node's RegExp
// engine over a pump ladder and print one timing sample per line, plus a
// final exponent fit.
//
// usage: node --import tsx src/cli.ts --sidecar fam.json [options]
//   --ladder k1,k2,...   pump counts            (default 64,128,256,512,1024)
//   --repetitions N      timed reps per rung    (default 5)
//   --timeout MS         per-rung hard limit    (default 10000)
//   --mode M             search | anchored      (default search)
//   --repeats N          pump-block copies, two-block layout only (default 1)
import { loadFamily } from "./family.js";
import { runLadder } from "./ladder.js";
import { fitExponent } from "./fit.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (!a.startsWith("--")) throw new Error(`unexpected argument: ${a}`);
    const v = argv[i + 1];
    if (v === undefined) throw new Error(`missing value for ${a}`);
    out.set(a.slice(2), v);
    i++;
  }
  return out;
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const sidecar = args.get("sidecar");
  if (!sidecar) {
    console.error("error: --sidecar FILE is required");
    return 2;
  }
  const mode = (args.get("mode") ?? "search") as "search" | "anchored";
  if (mode !== "search" && mode !== "anchored") {
    console.error(`error: unknown mode ${mode}`);
    return 2;
  }
  let fam;
  try {
    fam = loadFamily(sidecar);
  } catch (err) {
    console.error(`error: ${err}`);
    return 2;
  }
  const ladder = (args.get("ladder") ?? "64,128,256,512,1024")
    .split(",")
    .map((s) => parseInt(s, 10));
  const samples = runLadder(fam, {
    ladder,
    repetitions: parseInt(args.get("repetitions") ?? "5", 10),
    timeoutMs: parseInt(args.get("timeout") ?? "10000", 10),
    mode,
    repeats: parseInt(args.get("repeats") ?? "1", 10),
  });
  for (const s of samples) {
    console.log(JSON.stringify({ type: "timing", pattern: fam.pattern, mode, ...s }));
  }
  try {
    const fit = fitExponent(samples);
    console.log(JSON.stringify({ type: "timing_fit", pattern: fam.pattern, mode, ...fit }));
  } catch (err) {
    console.log(JSON.stringify({ type: "timing_fit", pattern: fam.pattern, mode, error: String(err) }));
  }
  return 0;
}

import { fileURLToPath } from "node:url";
if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
