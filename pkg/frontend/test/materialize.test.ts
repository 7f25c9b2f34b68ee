import { describe, expect, it } from "vitest";
import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { FamilySidecar, materialize } from "../src/family.js";

/** Ask the detector CLI for an attack string and its pump-parameter sidecar. */
function cliAttack(
  pattern: string,
  patternId: string,
  k: number,
  repeats = 1,
): { input: string; fam: FamilySidecar } {
  const dir = mkdtempSync(join(tmpdir(), "redosbr-fam-"));
  try {
    const side = join(dir, "fam.json");
    const res = spawnSync(
      "python3",
      [
        "-m",
        "redosbr.cli",
        "attack",
        pattern,
        "--pattern-id",
        patternId,
        "--k",
        String(k),
        "--repeats",
        String(repeats),
        "--sidecar",
        side,
      ],
      { encoding: "utf-8", maxBuffer: 1 << 26 },
    );
    expect(res.status, res.stderr).toBe(0);
    const input = res.stdout.replace(/\n$/, "");
    const fam = JSON.parse(readFileSync(side, "utf-8")) as FamilySidecar;
    return { input, fam };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

describe("materialize mirrors the attack CLI", () => {
  it("single-pump family", () => {
    for (const k of [1, 8, 33]) {
      const { input, fam } = cliAttack("(a*)\\1b", "P1", k);
      expect(materialize(fam, k)).toBe(input);
    }
  });

  it("two-block family on the diagonal", () => {
    for (const k of [2, 16, 64]) {
      const { input, fam } = cliAttack("(a*)ba*\\1c(z*z*)?", "P2", k);
      expect(materialize(fam, k)).toBe(input);
    }
  });

  it("two-block family with stacked pump blocks", () => {
    const { input, fam } = cliAttack("(a*)ba*\\1c(z*z*)?", "P2", 10, 3);
    expect(materialize(fam, 10, undefined, 3)).toBe(input);
  });

  it("interleaved family", () => {
    for (const k of [2, 16]) {
      const { input, fam } = cliAttack("(a*ba*)\\1c", "P3", k);
      expect(materialize(fam, k)).toBe(input);
    }
  });

  it("rejects stacking outside the two-block layout", () => {
    const { fam } = cliAttack("(a*)\\1b", "P1", 4);
    expect(() => materialize(fam, 4, undefined, 2)).toThrow(/two-block/);
  });
});
