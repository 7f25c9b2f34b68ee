import { readFileSync } from "node:fs";

/** Pump-parameter sidecar emitted by `redosbr attack --sidecar`. */
export interface FamilySidecar {
  type: "family";
  schema_version: number;
  kind: "P1" | "P2" | "P3";
  pattern: string;
  unit: string;
  prefix: string;
  right: string;
  fence: string;
  nsuffix: string;
  exponents: { u_l: number; u_p: number; u_r: number; u_b: number; u_o: number };
  arity: number;
  repeats?: number;
  flags?: string;
}

export function loadFamily(path: string): FamilySidecar {
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  if (raw.type !== "family") {
    throw new Error(`${path}: expected a "family" sidecar, got type=${raw.type}`);
  }
  return raw as FamilySidecar;
}

/** Build the adversarial input for pump count `k1` (and `k2` for two-pump
 *  families; defaults to the diagonal k2 = k1). Mirrors the layouts in the
 *  attack-family JSON contract. */
export function materialize(
  fam: FamilySidecar,
  k1: number,
  k2?: number,
  repeats = 1,
): string {
  const w = fam.unit;
  const e = fam.exponents;
  if (repeats !== 1 && fam.kind !== "P2") {
    throw new Error("repeats is only meaningful for the two-block layout");
  }
  if (fam.kind === "P1") {
    const reps = 2 * (e.u_l + k1 * e.u_p + e.u_r) + e.u_b;
    return fam.prefix + w.repeat(reps) + fam.nsuffix;
  }
  const kk2 = k2 ?? k1;
  const cap = e.u_l + k1 * e.u_p;
  if (fam.kind === "P2") {
    const ev = kk2 * e.u_o + e.u_b + cap;
    const core = w.repeat(cap) + fam.right + fam.fence;
    return fam.prefix + core.repeat(repeats) + w.repeat(ev) + fam.nsuffix;
  }
  if (fam.kind === "P3") {
    const mid = kk2 * e.u_o + e.u_r + e.u_b;
    return (
      fam.prefix +
      w.repeat(cap) +
      fam.fence +
      w.repeat(mid) +
      w.repeat(cap) +
      fam.fence +
      w.repeat(e.u_r) +
      fam.nsuffix
    );
  }
  throw new Error(`no input family for kind ${(fam as FamilySidecar).kind}`);
}
