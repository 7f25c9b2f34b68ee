"""Command-line front end.

Subcommands:
  detect   scan patterns / pattern files / Snort rule files, emit JSON-lines
  attack   materialize an attack input for a detected finding (+ sidecar JSON)
  measure  run a pump ladder through the instrumented matcher and fit growth
  extract  pull PCRE bodies out of Snort rule files
  match    run the matcher on one input (or a JSONL batch) and report outcomes

Exit codes: 0 = clean, 1 = confirmed findings, 2 = operational error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import sys
import time

from .attack import (
    COST_MODEL_VERSION,
    DEFAULT_LADDER,
    NoNegativeSuffix,
    family_from_finding,
    fit_growth,
    measure_family,
    validate_finding,
)
from .automaton import UnsupportedPattern, compile_pattern
from .detect import PATTERN_KINDS, detect
from .matcher import DEFAULT_LIMIT, CompiledMfa, bt_run
from .syntax import ParseError, extract_pcre, iter_rule_lines

SCHEMA_VERSION = 1


# ---------------------------------------------------------------- ingestion

def _gather_inputs(args) -> list:
    """Yield (pattern, flags, source) triples from CLI inputs."""
    out = []
    if args.pattern:
        for p in args.pattern:
            out.append((p, frozenset(args.flags or ""), "<arg>"))
    for path in args.file or []:
        if path.endswith(".rules") or args.rules:
            with open(path, encoding="utf-8", errors="replace") as fh:
                text = fh.read()
            for lineno, line in iter_rule_lines(text):
                sid = _rule_sid(line)
                for body, flags in extract_pcre(line):
                    src = f"{path}:{lineno}" + (f" sid:{sid}" if sid else "")
                    out.append((body, frozenset(flags), src))
        else:
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    line = line.rstrip("\n")
                    if line and not line.startswith("#"):
                        out.append((line, frozenset(args.flags or ""), f"{path}:{lineno}"))
    return out


def _rule_sid(rule_line: str):
    idx = rule_line.find("sid:")
    if idx < 0:
        return None
    end = rule_line.find(";", idx)
    return rule_line[idx + 4 : end].strip() if end > idx else None


# ---------------------------------------------------------------- detect

def _scan_one(task):
    """Worker: scan a single pattern. Must stay top-level (worker pools)."""
    pattern, flags, source, enabled, do_validate, limit = task
    report = {
        "type": "report",
        "schema_version": SCHEMA_VERSION,
        "pattern": pattern,
        "source": source,
        "flags": "".join(sorted(flags)),
        "findings": [],
        "diagnostics": [],
        "error": None,
        "timings": {},
    }
    t0 = time.perf_counter()
    try:
        a = compile_pattern(pattern, flags)
    except (ParseError, UnsupportedPattern) as e:
        report["error"] = str(e)
        report["timings"]["detect_seconds"] = time.perf_counter() - t0
        return report
    result = detect(a, enabled=enabled)
    report["diagnostics"] = list(result.diagnostics)
    report["timings"]["detect_seconds"] = time.perf_counter() - t0
    compiled = CompiledMfa(a) if do_validate else None
    for f in result.findings:
        entry = f.to_json()
        entry["confirmed"] = bool(f.confirmed_static)
        if do_validate and f.kind in ("P1", "P2", "P3"):
            t1 = time.perf_counter()
            v = validate_finding(compiled, f, limit=limit)
            entry["confirmed"] = v.confirmed
            entry["evidence"] = v.evidence
            entry["dominant_degree"] = v.fit.degree if v.fit else None
            entry["validate_seconds"] = time.perf_counter() - t1
            try:
                fam = family_from_finding(f)
                entry["attack_example"] = fam.materialize(8)
                entry["pump"] = fam.to_json()
            except (NoNegativeSuffix, ValueError):
                pass
        report["findings"].append(entry)
    return report


def _summary(reports) -> dict:
    counts = {k: 0 for k in PATTERN_KINDS}
    pattern_only = pattern_and_ida = ida_only = clean = errors = 0
    for r in reports:
        if r["error"] is not None:
            errors += 1
            continue
        kinds = {f["kind"] for f in r["findings"]}
        for k in kinds:
            counts[k] += 1
        has_pat = bool(kinds & {"P1", "P2", "P3"})
        has_ida = "IDA" in kinds
        if has_pat and has_ida:
            pattern_and_ida += 1
        elif has_pat:
            pattern_only += 1
        elif has_ida:
            ida_only += 1
        else:
            clean += 1
    return {
        "type": "summary",
        "schema_version": SCHEMA_VERSION,
        "patterns": len(reports),
        "errors": errors,
        "counts": counts,
        "crosstab": {
            "pattern_only": pattern_only,
            "pattern_and_ida": pattern_and_ida,
            "ida_only": ida_only,
            "none": clean,
        },
    }


def cmd_detect(args) -> int:
    enabled = tuple(args.patterns.split(",")) if args.patterns else PATTERN_KINDS
    bad = set(enabled) - set(PATTERN_KINDS)
    if bad:
        print(f"unknown pattern id(s): {','.join(sorted(bad))}", file=sys.stderr)
        return 2
    try:
        inputs = _gather_inputs(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    tasks = [(p, fl, src, enabled, args.validate, args.limit) for p, fl, src in inputs]
    if args.jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_scan_one, tasks))
    else:
        reports = [_scan_one(t) for t in tasks]
    summary = _summary(reports)
    if args.format == "csv":
        w = csv.writer(sys.stdout)
        w.writerow(["pattern", "source", "kind", "group", "unit", "confirmed", "degree"])
        for r in reports:
            for f in r["findings"]:
                w.writerow([r["pattern"], r["source"], f["kind"], f.get("group"),
                            f.get("unit"), f["confirmed"], f.get("dominant_degree")])
    else:
        for r in reports:
            print(json.dumps(r, sort_keys=True))
        print(json.dumps(summary, sort_keys=True))
    confirmed = any(f["confirmed"] for r in reports for f in r["findings"])
    return 1 if confirmed else 0


# ---------------------------------------------------------------- attack

def _family_for(pattern, flags, kind):
    a = compile_pattern(pattern, flags)
    result = detect(a)
    for f in result.findings:
        if f.kind == kind:
            return a, family_from_finding(f)
    raise LookupError(f"no {kind} finding for this pattern")


def _pick_k_for_length(fam, target: int) -> int:
    lo, hi = 1, 1
    while len(fam.materialize(hi)) < target and hi < 1 << 24:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if len(fam.materialize(mid)) < target:
            lo = mid + 1
        else:
            hi = mid
    # nearest achievable: compare k and k-1
    if lo > 1 and abs(len(fam.materialize(lo - 1)) - target) < abs(len(fam.materialize(lo)) - target):
        return lo - 1
    return lo


def cmd_attack(args) -> int:
    try:
        _, fam = _family_for(args.pattern, frozenset(args.flags or ""), args.pattern_id)
    except (ParseError, UnsupportedPattern, LookupError, NoNegativeSuffix) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    k = args.k if args.k is not None else _pick_k_for_length(fam, args.length)
    s = fam.materialize(k, repeats=args.repeats)
    if args.sidecar:
        sidecar = fam.to_json()
        sidecar.update({
            "type": "family",
            "schema_version": SCHEMA_VERSION,
            "pattern": args.pattern,
            "k": k,
            "repeats": args.repeats,
            "length": len(s),
        })
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, sort_keys=True)
            fh.write("\n")
    sys.stdout.write(s)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------- measure

def cmd_measure(args) -> int:
    try:
        a, fam = _family_for(args.pattern, frozenset(args.flags or ""), args.pattern_id)
    except (ParseError, UnsupportedPattern, LookupError, NoNegativeSuffix) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    ladder = [int(x) for x in args.ladder.split(",")] if args.ladder else list(DEFAULT_LADDER)
    compiled = CompiledMfa(a)
    samples = measure_family(compiled, fam, ladder, anchored=not args.unanchored,
                             limit=args.limit)
    rows = [{
        "type": "sample",
        "schema_version": SCHEMA_VERSION,
        "k": s.k,
        "length": s.length,
        "steps": s.steps,
        "aborted": s.aborted,
    } for s in samples]
    fit_row = None
    try:
        fit = fit_growth([s.length for s in samples], [s.steps for s in samples])
        fit_row = {
            "type": "fit",
            "schema_version": SCHEMA_VERSION,
            "cost_model": COST_MODEL_VERSION,
            "degree": fit.degree,
            "r2": fit.r2,
            "coeffs": list(fit.coeffs),
        }
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.format == "csv":
        w = csv.writer(sys.stdout)
        w.writerow(["k", "length", "steps", "aborted"])
        for r in rows:
            w.writerow([r["k"], r["length"], r["steps"], r["aborted"]])
    else:
        for r in rows:
            print(json.dumps(r, sort_keys=True))
        print(json.dumps(fit_row, sort_keys=True))
    return 0


# ---------------------------------------------------------------- extract

def cmd_extract(args) -> int:
    try:
        for path in args.file:
            with open(path, encoding="utf-8", errors="replace") as fh:
                text = fh.read()
            for lineno, line in iter_rule_lines(text):
                sid = _rule_sid(line)
                for body, flags in extract_pcre(line):
                    print(json.dumps({
                        "type": "extracted",
                        "schema_version": SCHEMA_VERSION,
                        "pattern": body,
                        "flags": "".join(sorted(flags)),
                        "sid": sid,
                        "source": f"{path}:{lineno}",
                    }, sort_keys=True))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------- match

def _match_one(pattern, flags, text, anchored, exhaustive, limit):
    a = compile_pattern(pattern, frozenset(flags))
    out = bt_run(CompiledMfa(a), text, anchored=anchored, exhaustive=exhaustive,
                 limit=limit)
    return {
        "type": "match",
        "schema_version": SCHEMA_VERSION,
        "accepted": bool(out.accepted),
        "steps": int(out.steps),
        "aborted": bool(out.aborted),
        "match_start": out.match_start,
    }


def cmd_match(args) -> int:
    limit = args.limit
    if args.batch:
        try:
            fh = open(args.batch, encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        with fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                case = json.loads(line)
                try:
                    row = _match_one(case.get("pattern", args.pattern),
                                     case.get("flags", args.flags or ""),
                                     case["input"],
                                     case.get("anchored", args.anchored),
                                     args.exhaustive, limit)
                except (ParseError, UnsupportedPattern) as e:
                    row = {"type": "match", "schema_version": SCHEMA_VERSION,
                           "error": str(e)}
                print(json.dumps(row, sort_keys=True))
        return 0
    if args.pattern is None or args.input is None:
        print("error: need PATTERN and INPUT (or --batch)", file=sys.stderr)
        return 2
    try:
        row = _match_one(args.pattern, args.flags or "", args.input,
                         args.anchored, args.exhaustive, limit)
    except (ParseError, UnsupportedPattern) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(row, sort_keys=True))
    return 0


# ---------------------------------------------------------------- main

def _add_input_args(p):
    p.add_argument("pattern", nargs="*", help="pattern string(s)")
    p.add_argument("--file", "-f", action="append",
                   help="pattern file (one per line) or Snort .rules file")
    p.add_argument("--rules", action="store_true",
                   help="force Snort rule parsing for --file inputs")
    p.add_argument("--flags", default="", help="regex flags (subset of 'is')")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="redosbr",
                                 description="Backreference ReDoS detector. "
                                 "A clean scan is not a safety proof: the detected "
                                 "patterns are sufficient, not necessary, conditions.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("detect", help="scan patterns / rule files")
    _add_input_args(d)
    d.add_argument("--patterns", help="comma list from IDA,P1,P2,P3 (default all)")
    d.add_argument("--validate", action="store_true",
                   help="dynamically confirm findings with the instrumented matcher")
    d.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    d.add_argument("--jobs", type=int, default=1)
    d.add_argument("--format", choices=("json", "csv"), default="json")
    d.set_defaults(fn=cmd_detect)

    at = sub.add_parser("attack", help="materialize an attack input")
    at.add_argument("pattern")
    at.add_argument("--flags", default="")
    at.add_argument("--pattern-id", default="P2", choices=("P1", "P2", "P3"))
    at.add_argument("--length", type=int, default=4096,
                    help="target attack-string length (nearest achievable)")
    at.add_argument("--k", type=int, help="pump count (overrides --length)")
    at.add_argument("--repeats", type=int, default=1,
                    help="stacked pump+fence copies (two-block layout only)")
    at.add_argument("--sidecar", help="write pump parameters to this JSON file")
    at.set_defaults(fn=cmd_attack)

    m = sub.add_parser("measure", help="pump ladder + growth fit")
    m.add_argument("pattern")
    m.add_argument("--flags", default="")
    m.add_argument("--pattern-id", default="P2", choices=("P1", "P2", "P3"))
    m.add_argument("--ladder", help="comma list of pump counts")
    m.add_argument("--unanchored", action="store_true")
    m.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    m.add_argument("--format", choices=("json", "csv"), default="json")
    m.set_defaults(fn=cmd_measure)

    ex = sub.add_parser("extract", help="extract PCRE bodies from rule files")
    ex.add_argument("file", nargs="+")
    ex.set_defaults(fn=cmd_extract)

    mt = sub.add_parser("match", help="run the instrumented matcher")
    mt.add_argument("pattern", nargs="?")
    mt.add_argument("input", nargs="?")
    mt.add_argument("--flags", default="")
    mt.add_argument("--anchored", action="store_true")
    mt.add_argument("--exhaustive", action="store_true")
    mt.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    mt.add_argument("--batch", help="JSONL file of {pattern?, input, anchored?} cases")
    mt.set_defaults(fn=cmd_match)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
