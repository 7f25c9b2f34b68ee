"""Acceptance gate: one test per top-level criterion, one PASS/FAIL line each.

Run with plain `pytest`; the verdict lines print even under output capture.
"""

import itertools
import os
import random
import shutil
import subprocess
import time

import pytest

from redosbr.attack import family_from_finding, fit_growth, measure_family, validate_finding
from redosbr.automaton import compile_ast, compile_pattern
from redosbr.detect import detect_pattern
from redosbr.matcher import CompiledMfa, bt_run
from redosbr.oracle import ast_accepts, bt_rt_s, ibr_rct, max_fbrl, sink_abg_s

from conftest import random_ast, random_text

EXPLOITS = [
    r"([A-Z\d_]+)\.write\x28.*?\1\.getCosObj\x28",
    r"(\w+)\s*?\x3D\s*?document\x2Ecreateelement.*?\1\x2EsetAttribute.*?"
    r"BD96C556-65A3-11D0-983A-00C04FC29E36.*?\1\x2EcreateObject\x28"
    r"[\x22\x27]Shell\x2EApplication",
    r"(\w+)\s*=\s*(\x22JNILOADER\.JNILoaderCtrl\x22|\x27JNILOADER\.JNILoaderCtrl\x27)"
    r"\s*\x3b.*(\w+)\s*=\s*new\s*ActiveXObject\s*\(\s*\1\s*\)"
    r"(\s*\.\s*(LoadLibrary)\s*\(|.*\3\s*\.\s*(LoadLibrary)\s*\()|"
    r"(\w+)\s*=\s*new\s*ActiveXObject\s*\(\s*"
    r"(\x22JNILOADER\.JNILoaderCtrl\x22|\x27JNILOADER\.JNILoaderCtrl\x27)\s*\)"
    r"(\s*\.\s*(LoadLibrary)\s*\(|.*\7\s*\.\s*(LoadLibrary)\s*\()",
    r"xmlns:(\S+)=[\x27\x22]http:\/\/xml\.apache\.org\/(xalan|xslt)[\x27\x22]"
    r".*\1:(entities|content-handler)=([\x27\x22]((http|ftp).*?|(\S+\$\S+))[\x27\x22])",
]


def verdict(capsys, ok: bool, name: str, detail: str):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_closed_form_runtime(capsys):
    compiled = CompiledMfa(compile_pattern(r"(a*)\1b"))
    bt_run(compiled, "aa", exhaustive=True)  # warm the compiled kernel
    t0 = time.perf_counter()
    bad = [
        n
        for n in range(8, 65, 2)
        if bt_run(compiled, "a" * n, anchored=True, exhaustive=True).steps
        != (n * n + 14 * n) // 8
    ]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1.0
    verdict(
        capsys, ok, "criterion 1 (closed-form steps)",
        f"steps == n^2/8 + 7n/4 for even n in 8..64, {elapsed:.3f}s"
        + (f"; mismatches at n={bad}" if bad else ""),
    )


def test_criterion_2_sink_ambiguity_count(capsys):
    a = compile_pattern(r"(a*)\1b")
    bad = [n for n in range(2, 13, 2) if sink_abg_s(a, "a" * n + "b") != 3 * n // 2 + 2]
    verdict(
        capsys, not bad, "criterion 2 (sink-ambiguity count)",
        "sink_abg_s(a^n b) == 3n/2 + 2 for even n <= 12"
        + (f"; mismatches at n={bad}" if bad else ""),
    )


def test_criterion_3_detection_fixtures(capsys):
    fixtures = [
        (r"(a*)\1b", {"P1"}),
        (r"(a*)ba*\1c", {"P2"}),
        (r"(a*ba*)\1c", {"P3"}),
        (r"a*a*", {"IDA"}),
        (r"(a|a)*", {"IDA"}),
        (r"a(b*)c", set()),
        (r"(ab)c*\1", set()),
    ]
    bad = []
    for pat, expected in fixtures:
        got1 = detect_pattern(pat).kinds
        got2 = detect_pattern(pat).kinds
        if got1 != expected or got2 != expected:
            bad.append((pat, got1, expected))
    verdict(
        capsys, not bad, "criterion 3 (detection fixtures)",
        "exact {P1}/{P2}/{P3}/{IDA}x2/{}x2 across 7 fixtures, deterministic"
        + (f"; wrong: {bad}" if bad else ""),
    )


def test_criterion_4_gap_linear_ambiguity_superlinear_steps(capsys):
    details, ok = [], True
    for pat, kind, bound in (
        (r"(a*)\1b", "P1", 2.0),
        (r"(a*)ba*\1c", "P2", 2.0),
        (r"(a*ba*)\1c", "P3", 2.0),
    ):
        a = compile_pattern(pat)
        compiled = CompiledMfa(a)
        fam = family_from_finding(next(f for f in detect_pattern(pat).findings if f.kind == kind))
        ratios = []
        k = 1
        while True:
            s = fam.materialize(k)
            if len(s) > 16:
                break
            ratios.append(sink_abg_s(a, s) / len(s))
            k += 1
        linear = bool(ratios) and max(ratios) <= bound
        samples = measure_family(compiled, fam, [8, 12, 16, 24, 32, 48, 64, 96, 128])
        fit = fit_growth([s.length for s in samples], [s.steps for s in samples])
        superlinear = fit.degree >= 2 and fit.r2 >= 0.99
        ok = ok and linear and superlinear
        details.append(f"{pat}: ambiguity/n <= {max(ratios):.2f}, steps degree {fit.degree} (r2={fit.r2:.4f})")
    verdict(capsys, ok, "criterion 4 (linear ambiguity vs superlinear steps)", "; ".join(details))


def test_criterion_5_runtime_bound_on_safe_fixtures(capsys):
    # exhaustive enumeration to length 7, plus 300 seeded random inputs of
    # length 8..16 per fixture (the full <=16 space is out of desk scale)
    bad = []
    worst = 0.0
    for pat, alphabet in ((r"(ab)c*\1", "abc"), (r"(a)b\1c*", "abc")):
        a = compile_pattern(pat)
        xi = a.max_out() * max_fbrl(a) + (ibr_rct(a) or 0)

        def check(s):
            nonlocal worst
            steps, _, _ = bt_rt_s(a, s, exhaustive=True)
            cap = xi * sink_abg_s(a, s)
            if steps > cap:
                bad.append((pat, s, steps, cap))
            elif cap:
                worst = max(worst, steps / cap)

        for ln in range(8):
            for tup in itertools.product(alphabet, repeat=ln):
                check("".join(tup))
        rng = random.Random(42)
        for _ in range(300):
            check("".join(rng.choice(alphabet) for _ in range(rng.randint(8, 16))))
    verdict(
        capsys, not bad, "criterion 5 (runtime <= xi * sink ambiguity)",
        f"holds on both safe fixtures (worst ratio {worst:.3f})"
        + (f"; violations: {bad[:3]}" if bad else ""),
    )


def test_criterion_6_cubic_compounding_unanchored(capsys):
    t0 = time.perf_counter()
    pat = r"(a*)ba*\1c(z*z*)?"
    result = detect_pattern(pat)
    kinds_ok = result.kinds == {"IDA", "P2"}
    fam = family_from_finding(next(f for f in result.findings if f.kind == "P2"))
    compiled = CompiledMfa(compile_pattern(pat))
    samples = measure_family(
        compiled, fam, [16, 32, 48, 64, 96, 128, 192, 256], anchored=False, limit=10**10
    )
    fit = fit_growth([s.length for s in samples], [s.steps for s in samples])
    elapsed = time.perf_counter() - t0
    max_len = max(s.length for s in samples)
    ok = kinds_ok and fit.degree == 3 and fit.r2 >= 0.99 and max_len <= 4096 and elapsed <= 60
    verdict(
        capsys, ok, "criterion 6 (cubic compounding)",
        f"{pat} detects {sorted(result.kinds)}, unanchored degree {fit.degree} "
        f"(r2={fit.r2:.4f}), max input {max_len} <= 4096, {elapsed:.1f}s",
    )


def test_criterion_7_exploit_corpus(capsys):
    details, ok = [], True
    compiled_cache = {}
    for i, pat in enumerate(EXPLOITS, 1):
        a = compile_pattern(pat)  # parse + compile
        compiled_cache[i] = (a, CompiledMfa(a))
        found = [f for f in detect_pattern(pat).findings if f.kind in ("P1", "P2")]
        confirmed = False
        for f in found:
            v = validate_finding(compiled_cache[i][1], f, anchored=False, limit=10**7)
            if v.confirmed:
                confirmed = True
                details.append(f"E{i}: {f.kind} g{f.group} confirmed ({v.evidence})")
                break
        ok = ok and confirmed
        if not confirmed:
            details.append(f"E{i}: no confirmed P1/P2 finding")
    # Exploits 3 and 4 must trip a 10^7-step limit at pump count <= 2000
    for i, (k, repeats) in ((3, (500, 1)), (4, (2000, 3))):
        f = next(f for f in detect_pattern(EXPLOITS[i - 1]).findings if f.kind == "P2")
        fam = family_from_finding(f)
        s = fam.materialize(k, repeats=repeats)
        out = bt_run(compiled_cache[i][1], s, anchored=False, exhaustive=True, limit=10**7)
        ok = ok and out.aborted
        details.append(f"E{i}: k={k} len={len(s)} aborted={out.aborted}")
    verdict(capsys, ok, "criterion 7 (exploit corpus)", "; ".join(details))


def test_criterion_8_oracle_differential(capsys):
    rng = random.Random(2024)
    mismatches = []
    checked = 0
    while checked < 500:
        ast = random_ast(rng)
        try:
            a = compile_ast(ast)
        except Exception:
            continue
        compiled = CompiledMfa(a)
        s = random_text(rng, 6)
        exhaustive = rng.random() < 0.5
        out = bt_run(compiled, s, exhaustive=exhaustive)
        steps, accepted, aborted = bt_rt_s(a, s, exhaustive=exhaustive)
        if (out.steps, out.accepted, out.aborted) != (steps, accepted, aborted):
            mismatches.append(("bt_rt_s", ast, s))
        if ast_accepts(ast, s) != out.accepted:
            mismatches.append(("ast", ast, s))
        checked += 1
    verdict(
        capsys, not mismatches, "criterion 8 (oracle differential)",
        f"500 random instances, matcher == bt_rt_s (steps/accept/abort) and == AST interpreter"
        + (f"; first mismatch: {mismatches[0]}" if mismatches else ""),
    )


FRONTEND = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "frontend")


@pytest.mark.skipif(
    not (shutil.which("node") and os.path.isdir(os.path.join(FRONTEND, "node_modules"))),
    reason="secondary engine harness not installed",
)
def test_criterion_9_secondary_engine_harness(capsys):
    res = subprocess.run(
        ["npx", "vitest", "run", "--reporter=basic"],
        cwd=FRONTEND,
        capture_output=True,
        text=True,
        timeout=1200,
    )
    ok = res.returncode == 0
    tail = (res.stdout + res.stderr).strip().splitlines()[-1] if (res.stdout or res.stderr) else ""
    verdict(capsys, ok, "criterion 9 (secondary engine harness)", tail or f"exit {res.returncode}")
