"""Static blowup-pattern detection.

Four detectors, reported deterministically:

  IDA  two distinct loop states sharing a pump word with a connector
       (backreference-free polynomial ambiguity, the baseline)
  P1   a loop inside a referenced capture whose pumped unit also fits
       everything between the loop and the backreference
  P2   pump loop inside the capture, evaluation loop after the close,
       separated by a fence the unit cannot cross
  P3   both loops inside the capture with a fence between them

A finding carries everything attack generation needs (unit, fence, segment
strings, exponents). Segments touched by further backreferences are skipped
conservatively with a diagnostic instead of guessed at.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automaton import BACKREF, CLOSE, EPS, OPEN, SYM, Label, Mfa, close as close_label, open_ as open_label, reachable_from
from .paths import (
    BackrefInSegment,
    PathAutomaton,
    SearchBoundExceeded,
    fence_witness,
    overlap_witness,
)

PATTERN_KINDS = ("IDA", "P1", "P2", "P3")

_MAX_PIVOTS = 12  # per role; keeps worst-case pair counts sane
_MAX_LOOP_CANDS = 32  # evaluation-loop candidates per backref (cheap to reject)


@dataclass
class Finding:
    kind: str
    group: int | None
    pivots: tuple
    unit: str | None = None
    fence: str | None = None
    prefix: str | None = None
    right: str | None = None
    nsuffix: str | None = None
    exponents: dict = field(default_factory=dict)
    confirmed_static: bool = True
    note: str = ""

    def to_json(self):
        return {
            "kind": self.kind,
            "group": self.group,
            "pivots": list(self.pivots),
            "unit": self.unit,
            "fence": self.fence,
            "prefix": self.prefix,
            "right": self.right,
            "nsuffix": self.nsuffix,
            "exponents": self.exponents,
            "confirmed_static": self.confirmed_static,
            "note": self.note,
        }


@dataclass
class DetectionResult:
    findings: list
    diagnostics: list

    @property
    def kinds(self):
        return {f.kind for f in self.findings}


# ---------------------------------------------------------------------------
# IDA baseline (on the zero-move-free view of the automaton)


def eps_removed(a: Mfa) -> Mfa:
    """Same states, only consuming edges: q -c-> r iff q =zero=> s -c-> r.
    open/close are language-transparent here; backref edges are kept opaque."""
    def zclose(q):
        seen = {q}
        work = [q]
        while work:
            v = work.pop()
            for label, dst in a.out[v]:
                if label.kind in (EPS, OPEN, CLOSE) and dst not in seen:
                    seen.add(dst)
                    work.append(dst)
        return seen

    b = Mfa(a.n_states, [[] for _ in range(a.n_states)], a.initial, set())
    for q in range(a.n_states):
        cl = zclose(q)
        if cl & a.accepting:
            b.accepting.add(q)
        seen_edges = set()
        for s in sorted(cl):
            for label, dst in a.out[s]:
                if label.kind in (SYM, BACKREF):
                    key = (label, dst)
                    if key not in seen_edges:
                        seen_edges.add(key)
                        b.out[q].append(key)
    return b


def _loop_pa(a: Mfa, q: int, excluded=frozenset()) -> PathAutomaton:
    return PathAutomaton(a, {q}, {q}, excluded=excluded)


def _has_consuming_loop(pa: PathAutomaton) -> bool:
    # every state of a loop PathAutomaton lies on a pivot-to-pivot walk,
    # so any consuming edge inside it witnesses a nonempty loop
    return any(
        label.kind in (SYM, BACKREF) for q in pa.states for label, _ in pa.adj[q]
    )


def _self_ambiguous(nfa: Mfa, pa: PathAutomaton, pivot: int) -> bool:
    """Two distinct consuming loops at `pivot` over one word (divergence in
    the self-product of the loop automaton). Backref-free segments only."""
    if pa.has_backref:
        return False
    start = (pivot, pivot, False)
    seen = {start}
    work = [start]
    while work:
        u, v, div = work.pop()
        eu = [(q, ei, lab.cls, dst) for q in (u,) for ei, (lab, dst) in enumerate(pa.adj.get(q, ())) if lab.kind == SYM]
        ev = [(q, ei, lab.cls, dst) for q in (v,) for ei, (lab, dst) in enumerate(pa.adj.get(q, ())) if lab.kind == SYM]
        for q1, e1, c1, d1 in eu:
            for q2, e2, c2, d2 in ev:
                if c1.intersect(c2).is_empty():
                    continue
                nd = div or (q1, e1) != (q2, e2)
                if nd and d1 == pivot and d2 == pivot:
                    return True
                key = (d1, d2, nd)
                if key not in seen:
                    seen.add(key)
                    work.append(key)
    return False


def detect_ida(a: Mfa, diagnostics: list) -> list:
    nfa = eps_removed(a)
    live = reachable_from(nfa, {nfa.initial})
    pivots = []
    for q in sorted(live):
        pa = _loop_pa(nfa, q)
        if _has_consuming_loop(pa):
            pivots.append((q, pa))
    if len(pivots) > _MAX_PIVOTS:
        diagnostics.append(f"ida: pivot set truncated to {_MAX_PIVOTS} of {len(pivots)}")
        pivots = pivots[:_MAX_PIVOTS]

    findings = []
    seen_units = set()

    def emit(p, q, unit):
        if unit in seen_units:
            return
        seen_units.add(unit)
        findings.append(Finding(kind="IDA", group=None, pivots=(p, q), unit=unit))

    for p, pa_p in pivots:
        if pa_p.has_backref:
            diagnostics.append(f"ida: loop at state {p} crosses a backref; skipped conservatively")
            continue
        if _self_ambiguous(nfa, pa_p, p):
            w = None
            try:
                cands, _tr = pa_p.enumerate_strings(4)
                w = next((s for s in cands if s), None)
            except BackrefInSegment:
                pass
            emit(p, p, w)
    for p, pa_p in pivots:
        if pa_p.has_backref:
            continue
        for q, pa_q in pivots:
            if q == p or pa_q.has_backref:
                continue
            conn = PathAutomaton(nfa, {p}, {q})
            if not conn.nonempty() or conn.has_backref:
                continue
            try:
                cands, truncated = pa_p.enumerate_strings(4)
            except BackrefInSegment:
                continue
            hit = None
            for s in cands:
                if s and conn.accepts(s) and pa_q.accepts(s):
                    hit = s
                    break
            if hit is not None:
                emit(p, q, hit)
            elif truncated:
                diagnostics.append(f"ida: candidate search truncated for pivots ({p},{q})")
    findings.sort(key=lambda f: f.pivots)
    return findings


# ---------------------------------------------------------------------------
# Backreference patterns


def _group_edges(a: Mfa):
    opens, closes, brefs = {}, {}, {}
    for q, label, dst in a.edges():
        if label.kind == OPEN:
            opens.setdefault(label.group, []).append((q, dst))
        elif label.kind == CLOSE:
            closes.setdefault(label.group, []).append((q, dst))
        elif label.kind == BACKREF:
            brefs.setdefault(label.group, []).append((q, dst))
    return opens, closes, brefs


def _pick_nsuffix(suffix_pa, unit, loop_classes, prefer_unit, alphabet_cps):
    first = suffix_pa.first_classes()

    def bad(cp):
        if any(cls.contains(cp) for cls in first):
            return True
        if not prefer_unit:
            if unit and cp in {ord(c) for c in unit}:
                return True
            if any(cls.contains(cp) for cls in loop_classes):
                return True
        return False

    candidates = []
    if prefer_unit and unit:
        candidates.append(ord(unit[0]))
    candidates.append(0x0A)
    candidates.extend(sorted(alphabet_cps))
    candidates.append(0x01)
    for cp in candidates:
        if not bad(cp):
            return chr(cp)
    # The class heuristic rejected everything.  Fall back to an exact check:
    # the suffix appears at the very end of the attack string, so a candidate
    # works iff the suffix language contains neither the empty string nor the
    # candidate itself.  Only decidable when the suffix carries no backrefs.
    if not suffix_pa.has_backref and not suffix_pa.accepts_epsilon():
        for cp in candidates:
            if not suffix_pa.accepts(chr(cp)):
                return chr(cp)
    return None


def _min_powers(w, segments, min_us):
    """Exponent of w in each segment, or None if any lacks one."""
    out = []
    for seg, lo in zip(segments, min_us):
        u = seg.min_power(w, min_u=lo)
        if u is None:
            return None
        out.append(u)
    return out


def detect_backref_patterns(a: Mfa, diagnostics: list, enabled=("P1", "P2", "P3")) -> list:
    opens, closes, brefs = _group_edges(a)
    findings = []
    from .paths import representative_alphabet

    for g in sorted(set(opens) & set(closes) & set(brefs)):
        excl = frozenset({close_label(g)})
        excl_both = frozenset({close_label(g), open_label(g)})
        open_srcs = {q for q, _ in opens[g]}
        open_dsts = {d for _, d in opens[g]}
        close_srcs = {q for q, _ in closes[g]}
        close_dsts = {d for _, d in closes[g]}

        from .oracle import span_states

        span = span_states(a, g)
        pump_pivots = []
        for q in sorted(span):
            lp = PathAutomaton(a, {q}, {q}, excluded=excl)
            if _has_consuming_loop(lp):
                if lp.has_backref:
                    diagnostics.append(
                        f"group {g}: pump loop at state {q} crosses a backref; skipped conservatively"
                    )
                    continue
                pump_pivots.append((q, lp))
        if any(lab.kind == BACKREF for q in span for lab, d in a.out[q] if d in span):
            diagnostics.append(f"group {g}: capture span contains a backreference (chained effects not classified)")
        if not pump_pivots:
            continue
        if len(pump_pivots) > _MAX_PIVOTS:
            diagnostics.append(f"group {g}: pump pivots truncated to {_MAX_PIVOTS}")
            pump_pivots = pump_pivots[:_MAX_PIVOTS]

        prefix_pa = PathAutomaton(a, {a.initial}, open_srcs)
        alphabet = None

        for bsrc, bdst in sorted(brefs[g]):
            suffix_pa = PathAutomaton(a, {bdst}, a.accepting)
            bridge_pa = PathAutomaton(a, close_dsts, {bsrc})
            segments_blocked = prefix_pa.has_backref or bridge_pa.has_backref
            if bridge_pa.has_backref:
                diagnostics.append(
                    f"group {g}: path to backref at state {bsrc} crosses another backref; "
                    "static overlap skipped for it"
                )

            got_p1 = got_p2 = got_p3 = False

            for p, pump in pump_pivots:
                left = PathAutomaton(a, open_dsts, {p}, excluded=excl)
                right = PathAutomaton(a, {p}, close_srcs, excluded=excl)
                if not (left.nonempty() and right.nonempty()):
                    continue
                if left.has_backref or right.has_backref:
                    diagnostics.append(f"group {g}: segment around pivot {p} crosses a backref; skipped")
                    continue

                # ---- P1: unit carries from the pump straight through the backref
                if "P1" in enabled and not got_p1 and not segments_blocked:
                    try:
                        w = overlap_witness(pump, [left, right, bridge_pa])
                    except SearchBoundExceeded:
                        w = None
                        diagnostics.append(f"group {g}: P1 overlap search bound exceeded at pivot {p}")
                    if w:
                        us = _min_powers(w, [left, pump, right, bridge_pa], [0, 1, 0, 0])
                        if us:
                            u_l, u_p, u_r, u_b = us
                            alphabet = alphabet or representative_alphabet([pump, left, right])
                            ns = _pick_nsuffix(suffix_pa, w, [], True, alphabet)
                            if ns is None:
                                diagnostics.append(f"group {g}: no negative suffix available for P1")
                            findings.append(
                                Finding(
                                    kind="P1",
                                    group=g,
                                    pivots=(p,),
                                    unit=w,
                                    prefix=prefix_pa.shortest_string() if not prefix_pa.has_backref else None,
                                    nsuffix=ns,
                                    exponents={"u_l": u_l, "u_p": u_p, "u_r": u_r, "u_b": u_b},
                                    confirmed_static=True,
                                )
                            )
                            got_p1 = True

                # ---- P2: evaluation loop after the close
                if "P2" in enabled and not got_p2 and not segments_blocked:
                    between = PathAutomaton(a, close_dsts, {bsrc})
                    loop_cands = []
                    for q in sorted(between.states):
                        lq = PathAutomaton(a, {q}, {q}, excluded=excl_both)
                        if _has_consuming_loop(lq) and not lq.has_backref:
                            loop_cands.append((q, lq))
                    for q, loop in loop_cands[:_MAX_LOOP_CANDS]:
                        fence_pa = PathAutomaton(a, close_dsts, {q})
                        tail_pa = PathAutomaton(a, {q}, {bsrc})
                        if fence_pa.has_backref or tail_pa.has_backref:
                            continue
                        try:
                            w = overlap_witness(pump, [left, loop, tail_pa], min_us=[0, 1, 0])
                            if not w:
                                continue
                            fw = fence_witness(fence_pa, w)
                        except SearchBoundExceeded:
                            diagnostics.append(f"group {g}: P2 search bound exceeded at pivots ({p},{q})")
                            continue
                        if fw is None:
                            continue  # unit crosses the fence: IDA territory, not P2
                        us = _min_powers(w, [left, pump, loop, tail_pa], [0, 1, 1, 0])
                        if not us:
                            continue
                        u_l, u_p, u_o, u_b = us
                        alphabet = alphabet or representative_alphabet([pump, left, loop])
                        ns = _pick_nsuffix(suffix_pa, w, loop.classes(), False, alphabet)
                        if ns is None:
                            diagnostics.append(f"group {g}: no negative suffix available for P2")
                        findings.append(
                            Finding(
                                kind="P2",
                                group=g,
                                pivots=(p, q),
                                unit=w,
                                fence=fw,
                                prefix=prefix_pa.shortest_string() if not prefix_pa.has_backref else None,
                                right=right.shortest_string(),
                                nsuffix=ns,
                                exponents={"u_l": u_l, "u_p": u_p, "u_o": u_o, "u_b": u_b},
                                confirmed_static=True,
                            )
                        )
                        got_p2 = True
                        break

                # ---- P3: both loops inside the capture, fence between them
                if "P3" in enabled and not got_p3 and not segments_blocked:
                    for q, loop in pump_pivots:
                        if q == p:
                            continue
                        fence_pa = PathAutomaton(a, {p}, {q}, excluded=excl)
                        if not fence_pa.nonempty() or fence_pa.has_backref:
                            continue
                        right2 = PathAutomaton(a, {q}, close_srcs, excluded=excl)
                        if not right2.nonempty() or right2.has_backref:
                            continue
                        try:
                            w = overlap_witness(pump, [left, loop, right2, bridge_pa], min_us=[0, 1, 0, 0])
                            if not w:
                                continue
                            fw = fence_witness(fence_pa, w)
                        except SearchBoundExceeded:
                            diagnostics.append(f"group {g}: P3 search bound exceeded at pivots ({p},{q})")
                            continue
                        if fw is None:
                            continue
                        us = _min_powers(w, [left, pump, loop, right2, bridge_pa], [0, 1, 1, 0, 0])
                        if not us:
                            continue
                        u_l, u_p, u_o, u_r, u_b = us
                        alphabet = alphabet or representative_alphabet([pump, left, loop])
                        ns = _pick_nsuffix(suffix_pa, w, loop.classes(), False, alphabet)
                        if ns is None:
                            diagnostics.append(f"group {g}: no negative suffix available for P3")
                        findings.append(
                            Finding(
                                kind="P3",
                                group=g,
                                pivots=(p, q),
                                unit=w,
                                fence=fw,
                                prefix=prefix_pa.shortest_string() if not prefix_pa.has_backref else None,
                                nsuffix=ns,
                                exponents={"u_l": u_l, "u_p": u_p, "u_o": u_o, "u_r": u_r, "u_b": u_b},
                                confirmed_static=True,
                            )
                        )
                        got_p3 = True
                        break

    order = {k: i for i, k in enumerate(PATTERN_KINDS)}
    findings.sort(key=lambda f: (order[f.kind], f.group if f.group is not None else -1, f.pivots))
    return findings


def detect(a: Mfa, enabled=PATTERN_KINDS) -> DetectionResult:
    diagnostics = []
    findings = []
    if any(k in enabled for k in ("P1", "P2", "P3")):
        findings.extend(detect_backref_patterns(a, diagnostics, enabled=enabled))
    if "IDA" in enabled:
        findings.extend(detect_ida(a, diagnostics))
    order = {k: i for i, k in enumerate(PATTERN_KINDS)}
    findings.sort(key=lambda f: (order[f.kind], f.group if f.group is not None else -1, f.pivots))
    return DetectionResult(findings, diagnostics)


def detect_pattern(pattern: str, flags=frozenset(), enabled=PATTERN_KINDS) -> DetectionResult:
    from .automaton import compile_pattern

    return detect(compile_pattern(pattern, flags), enabled=enabled)
