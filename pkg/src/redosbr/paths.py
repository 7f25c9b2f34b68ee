"""Languages of walks between state sets of a memory automaton.

A PathAutomaton is the sub-NFA of walks from `sources` to `targets`,
optionally refusing some labels (typically a group's close edge, to stay
inside a capture span). open/close labels are language-transparent; a live
backref edge makes most language queries meaningless, so they are flagged
and the detectors fall back to conservative answers.
"""

from __future__ import annotations

from .automaton import BACKREF, CLOSE, EPS, OPEN, SYM, Mfa, reachable_from, coreachable_to
from .charclass import CharClass


class SearchBoundExceeded(RuntimeError):
    """Enumeration hit its cap before the search space was exhausted."""


class BackrefInSegment(RuntimeError):
    """A language query on a segment containing a backref edge."""


def primitive_root(s: str) -> str:
    for d in range(1, len(s) + 1):
        if len(s) % d == 0 and s == s[:d] * (len(s) // d):
            return s[:d]
    return s


def is_power_of(s: str, w: str) -> bool:
    if not w:
        return s == ""
    return len(s) % len(w) == 0 and s == w * (len(s) // len(w))


class PathAutomaton:
    def __init__(self, mfa: Mfa, sources, targets, excluded=frozenset()):
        self.mfa = mfa
        self.excluded = frozenset(excluded)
        fwd = reachable_from(mfa, set(sources), excluded=self.excluded)
        bwd = coreachable_to(mfa, set(targets), excluded=self.excluded)
        self.states = fwd & bwd
        self.sources = set(sources) & self.states
        self.targets = set(targets) & self.states
        self.adj = {
            q: [
                (label, dst)
                for label, dst in mfa.out[q]
                if dst in self.states and label not in self.excluded
            ]
            for q in self.states
        }
        self.has_backref = any(
            label.kind == BACKREF for q in self.states for label, _ in self.adj[q]
        )

    # -- basics

    def nonempty(self) -> bool:
        return bool(self.sources) and bool(self.targets)

    def _require_no_backref(self):
        if self.has_backref:
            raise BackrefInSegment("segment contains a backreference")

    def zero_closure(self, states) -> set:
        seen = set(states)
        work = list(states)
        while work:
            q = work.pop()
            for label, dst in self.adj.get(q, ()):
                if label.kind in (EPS, OPEN, CLOSE) and dst not in seen:
                    seen.add(dst)
                    work.append(dst)
        return seen

    def accepts_epsilon(self) -> bool:
        return bool(self.zero_closure(self.sources) & self.targets)

    def consuming_edges(self, states) -> list:
        """(src, edge_index, class, dst) for symbol edges leaving the closure."""
        out = []
        for q in sorted(states):
            for ei, (label, dst) in enumerate(self.adj.get(q, ())):
                if label.kind == SYM:
                    out.append((q, ei, label.cls, dst))
        return out

    def classes(self) -> list:
        seen = []
        for q in sorted(self.states):
            for label, _ in self.adj[q]:
                if label.kind == SYM and label.cls not in seen:
                    seen.append(label.cls)
        return seen

    def first_classes(self):
        """Classes on the first consuming step of any accepted string."""
        frontier = self.zero_closure(self.sources)
        return [cls for _, _, cls, _ in self.consuming_edges(frontier)]

    # -- membership-style queries (backref-free)

    def accepts(self, s: str) -> bool:
        self._require_no_backref()
        frontier = self.zero_closure(self.sources)
        for ch in s:
            cp = ord(ch)
            nxt = {dst for _, _, cls, dst in self.consuming_edges(frontier) if cls.contains(cp)}
            if not nxt:
                return False
            frontier = self.zero_closure(nxt)
        return bool(frontier & self.targets)

    def contains_power(self, w: str, at_least_one=False) -> bool:
        """Some w^u in L (u >= 1 when at_least_one, else u >= 0)."""
        self._require_no_backref()
        if not w:
            raise ValueError("unit must be nonempty")
        if not at_least_one and self.accepts_epsilon():
            return True
        m = len(w)
        # node = (state, phase, completed at least one full unit)
        start = {(q, 0, False) for q in self.zero_closure(self.sources)}
        seen = set(start)
        work = list(start)
        while work:
            q, p, full = work.pop()
            if p == 0 and q in self.targets and (full or not at_least_one):
                return True
            cp = ord(w[p])
            for label, dst in self.adj.get(q, ()):
                if label.kind == SYM and label.cls.contains(cp):
                    p2 = (p + 1) % m
                    f2 = full or p2 == 0
                    for d2 in self.zero_closure({dst}) | {dst}:
                        key = (d2, p2, f2)
                        if key not in seen:
                            seen.add(key)
                            work.append(key)
                elif label.kind in (EPS, OPEN, CLOSE):
                    key = (dst, p, full)
                    if key not in seen:
                        seen.add(key)
                        work.append(key)
        return False

    def min_power(self, w: str, min_u=0, max_u=128):
        """Smallest u >= min_u with w^u in L, or None."""
        for u in range(min_u, max_u + 1):
            if self.accepts(w * u):
                return u
        return None

    def shortest_string(self):
        """A shortest member (min code point per step), or None."""
        self._require_no_backref()
        start = self.zero_closure(self.sources)
        if start & self.targets:
            return ""
        dist = {q: "" for q in start}
        frontier = start
        for _ in range(4096):
            best = {}
            for q in sorted(frontier):
                for _, _, cls, dst in self.consuming_edges({q}):
                    cand = dist[q] + chr(cls.min_cp())
                    for d2 in self.zero_closure({dst}):
                        if d2 not in dist and (d2 not in best or cand < best[d2]):
                            best[d2] = cand
            if not best:
                return None
            for q, v in best.items():
                dist[q] = v
                if q in self.targets:
                    return v
            frontier = set(best)
        return None

    def enumerate_strings(self, max_len, alphabet=None, cap=4096):
        """Distinct members up to max_len over a representative alphabet.

        Returns (sorted strings, truncated). alphabet is a set of code
        points used to concretize class edges; default: each class's min.
        """
        self._require_no_backref()
        if alphabet is None:
            alphabet = {cls.min_cp() for cls in self.classes()}
        alphabet = sorted(alphabet)
        found = set()
        start = frozenset(self.zero_closure(self.sources))
        seen = {("", start)}
        work = [("", start)]
        truncated = False
        visited = 0
        while work:
            prefix, frontier = work.pop(0)
            visited += 1
            if visited > cap:
                truncated = True
                break
            if frontier & self.targets:
                found.add(prefix)
            if len(prefix) >= max_len:
                continue
            edges = self.consuming_edges(frontier)
            for cp in alphabet:
                nxt = {dst for _, _, cls, dst in edges if cls.contains(cp)}
                if not nxt:
                    continue
                key = (prefix + chr(cp), frozenset(self.zero_closure(nxt)))
                if key not in seen:
                    seen.add(key)
                    work.append(key)
        return sorted(found, key=lambda s: (len(s), s)), truncated


# ---------------------------------------------------------------------------
# Overlap machinery


def representative_alphabet(segments) -> set:
    """Min code points of every class and every pairwise class intersection
    across the given segments (shared-point rule for partial class overlap)."""
    classes = []
    for seg in segments:
        for cls in seg.classes():
            if cls not in classes:
                classes.append(cls)
    cps = {cls.min_cp() for cls in classes if not cls.is_empty()}
    for i, c1 in enumerate(classes):
        for c2 in classes[i + 1 :]:
            both = c1.intersect(c2)
            if not both.is_empty():
                cps.add(both.min_cp())
    return cps


def _class_union_cps(seg):
    from .charclass import CharClass

    u = CharClass.empty()
    for cls in seg.classes():
        u = u.union(cls)
    return u


def overlap_witness(pump: "PathAutomaton", others, min_us=None, max_unit=4, cap=4096, max_roots=64):
    """Shortest unit w such that pump pumps w (some w^u, u>=1, in its loop
    language) and every other segment meets w^u with u >= min_us[i]
    (default 0). None = proved absent within the finite candidate space;
    SearchBoundExceeded when truncated."""
    others = list(others)
    if min_us is None:
        min_us = [0] * len(others)
    segs = [pump] + others
    for seg in segs:
        seg._require_no_backref()

    # necessary condition: a segment that must consume at least one unit has
    # to be able to read the unit's letters, which all come from pump classes
    pump_union = _class_union_cps(pump)
    strict = [
        seg
        for seg, lo in zip(others, min_us)
        if lo >= 1 or not seg.accepts_epsilon()
    ]
    for seg in strict:
        if _class_union_cps(seg).intersect(pump_union).is_empty():
            return None

    alphabet = representative_alphabet(segs)
    truncated = False
    tried = set()
    # shortest-first, so cheap length-1 units short-circuit the enumeration
    for length in range(1, max_unit + 1):
        cands, trunc = pump.enumerate_strings(length, alphabet=alphabet, cap=cap)
        truncated = truncated or trunc
        roots = []
        for s in cands:
            if len(s) != length:
                continue
            r = primitive_root(s)
            if r not in tried and r not in roots:
                roots.append(r)
        if len(roots) > max_roots:
            roots = roots[:max_roots]
            truncated = True
        for w in sorted(roots, key=lambda s: (len(s), s)):
            tried.add(w)
            if any(
                any(not _class_union_cps(seg).contains(ord(ch)) for ch in w)
                for seg in strict
            ):
                continue
            if pump.min_power(w, min_u=1, max_u=max(4, max_unit)) is None:
                continue
            if all(
                seg.contains_power(w, at_least_one=lo >= 1)
                for seg, lo in zip(others, min_us)
            ):
                return w
    if truncated:
        raise SearchBoundExceeded("unit candidate enumeration truncated")
    return None


def fence_witness(fence: "PathAutomaton", w: str):
    """Shortest fence string that is not a power of w, via a product of the
    fence with the |w|-cycle tracker (extra "diverged" phase). None is a
    proof that every fence string is a power of w."""
    fence._require_no_backref()
    if not w:
        raise ValueError("unit must be nonempty")
    m = len(w)
    dead = m  # phase m = the string has already left w*

    start = [(q, 0) for q in sorted(fence.zero_closure(fence.sources))]
    parent = {node: None for node in start}
    queue = list(start)
    while queue:
        nxt = []
        for q, p in queue:
            if q in fence.targets and p != 0:
                # reconstruct
                out = []
                node = (q, p)
                while parent[node] is not None:
                    node, ch = parent[node]
                    out.append(ch)
                return "".join(reversed(out))
            for label, dst in fence.adj.get(q, ()):
                if label.kind != SYM:
                    continue
                succs = []
                if p != dead and label.cls.contains(ord(w[p])):
                    succs.append(((p + 1) % m, w[p]))
                if p != dead:
                    outside = label.cls.intersect(CharClass.single(w[p]).complement())
                else:
                    outside = label.cls
                if not outside.is_empty():
                    succs.append((dead, chr(outside.min_cp())))
                for p2raw, ch in succs:
                    for d2 in sorted(fence.zero_closure({dst})):
                        key = (d2, p2raw)
                        if key not in parent:
                            parent[key] = ((q, p), ch)
                            nxt.append(key)
        queue = nxt
    return None
