"""Memory finite automata with two-phase capture slots.

States are dense ints. Each transition carries one of five labels:

    SYM      consume one char from a code-point class
    EPS      free move
    OPEN(i)  start recording group i (in-progress slot)
    CLOSE(i) commit group i (open/close slots)
    BACKREF(i) consume a copy of group i's committed capture

Per-state transition order is match priority: earlier edges are tried first
by the backtracking matcher, so greedy loops put the "stay" edge before the
"leave" edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .charclass import CharClass
from . import syntax
from .syntax import Alt, Backref, Capture, Concat, Empty, Star, Symbol

EPS = 0
SYM = 1
OPEN = 2
CLOSE = 3
BACKREF = 4

_KIND_NAMES = {EPS: "eps", SYM: "sym", OPEN: "open", CLOSE: "close", BACKREF: "backref"}


@dataclass(frozen=True)
class Label:
    kind: int
    cls: CharClass | None = None
    group: int | None = None

    def __repr__(self):
        if self.kind == SYM:
            return f"sym{self.cls!r}"
        if self.kind == EPS:
            return "eps"
        return f"{_KIND_NAMES[self.kind]}({self.group})"


def sym(cls) -> Label:
    return Label(SYM, cls=cls)


def eps() -> Label:
    return Label(EPS)


def open_(g) -> Label:
    return Label(OPEN, group=g)


def close(g) -> Label:
    return Label(CLOSE, group=g)


def backref(g) -> Label:
    return Label(BACKREF, group=g)


@dataclass
class Mfa:
    n_states: int
    out: list  # out[q] = list[(Label, dst)] in priority order
    initial: int
    accepting: set
    sink: int | None = None  # set by oracle.sink()

    def add_state(self):
        self.out.append([])
        self.n_states += 1
        return self.n_states - 1

    def add_edge(self, src, label, dst):
        self.out[src].append((label, dst))

    def edges(self):
        for q, lst in enumerate(self.out):
            for label, dst in lst:
                yield q, label, dst

    def groups(self) -> set:
        return {lab.group for _, lab, _ in self.edges() if lab.kind in (OPEN, CLOSE, BACKREF)}

    def n_transitions(self):
        return sum(len(lst) for lst in self.out)

    def max_out(self) -> int:
        return max((len(lst) for lst in self.out), default=0)

    def dump(self) -> str:
        """Stable textual form, mostly for tests and debugging."""
        lines = [f"initial {self.initial}", "accepting " + " ".join(map(str, sorted(self.accepting)))]
        for q, lst in enumerate(self.out):
            for label, dst in lst:
                lines.append(f"  {q} -{label!r}-> {dst}")
        return "\n".join(lines)


def _zero_cost(label) -> bool:
    return label.kind in (EPS, OPEN, CLOSE)


# ---------------------------------------------------------------------------
# Thompson-style compilation


def compile_ast(node, simplify=True) -> Mfa:
    """Compile an AST fragment-wise. Every fragment has one entry and one exit."""
    a = Mfa(0, [], 0, set())

    def frag(n):
        s = a.add_state()
        if isinstance(n, Empty):
            e = a.add_state()
            a.add_edge(s, eps(), e)
            return s, e
        if isinstance(n, Symbol):
            e = a.add_state()
            a.add_edge(s, sym(n.cls), e)
            return s, e
        if isinstance(n, Backref):
            e = a.add_state()
            a.add_edge(s, backref(n.group), e)
            return s, e
        if isinstance(n, Capture):
            cs, ce = frag(n.child)
            e = a.add_state()
            a.add_edge(s, open_(n.group), cs)
            a.add_edge(ce, close(n.group), e)
            return s, e
        if isinstance(n, Concat):
            first = frag(n.parts[0])
            prev_end = first[1]
            a.add_edge(s, eps(), first[0])
            for p in n.parts[1:]:
                ps, pe = frag(p)
                a.add_edge(prev_end, eps(), ps)
                prev_end = pe
            return s, prev_end
        if isinstance(n, Alt):
            e = a.add_state()
            for p in n.parts:  # edge order = branch priority
                ps, pe = frag(p)
                a.add_edge(s, eps(), ps)
                a.add_edge(pe, eps(), e)
            return s, e
        if isinstance(n, Star):
            cs, ce = frag(n.child)
            e = a.add_state()
            if n.greedy:
                a.add_edge(s, eps(), cs)  # enter first
                a.add_edge(s, eps(), e)
                a.add_edge(ce, eps(), cs)  # repeat first
                a.add_edge(ce, eps(), e)
            else:
                a.add_edge(s, eps(), e)
                a.add_edge(s, eps(), cs)
                a.add_edge(ce, eps(), e)
                a.add_edge(ce, eps(), cs)
            return s, e
        raise TypeError(f"cannot compile {n!r}")

    start, end = frag(node)
    a.initial = start
    a.accepting = {end}
    if simplify:
        a = eliminate_eps_loops(a)
        a = trim(a)
        _reject_zero_cost_backref_cycles(a)
    return a


def compile_pattern(pattern: str, flags=frozenset()) -> Mfa:
    return compile_ast(syntax.parse_rewb(pattern, flags))


# ---------------------------------------------------------------------------
# Zero-cost cycle elimination


def _zero_sccs(a: Mfa):
    """Tarjan SCCs over the zero-cost-edge subgraph (iterative)."""
    index = [-1] * a.n_states
    low = [0] * a.n_states
    on_stack = [False] * a.n_states
    stack = []
    sccs = []
    counter = [0]

    for root in range(a.n_states):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            zedges = [dst for lab, dst in a.out[v] if _zero_cost(lab)]
            while ei < len(zedges):
                w = zedges[ei]
                ei += 1
                if index[w] == -1:
                    work[-1] = (v, ei)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return sccs


class UnsupportedPattern(ValueError):
    """An analyzable parse that the automaton model cannot represent faithfully."""


def eliminate_eps_loops(a: Mfa) -> Mfa:
    """Contract pure-eps cycles so no zero-cost cycle remains.

    Each eps-only SCC collapses to its smallest state id; duplicate resulting
    edges are removed, order kept otherwise. A zero-cost cycle carrying
    open/close edges (a capture that can repeat while consuming nothing, e.g.
    a nullable group under a star) cannot be contracted without changing
    capture semantics, so it is rejected.
    """
    while True:
        sccs = _zero_zyclic_components(a)
        if not sccs:
            return a
        for comp in sccs:
            cs = set(comp)
            for q in comp:
                for label, dst in a.out[q]:
                    if dst in cs and _zero_cost(label) and label.kind != EPS:
                        raise UnsupportedPattern(
                            "capture group can repeat without consuming input"
                        )
        rep = list(range(a.n_states))
        for comp in sccs:
            r = min(comp)
            for q in comp:
                rep[q] = r
        merged = Mfa(a.n_states, [[] for _ in range(a.n_states)], rep[a.initial], {rep[q] for q in a.accepting})
        seen = [set() for _ in range(a.n_states)]
        for q in range(a.n_states):  # ascending id keeps the order deterministic
            r = rep[q]
            for label, dst in a.out[q]:
                d = rep[dst]
                if r == d and label.kind == EPS:
                    continue  # internal eps edge of a contracted cycle
                key = (label, d)
                if key in seen[r]:
                    continue
                seen[r].add(key)
                merged.out[r].append(key)
        a = merged


def _zero_zyclic_components(a: Mfa):
    """SCCs that actually contain a zero-cost cycle (size > 1 or a zero self-loop)."""
    out = []
    for comp in _zero_sccs(a):
        if len(comp) > 1:
            out.append(comp)
        else:
            q = comp[0]
            if any(dst == q and _zero_cost(lab) for lab, dst in a.out[q]):
                out.append(comp)
    return out


def reachable_from(a: Mfa, sources, excluded=frozenset()):
    """Forward reachability, not following labels in `excluded`."""
    seen = set(sources)
    work = list(sources)
    while work:
        q = work.pop()
        for label, dst in a.out[q]:
            if label in excluded:
                continue
            if dst not in seen:
                seen.add(dst)
                work.append(dst)
    return seen


def coreachable_to(a: Mfa, targets, excluded=frozenset()):
    rev = [[] for _ in range(a.n_states)]
    for q, label, dst in a.edges():
        if label in excluded:
            continue
        rev[dst].append(q)
    seen = set(targets)
    work = list(targets)
    while work:
        q = work.pop()
        for p in rev[q]:
            if p not in seen:
                seen.add(p)
                work.append(p)
    return seen


def _min_span_len(a: Mfa, g: int, min_len: dict) -> float:
    """Shortest consumed length between opening and closing group g, with
    backref edges weighted by the current per-group estimates."""
    import heapq
    import math

    starts = [dst for _, lab, dst in a.edges() if lab.kind == OPEN and lab.group == g]
    ends = {src for src, lab, _ in a.edges() if lab.kind == CLOSE and lab.group == g}
    dist = {s: 0 for s in starts}
    pq = [(0, s) for s in starts]
    heapq.heapify(pq)
    while pq:
        d, v = heapq.heappop(pq)
        if d > dist.get(v, math.inf):
            continue
        if v in ends:
            return d
        for lab, dst in a.out[v]:
            if lab.kind == SYM:
                w = 1
            elif lab.kind == BACKREF:
                w = min_len.get(lab.group, 0)
                if w == math.inf:
                    w = 0  # unclosable group: assume the cheapest case
            else:
                w = 0
            nd = d + w
            if nd < dist.get(dst, math.inf):
                dist[dst] = nd
                heapq.heappush(pq, (nd, dst))
    return math.inf


def _reject_zero_cost_backref_cycles(a: Mfa) -> None:
    """Reject automata where a backreference sits on a cycle that can repeat
    without consuming input.

    The cost model charges nothing for an empty backreference match (and, in
    empty-unset semantics, for an unset one), so such a cycle would let the
    matcher spin forever without ever hitting the step limit. Analogous to
    the capture-on-eps-cycle rejection above; conservatively rejects when the
    referenced group may capture the empty string or may still be unset when
    the backreference fires.
    """
    ref_groups = sorted({lab.group for _, lab, _ in a.edges() if lab.kind == BACKREF})
    if not ref_groups:
        return
    # least fixpoint of minimum capture lengths (monotone, so few rounds)
    min_len = {g: 0 for g in ref_groups}
    for _ in range(len(ref_groups) + 1):
        nxt = {g: _min_span_len(a, g, min_len) for g in ref_groups}
        if nxt == min_len:
            break
        min_len = nxt
    unset_reach = {
        g: reachable_from(a, {a.initial}, excluded=frozenset({close(g)}))
        for g in ref_groups
    }
    zero_adj = [[] for _ in range(a.n_states)]
    zero_backrefs = []
    for src, lab, dst in a.edges():
        if lab.kind in (EPS, OPEN, CLOSE):
            zero_adj[src].append(dst)
        elif lab.kind == BACKREF:
            if min_len[lab.group] == 0 or src in unset_reach[lab.group]:
                zero_adj[src].append(dst)
                zero_backrefs.append((src, dst))
    for src, dst in zero_backrefs:
        seen = {dst}
        work = [dst]
        while work:
            v = work.pop()
            if v == src:
                raise UnsupportedPattern(
                    "backreference can repeat without consuming input"
                )
            for w in zero_adj[v]:
                if w not in seen:
                    seen.add(w)
                    work.append(w)


def trim(a: Mfa) -> Mfa:
    """Drop states not on any initial-to-accepting walk; renumber densely."""
    live = reachable_from(a, {a.initial}) & coreachable_to(a, a.accepting)
    live.add(a.initial)
    order = sorted(live)
    remap = {q: i for i, q in enumerate(order)}
    b = Mfa(len(order), [[] for _ in order], remap[a.initial], {remap[q] for q in a.accepting if q in live})
    for q in order:
        for label, dst in a.out[q]:
            if dst in live:
                b.out[remap[q]].append((label, remap[dst]))
    return b
