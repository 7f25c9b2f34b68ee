"""Reference oracles: slow, obviously-correct counterparts of the matcher.

Everything here is independent of the packed-array kernel so the two sides
of the differential tests share no code beyond the automaton itself.
"""

from __future__ import annotations

import math
import sys

from .charclass import CharClass
from .automaton import BACKREF, CLOSE, EPS, OPEN, SYM, Mfa, sym, eps
from . import syntax
from .syntax import Alt, Backref, Capture, Concat, Empty, Star, Symbol

sys.setrecursionlimit(1_000_000)

SEM_UNSET_FAILS = 0
SEM_UNSET_EMPTY = 1


class OracleBudgetExceeded(RuntimeError):
    pass


def sink(a: Mfa) -> Mfa:
    """Universal-suffix closure: eps to a fresh sink from every state, with a
    full-alphabet self-loop; the sink is the only accepting state."""
    b = Mfa(a.n_states, [list(lst) for lst in a.out], a.initial, set())
    qs = b.add_state()
    for q in range(a.n_states):
        b.add_edge(q, eps(), qs)
    b.add_edge(qs, sym(CharClass.full()), qs)
    b.accepting = {qs}
    b.sink = qs
    return b


def _apply(a, s, mem, label, j, semantics):
    """Simulate one transition. Returns (success, j2, cost, consumed, commit)
    where commit is an undoable memory mutation description or None."""
    n = len(s)
    if label.kind == EPS:
        return True, j, 0, 0, None
    if label.kind == SYM:
        if j < n and label.cls.contains(ord(s[j])):
            return True, j + 1, 1, 1, None
        return False, j, 0, 0, None
    if label.kind == OPEN:
        return True, j, 0, 0, ("tmp", label.group, j)
    if label.kind == CLOSE:
        tmp = mem.get(label.group, (None, None, None))[0]
        return True, j, 0, 0, ("commit", label.group, (tmp, j))
    # backref
    g = mem.get(label.group, (None, None, None))
    o, c = g[1], g[2]
    if o is None or c is None:
        if semantics == SEM_UNSET_EMPTY:
            return True, j, 0, 0, None
        return False, j, 1, 0, None
    length = c - o
    if length == 0:
        return True, j, 0, 0, None
    if length > n - j:
        return False, j, 1, 0, None
    p = 0
    while p < length and s[o + p] == s[j + p]:
        p += 1
    if p == length:
        return True, j + length, length, length, None
    return False, j, p + 1, 0, None


def _do(mem, commit):
    if commit is None:
        return None
    kind, g, val = commit
    old = mem.get(g, (None, None, None))
    if kind == "tmp":
        mem[g] = (val, old[1], old[2])
    else:
        mem[g] = (old[0], val[0], val[1])
    return (g, old)


def _undo(mem, saved):
    if saved is not None:
        g, old = saved
        mem[g] = old


def _signatures(a: Mfa, s: str, semantics, max_nodes):
    """All accepting paths, keyed by their consuming-step signature.

    A signature is the tuple of (edge identity, input position) for steps
    that consume at least one char; free moves and zero-length backref steps
    are invisible, so paths that differ only in bookkeeping collapse.
    """
    sigs = set()
    mem = {}
    n = len(s)
    nodes = [0]

    def go(q, j, sig):
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise OracleBudgetExceeded(f"path enumeration exceeded {max_nodes} nodes")
        if q in a.accepting and j == n:
            sigs.add(sig)
        for ei, (label, dst) in enumerate(a.out[q]):
            ok, j2, _cost, consumed, commit = _apply(a, s, mem, label, j, semantics)
            if not ok:
                continue
            saved = _do(mem, commit)
            go(dst, j2, sig + (((q, ei), j),) if consumed else sig)
            _undo(mem, saved)

    go(a.initial, 0, ())
    return sigs, nodes[0]


def abg_s(a: Mfa, s: str, semantics=SEM_UNSET_FAILS, max_nodes=5_000_000) -> int:
    """Ambiguity of `a` on `s`: distinct accepting consuming-step sequences."""
    sigs, _ = _signatures(a, s, semantics, max_nodes)
    return len(sigs)


def sink_abg_s(a: Mfa, s: str, semantics=SEM_UNSET_FAILS, max_nodes=5_000_000) -> int:
    """Sink ambiguity: abg_s of the universal-suffix closure of `a`."""
    target = a if a.sink is not None else sink(a)
    sigs, _ = _signatures(target, s, semantics, max_nodes)
    return len(sigs)


def sink_abg_s_nodes(a: Mfa, s: str, semantics=SEM_UNSET_FAILS, max_nodes=50_000_000) -> int:
    """Call-tree size of the full exploration of the sink closure (one unit
    per visited node). This is the variant the runtime upper bound is stated
    against."""
    target = a if a.sink is not None else sink(a)
    _, nodes = _signatures(target, s, semantics, max_nodes)
    return nodes


def bt_rt_s(a: Mfa, s: str, semantics=SEM_UNSET_FAILS, exhaustive=False, limit=None):
    """Reference backtracking cost. Mirrors the matcher's calibrated step
    units and early-exit behavior exactly, as a plain recursion.

    Returns (steps, accepted, aborted).
    """
    n = len(s)
    mem = {}
    state = {"steps": 0, "accepted": False, "aborted": False}

    class _Stop(Exception):
        pass

    def run(q, j):
        if q in a.accepting and j == n:
            state["accepted"] = True
            if not exhaustive:
                raise _Stop
        for label, dst in a.out[q]:
            ok, j2, cost, _consumed, commit = _apply(a, s, mem, label, j, semantics)
            state["steps"] += cost
            if limit is not None and state["steps"] >= limit:
                state["aborted"] = True
                raise _Stop
            if ok:
                saved = _do(mem, commit)
                try:
                    run(dst, j2)
                finally:
                    _undo(mem, saved)

    try:
        run(a.initial, 0)
    except _Stop:
        pass
    return state["steps"], state["accepted"], state["aborted"]


# ---------------------------------------------------------------------------
# Structural constants and the runtime upper bound


def _group_spans(a: Mfa):
    """group -> (open edges, close edges) as (src, dst) pairs."""
    opens, closes = {}, {}
    for q, label, dst in a.edges():
        if label.kind == OPEN:
            opens.setdefault(label.group, []).append((q, dst))
        elif label.kind == CLOSE:
            closes.setdefault(label.group, []).append((q, dst))
    return opens, closes


def span_states(a: Mfa, group: int) -> set:
    """States lying on some open(g) -> close(g) walk that does not pass
    through close(g) in between."""
    from .automaton import reachable_from, coreachable_to, close as close_label

    opens, closes = _group_spans(a)
    if group not in opens or group not in closes:
        return set()
    excl = frozenset({close_label(group)})
    fwd = reachable_from(a, {d for _, d in opens[group]}, excluded=excl)
    bwd = coreachable_to(a, {sq for sq, _ in closes[group]}, excluded=excl)
    return fwd & bwd


def group_max_len(a: Mfa, group: int, _active=None) -> float:
    """Longest string a group can capture; math.inf when unbounded."""
    if _active is None:
        _active = set()
    if group in _active:
        return math.inf  # self-feeding reference: conservative
    _active = _active | {group}
    opens, closes = _group_spans(a)
    if group not in opens or group not in closes:
        return 0.0
    span = span_states(a, group)
    starts = {d for _, d in opens[group] if d in span}
    ends = {sq for sq, _ in closes[group] if sq in span}
    if not starts or not ends:
        return 0.0

    def succ(v):
        return [
            d
            for lb, d in a.out[v]
            if d in span and not (lb.kind == CLOSE and lb.group == group)
        ]

    # any cycle inside the span means unbounded (zero-cost cycles are gone)
    order, mark = [], {}

    def visit(q):
        stack = [(q, iter(succ(q)))]
        mark[q] = 1
        while stack:
            v, it = stack[-1]
            adv = False
            for w in it:
                if mark.get(w) == 1:
                    return False  # cycle
                if w not in mark:
                    mark[w] = 1
                    stack.append((w, iter(succ(w))))
                    adv = True
                    break
            if not adv:
                stack.pop()
                mark[v] = 2
                order.append(v)
        return True

    for q in starts:
        if q not in mark:
            if not visit(q):
                return math.inf

    # longest path over the span DAG, in reverse topological order
    best = {q: 0.0 for q in order}
    for q in order:  # order is reverse-topological already
        for label, dst in a.out[q]:
            if dst not in span or (label.kind == CLOSE and label.group == group):
                continue
            if label.kind == SYM:
                w = 1.0
            elif label.kind == BACKREF:
                w = group_max_len(a, label.group, _active)
            else:
                w = 0.0
            if math.isinf(w):
                return math.inf
            cand = w + best.get(dst, 0.0)
            if cand > best[q]:
                best[q] = cand
    result = max((best.get(q, 0.0) for q in starts), default=0.0)
    return result


def max_fbrl(a: Mfa) -> float:
    """1 + longest capture among backreferenced groups of bounded length."""
    finite = [
        group_max_len(a, g)
        for g in sorted({lab.group for _, lab, _ in a.edges() if lab.kind == BACKREF})
        if not math.isinf(group_max_len(a, g))
    ]
    return 1.0 + (max(finite) if finite else 0.0)


def unbounded_backref_edges(a: Mfa):
    return [
        (q, label, dst)
        for q, label, dst in a.edges()
        if label.kind == BACKREF and math.isinf(group_max_len(a, label.group))
    ]


def ibr_rct(a: Mfa):
    """Unbounded-backref evaluation budget: |edges| x max static path count to
    any of their sources. None when a loop can re-trigger an evaluation (the
    bound is then inapplicable)."""
    edges = unbounded_backref_edges(a)
    if not edges:
        return 0
    from .automaton import coreachable_to

    max_paths = 0
    for q, _label, _dst in edges:
        upstream = coreachable_to(a, {q})
        # a cycle anywhere upstream can re-evaluate the backref
        counts = {}

        def paths(v, active):
            if v == q:
                return 1
            if v in active:
                raise OracleBudgetExceeded("cycle upstream of backref")
            if v in counts:
                return counts[v]
            total = 0
            for _lab, d in a.out[v]:
                if d in upstream or d == q:
                    total += paths(d, active | {v})
            counts[v] = total
            return total

        try:
            c = paths(a.initial, frozenset()) if a.initial in upstream or a.initial == q else 0
        except OracleBudgetExceeded:
            return None
        max_paths = max(max_paths, c)
    return len(edges) * max_paths


def bt_rt_upper(a: Mfa, s: str, semantics=SEM_UNSET_FAILS) -> float:
    """Static bound: max-out * (1 + longest finite backref) * sink node count
    plus the unbounded-backref term. math.inf when inapplicable."""
    rct = ibr_rct(a)
    if rct is None:
        return math.inf
    nodes = sink_abg_s_nodes(a, s, semantics)
    return a.max_out() * max_fbrl(a) * nodes + rct * len(s)


# ---------------------------------------------------------------------------
# Independent AST-level acceptance (for differentials against the matcher)


def ast_match_positions(node, s: str, j=0, mem=None, semantics=SEM_UNSET_FAILS):
    """Yield (end, mem) for every way `node` can match s[j:...], in priority
    order. mem maps group -> (start, end), committed captures only."""
    if mem is None:
        mem = {}
    n = len(s)
    if isinstance(node, Empty):
        yield j, mem
    elif isinstance(node, Symbol):
        if j < n and node.cls.contains(ord(s[j])):
            yield j + 1, mem
    elif isinstance(node, Backref):
        got = mem.get(node.group)
        if got is None:
            if semantics == SEM_UNSET_EMPTY:
                yield j, mem
        else:
            o, c = got
            piece = s[o:c]
            if s.startswith(piece, j):
                yield j + len(piece), mem
    elif isinstance(node, Capture):
        for j2, m2 in ast_match_positions(node.child, s, j, mem, semantics):
            yield j2, {**m2, node.group: (j, j2)}
    elif isinstance(node, Alt):
        for p in node.parts:
            yield from ast_match_positions(p, s, j, mem, semantics)
    elif isinstance(node, Concat):

        def seq(parts, jj, mm):
            if not parts:
                yield jj, mm
                return
            for j2, m2 in ast_match_positions(parts[0], s, jj, mm, semantics):
                yield from seq(parts[1:], j2, m2)

        yield from seq(list(node.parts), j, mem)
    elif isinstance(node, Star):

        def rep(jj, mm):
            if node.greedy:
                for j2, m2 in ast_match_positions(node.child, s, jj, mm, semantics):
                    if j2 == jj and m2 == mm:
                        continue  # refuse zero-progress iterations
                    yield from rep(j2, m2)
                yield jj, mm
            else:
                yield jj, mm
                for j2, m2 in ast_match_positions(node.child, s, jj, mm, semantics):
                    if j2 == jj and m2 == mm:
                        continue
                    yield from rep(j2, m2)

        yield from rep(j, mem)
    else:
        raise TypeError(f"unknown node {node!r}")


def ast_accepts(node, s: str, semantics=SEM_UNSET_FAILS) -> bool:
    """Anchored whole-string acceptance, straight off the syntax tree."""
    return any(j == len(s) for j, _ in ast_match_positions(node, s, semantics=semantics))


def pattern_accepts(pattern: str, s: str, flags=frozenset(), semantics=SEM_UNSET_FAILS) -> bool:
    return ast_accepts(syntax.parse_rewb(pattern, flags), s, semantics)
