"""Instrumented Spencer-style backtracking matcher.

The matcher runs the memory automaton with an explicit frame stack and an
undo log for capture slots, counting work in calibrated step units:

    successful symbol consumption ......... 1
    failed symbol test ..................... 0
    eps / open / close ..................... 0
    backref, committed capture length l:
        l = 0 .............................. 0 (success)
        l > remaining input ................ 1 (fast fail)
        full match ......................... l (success)
        mismatch at offset p ............... p + 1 (fail)
    unset backref, unset-fails semantics ... 1 (fail)
    unset backref, empty-match semantics ... 0 (success)

The kernel itself is a single function over packed int arrays; it is compiled
with numba unless REDOSBR_PURE_PYTHON is set, in which case the identical
Python definition runs as-is.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .automaton import BACKREF, CLOSE, EPS, OPEN, SYM, Mfa

DEFAULT_LIMIT = int(os.environ.get("REDOSBR_MATCH_LIMIT", 10_000_000))

SEM_UNSET_FAILS = 0
SEM_UNSET_EMPTY = 1


class CompiledMfa:
    """CSR-packed transition tables ready for the kernel."""

    def __init__(self, a: Mfa):
        self.mfa = a
        gids = sorted(a.groups())
        self.group_ids = gids
        self.group_index = {g: i for i, g in enumerate(gids)}

        classes = []
        cls_index = {}
        kinds, args, dsts = [], [], []
        off = [0]
        for q in range(a.n_states):
            for label, dst in a.out[q]:
                kinds.append(label.kind)
                dsts.append(dst)
                if label.kind == SYM:
                    key = label.cls
                    if key not in cls_index:
                        cls_index[key] = len(classes)
                        classes.append(key)
                    args.append(cls_index[key])
                elif label.kind == EPS:
                    args.append(0)
                else:
                    args.append(self.group_index[label.group])
            off.append(len(kinds))

        self.out_off = np.asarray(off, dtype=np.int64)
        self.tr_kind = np.asarray(kinds, dtype=np.int64) if kinds else np.zeros(0, np.int64)
        self.tr_arg = np.asarray(args, dtype=np.int64) if args else np.zeros(0, np.int64)
        self.tr_dst = np.asarray(dsts, dtype=np.int64) if dsts else np.zeros(0, np.int64)

        coff = [0]
        los, his = [], []
        for cls in classes:
            for lo, hi in cls.ranges:
                los.append(lo)
                his.append(hi)
            coff.append(len(los))
        self.cls_off = np.asarray(coff, dtype=np.int64)
        self.cls_lo = np.asarray(los, dtype=np.int64) if los else np.zeros(0, np.int64)
        self.cls_hi = np.asarray(his, dtype=np.int64) if his else np.zeros(0, np.int64)

        acc = np.zeros(a.n_states, dtype=np.uint8)
        for q in a.accepting:
            acc[q] = 1
        self.accepting = acc
        self.initial = a.initial
        self.n_groups = len(gids)


def encode_input(s: str) -> np.ndarray:
    return np.fromiter((ord(c) for c in s), dtype=np.int64, count=len(s))


def resolve_backref(mem, group_slot: int):
    """Committed (start, end) of a dense group slot, or None when unset."""
    o, c = int(mem[3 * group_slot + 1]), int(mem[3 * group_slot + 2])
    if o < 0 or c < 0:
        return None
    return o, c


def _bt_kernel(
    out_off,
    tr_kind,
    tr_arg,
    tr_dst,
    cls_off,
    cls_lo,
    cls_hi,
    accepting,
    initial,
    s,
    start_j,
    anchor_end,
    exhaustive,
    semantics,
    limit,
    mem,
    snap,
    bre_count,
    bre_chars,
):
    """One anchored-start run. Returns (accepted, steps, aborted).

    mem/snap/bre_* are caller-provided scratch so repeated starts reuse them;
    mem must arrive reset to -1 and is restored on exit via the undo log.
    """
    n = len(s)
    cap = 256
    f_state = np.empty(cap, np.int64)
    f_j = np.empty(cap, np.int64)
    f_ptr = np.empty(cap, np.int64)
    f_mark = np.empty(cap, np.int64)

    ucap = 256
    u_slot = np.empty(ucap, np.int64)
    u_val = np.empty(ucap, np.int64)
    ulen = 0

    steps = np.int64(0)
    accepted = 0
    aborted = 0

    top = 0
    f_state[0] = initial
    f_j[0] = start_j
    f_ptr[0] = out_off[initial]
    f_mark[0] = 0
    if accepting[initial] == 1 and (anchor_end == 0 or start_j == n):
        accepted = 1
        for i in range(len(mem)):
            snap[i] = mem[i]
        if exhaustive == 0:
            return accepted, steps, aborted

    while top >= 0:
        q = f_state[top]
        ptr = f_ptr[top]
        if ptr >= out_off[q + 1]:
            mark = f_mark[top]
            while ulen > mark:
                ulen -= 1
                mem[u_slot[ulen]] = u_val[ulen]
            top -= 1
            continue
        f_ptr[top] = ptr + 1
        j = f_j[top]
        kind = tr_kind[ptr]
        arg = tr_arg[ptr]
        dst = tr_dst[ptr]

        success = False
        j2 = j
        mark0 = ulen

        if kind == 0:  # eps
            success = True
        elif kind == 1:  # symbol
            if j < n:
                c = s[j]
                for r in range(cls_off[arg], cls_off[arg + 1]):
                    if cls_lo[r] <= c <= cls_hi[r]:
                        success = True
                        break
            if success:
                j2 = j + 1
                steps += 1
        elif kind == 2:  # open
            if ulen + 1 > ucap:
                ucap *= 2
                ns_ = np.empty(ucap, np.int64)
                nv_ = np.empty(ucap, np.int64)
                ns_[:ulen] = u_slot[:ulen]
                nv_[:ulen] = u_val[:ulen]
                u_slot, u_val = ns_, nv_
            u_slot[ulen] = 3 * arg
            u_val[ulen] = mem[3 * arg]
            ulen += 1
            mem[3 * arg] = j
            success = True
        elif kind == 3:  # close commits the in-progress slot
            if ulen + 2 > ucap:
                ucap *= 2
                ns_ = np.empty(ucap, np.int64)
                nv_ = np.empty(ucap, np.int64)
                ns_[:ulen] = u_slot[:ulen]
                nv_[:ulen] = u_val[:ulen]
                u_slot, u_val = ns_, nv_
            u_slot[ulen] = 3 * arg + 1
            u_val[ulen] = mem[3 * arg + 1]
            u_slot[ulen + 1] = 3 * arg + 2
            u_val[ulen + 1] = mem[3 * arg + 2]
            ulen += 2
            mem[3 * arg + 1] = mem[3 * arg]
            mem[3 * arg + 2] = j
            success = True
        else:  # backref
            o = mem[3 * arg + 1]
            c = mem[3 * arg + 2]
            compared = np.int64(0)
            if o < 0 or c < 0:
                if semantics == 1:
                    success = True
                else:
                    steps += 1
            else:
                l = c - o
                if l == 0:
                    success = True
                elif l > n - j:
                    steps += 1
                else:
                    p = np.int64(0)
                    while p < l and s[o + p] == s[j + p]:
                        p += 1
                    if p == l:
                        success = True
                        j2 = j + l
                        steps += l
                        compared = l
                    else:
                        steps += p + 1
                        compared = p + 1
            bre_count[arg] += 1
            bre_chars[arg] += compared

        if steps >= limit:
            aborted = 1
            break

        if success:
            top += 1
            if top >= cap:
                cap *= 2
                a_, b_, c_, d_ = (
                    np.empty(cap, np.int64),
                    np.empty(cap, np.int64),
                    np.empty(cap, np.int64),
                    np.empty(cap, np.int64),
                )
                a_[:top] = f_state[:top]
                b_[:top] = f_j[:top]
                c_[:top] = f_ptr[:top]
                d_[:top] = f_mark[:top]
                f_state, f_j, f_ptr, f_mark = a_, b_, c_, d_
            f_state[top] = dst
            f_j[top] = j2
            f_ptr[top] = out_off[dst]
            f_mark[top] = mark0
            if accepting[dst] == 1 and (anchor_end == 0 or j2 == n):
                if accepted == 0:
                    accepted = 1
                    for i in range(len(mem)):
                        snap[i] = mem[i]
                if exhaustive == 0:
                    break

    # leave mem clean for the next start position
    while ulen > 0:
        ulen -= 1
        mem[u_slot[ulen]] = u_val[ulen]
    return accepted, steps, aborted


_PURE = os.environ.get("REDOSBR_PURE_PYTHON", "") not in ("", "0")

if _PURE:
    bt_kernel = _bt_kernel
else:  # pragma: no branch
    from numba import njit

    bt_kernel = njit(cache=True)(_bt_kernel)

KERNEL_MODE = "python" if _PURE else "numba"


@dataclass
class MatchOutcome:
    accepted: bool
    steps: int
    aborted: bool
    captures: dict  # group id -> (start, end) | None, snapshot at first accept
    backref_evals: dict  # group id -> (evaluations, chars compared)
    match_start: int | None = None


def bt_run(
    compiled,
    text: str,
    anchored: bool = True,
    exhaustive: bool = False,
    semantics: int = SEM_UNSET_FAILS,
    limit: int | None = None,
    kernel=None,
) -> MatchOutcome:
    """Run the matcher over `text`.

    anchored=True matches the whole input from position 0; anchored=False
    scans start positions left to right and accepts any prefix (leftmost
    semantics). exhaustive=True disables all early exits, which is what the
    attack measurements want.
    """
    if isinstance(compiled, Mfa):
        compiled = CompiledMfa(compiled)
    if kernel == "python":
        kernel = _bt_kernel
    elif kernel == "numba":
        if _PURE:
            raise ValueError("numba kernel unavailable under REDOSBR_PURE_PYTHON")
        kernel = bt_kernel
    k = kernel or bt_kernel
    if limit is None:
        limit = DEFAULT_LIMIT
    s = encode_input(text)
    n = len(s)
    g = compiled.n_groups
    mem = np.full(3 * g if g else 1, -1, dtype=np.int64)
    snap = np.full_like(mem, -1)
    bre_count = np.zeros(g if g else 1, dtype=np.int64)
    bre_chars = np.zeros_like(bre_count)

    starts = [0] if anchored else list(range(n + 1))
    total = 0
    accepted = False
    aborted = False
    match_start = None
    first_snap = None
    for start in starts:
        got, st, ab = k(
            compiled.out_off,
            compiled.tr_kind,
            compiled.tr_arg,
            compiled.tr_dst,
            compiled.cls_off,
            compiled.cls_lo,
            compiled.cls_hi,
            compiled.accepting,
            compiled.initial,
            s,
            start,
            1 if anchored else 0,
            1 if exhaustive else 0,
            semantics,
            limit - total,
            mem,
            snap,
            bre_count,
            bre_chars,
        )
        total += int(st)
        if got and not accepted:
            accepted = True
            match_start = start
            first_snap = snap.copy()
        if ab:
            aborted = True
            break
        if accepted and not exhaustive:
            break

    captures = {}
    if accepted and first_snap is not None:
        for gid, slot in compiled.group_index.items():
            captures[gid] = resolve_backref(first_snap, slot)
    evals = {
        gid: (int(bre_count[slot]), int(bre_chars[slot]))
        for gid, slot in compiled.group_index.items()
    }
    return MatchOutcome(accepted, total, aborted, captures, evals, match_start)
