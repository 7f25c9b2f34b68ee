"""Code-point range sets used as transition labels.

A class is a sorted tuple of inclusive (lo, hi) ranges over Unicode code
points. Immutable and hashable so AST nodes stay frozen.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_CP = 0x10FFFF


def _normalize(ranges):
    rs = sorted((lo, hi) for lo, hi in ranges if lo <= hi)
    out = []
    for lo, hi in rs:
        if out and lo <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class CharClass:
    ranges: tuple  # tuple[(int, int), ...], sorted, merged, inclusive

    @staticmethod
    def of(*ranges) -> "CharClass":
        return CharClass(_normalize(ranges))

    @staticmethod
    def single(cp) -> "CharClass":
        if isinstance(cp, str):
            cp = ord(cp)
        return CharClass(((cp, cp),))

    @staticmethod
    def from_chars(chars) -> "CharClass":
        return CharClass(_normalize((ord(c), ord(c)) for c in chars))

    @staticmethod
    def full() -> "CharClass":
        return CharClass(((0, MAX_CP),))

    @staticmethod
    def empty() -> "CharClass":
        return CharClass(())

    def is_empty(self) -> bool:
        return not self.ranges

    def contains(self, cp: int) -> bool:
        # classes are tiny in practice; linear scan is fine
        for lo, hi in self.ranges:
            if lo <= cp <= hi:
                return True
        return False

    def union(self, other: "CharClass") -> "CharClass":
        return CharClass(_normalize(self.ranges + other.ranges))

    def intersect(self, other: "CharClass") -> "CharClass":
        out = []
        for lo1, hi1 in self.ranges:
            for lo2, hi2 in other.ranges:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo <= hi:
                    out.append((lo, hi))
        return CharClass(_normalize(out))

    def complement(self) -> "CharClass":
        out = []
        prev = 0
        for lo, hi in self.ranges:
            if lo > prev:
                out.append((prev, lo - 1))
            prev = hi + 1
        if prev <= MAX_CP:
            out.append((prev, MAX_CP))
        return CharClass(tuple(out))

    def min_cp(self) -> int:
        if not self.ranges:
            raise ValueError("empty class has no minimum")
        return self.ranges[0][0]

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ranges)

    def widen_ascii_case(self) -> "CharClass":
        """Add the opposite-case ASCII letter for every letter in the class."""
        extra = []
        for lo, hi in self.ranges:
            for base, offset in (((ord("a"), ord("z")), -32), ((ord("A"), ord("Z")), 32)):
                l, h = max(lo, base[0]), min(hi, base[1])
                if l <= h:
                    extra.append((l + offset, h + offset))
        if not extra:
            return self
        return CharClass(_normalize(self.ranges + tuple(extra)))

    def __repr__(self):
        def show(cp):
            return chr(cp) if 0x20 <= cp < 0x7F else f"\\x{cp:02x}"

        parts = [show(lo) if lo == hi else f"{show(lo)}-{show(hi)}" for lo, hi in self.ranges[:8]]
        if len(self.ranges) > 8:
            parts.append("...")
        return f"CharClass[{''.join(parts)}]"


# the usual shorthands
DIGIT = CharClass.of((ord("0"), ord("9")))
WORD = CharClass.of((ord("0"), ord("9")), (ord("A"), ord("Z")), (ord("a"), ord("z")), (ord("_"), ord("_")))
SPACE = CharClass.from_chars(" \t\n\r\f\v")
DOT_NO_NL = CharClass.single("\n").complement()
