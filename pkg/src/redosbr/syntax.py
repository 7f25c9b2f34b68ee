"""Regex-with-backreferences syntax: AST, parser, printer, rule extraction.

The supported dialect is the PCRE subset needed for backreference ReDoS
analysis: literals, character classes (incl. negation and \\d \\w \\s style
shorthands), `.`, alternation, concatenation, greedy/lazy `* + ? {m,n}`,
capturing groups, non-capturing groups and numeric backreferences. Trailing
`i` and `s` flags are honored. Everything else (anchors, lookarounds, atomic
groups, inline modifiers, named groups, possessive quantifiers) is rejected
with an `unsupported-feature` diagnostic rather than silently mis-analyzed.

Sugar quantifiers are desugared at parse time onto the core constructs
(empty, symbol, concat, alt, star, capture, backref); bounded repeats expand
up to a cap of 64 copies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .charclass import CharClass, DIGIT, WORD, SPACE, DOT_NO_NL

REPEAT_CAP = 64


class ParseError(ValueError):
    """Raised for any pattern we cannot or will not analyze.

    kind is one of 'syntax-error', 'unsupported-feature', 'invalid-backref'.
    """

    def __init__(self, kind, message, pos):
        super().__init__(f"{kind} at {pos}: {message}")
        self.kind = kind
        self.pos = pos
        self.reason = message


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Empty(Node):
    pass


@dataclass(frozen=True)
class Symbol(Node):
    cls: CharClass


@dataclass(frozen=True)
class Concat(Node):
    parts: tuple


@dataclass(frozen=True)
class Alt(Node):
    # branch order is match priority (leftmost branch tried first)
    parts: tuple


@dataclass(frozen=True)
class Star(Node):
    child: Node
    greedy: bool = True


@dataclass(frozen=True)
class Capture(Node):
    group: int
    child: Node


@dataclass(frozen=True)
class Backref(Node):
    group: int


EMPTY = Empty()


def _concat(parts):
    flat = []
    for p in parts:
        if isinstance(p, Concat):
            flat.extend(p.parts)
        elif not isinstance(p, Empty):
            flat.append(p)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Concat(tuple(flat))


def group_ids(node) -> set:
    """All capture group ids occurring in the tree."""
    out = set()

    def walk(n):
        if isinstance(n, Capture):
            out.add(n.group)
            walk(n.child)
        elif isinstance(n, (Concat, Alt)):
            for p in n.parts:
                walk(p)
        elif isinstance(n, Star):
            walk(n.child)

    walk(node)
    return out


def backref_ids(node) -> set:
    out = set()

    def walk(n):
        if isinstance(n, Backref):
            out.add(n.group)
        elif isinstance(n, Capture):
            walk(n.child)
        elif isinstance(n, (Concat, Alt)):
            for p in n.parts:
                walk(p)
        elif isinstance(n, Star):
            walk(n.child)

    walk(node)
    return out


# ---------------------------------------------------------------------------
# Parser

_CLASS_SHORTHANDS = {
    "d": DIGIT,
    "D": DIGIT.complement(),
    "w": WORD,
    "W": WORD.complement(),
    "s": SPACE,
    "S": SPACE.complement(),
}

_CONTROL_ESCAPES = {
    "n": 0x0A,
    "r": 0x0D,
    "t": 0x09,
    "f": 0x0C,
    "v": 0x0B,
    "a": 0x07,
    "e": 0x1B,
    "0": 0x00,
}


class _Parser:
    def __init__(self, pattern, flags):
        self.src = pattern
        self.pos = 0
        self.flags = flags
        self.n_groups = 0

    def error(self, kind, msg, pos=None):
        raise ParseError(kind, msg, self.pos if pos is None else pos)

    def peek(self):
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def take(self):
        c = self.src[self.pos]
        self.pos += 1
        return c

    def eat(self, c):
        if self.peek() == c:
            self.pos += 1
            return True
        return False

    # -- entry

    def parse(self):
        node = self.alternation()
        if self.pos != len(self.src):
            self.error("syntax-error", f"unexpected {self.peek()!r}")
        for ref in sorted(backref_ids(node)):
            if ref < 1 or ref > self.n_groups:
                self.error("invalid-backref", f"\\{ref} refers to a nonexistent group", 0)
        return node

    def alternation(self):
        branches = [self.concatenation()]
        while self.eat("|"):
            branches.append(self.concatenation())
        if len(branches) == 1:
            return branches[0]
        return Alt(tuple(branches))

    def concatenation(self):
        parts = []
        while self.pos < len(self.src) and self.peek() not in "|)":
            parts.append(self.quantified())
        return _concat(parts)

    def quantified(self):
        atom = self.atom()
        while True:
            c = self.peek()
            if c == "*":
                self.take()
                atom = Star(atom, greedy=not self._lazy_marker())
            elif c == "+":
                self.take()
                greedy = not self._lazy_marker()
                atom = _concat([atom, Star(atom, greedy=greedy)])
            elif c == "?":
                self.take()
                atom = self._optional(atom, greedy=not self._lazy_marker())
            elif c == "{":
                rep = self._try_bounded(atom)
                if rep is None:
                    break
                atom = rep
            else:
                break
        return atom

    def _lazy_marker(self):
        if self.peek() == "?":
            self.take()
            return True
        if self.peek() == "+":
            self.error("unsupported-feature", "possessive quantifier")
        return False

    @staticmethod
    def _optional(node, greedy):
        return Alt((node, EMPTY)) if greedy else Alt((EMPTY, node))

    def _try_bounded(self, atom):
        # `{` is a literal when it does not open a well-formed bound
        start = self.pos
        self.take()
        digits = ""
        while self.peek().isdigit():
            digits += self.take()
        if not digits:
            self.pos = start
            return None
        lo = int(digits)
        hi = lo
        if self.eat(","):
            digits = ""
            while self.peek().isdigit():
                digits += self.take()
            hi = int(digits) if digits else None
        if not self.eat("}"):
            self.pos = start
            return None
        greedy = not self._lazy_marker()
        if hi is not None and hi < lo:
            self.error("syntax-error", "repeat bound {m,n} with n < m", start)
        if max(lo, hi or 0) > REPEAT_CAP:
            self.error("unsupported-feature", f"repeat bound above {REPEAT_CAP}", start)
        parts = [atom] * lo
        if hi is None:
            parts.append(Star(atom, greedy=greedy))
        else:
            tail = EMPTY
            for _ in range(hi - lo):
                tail = self._optional(_concat([atom, tail]), greedy)
            parts.append(tail)
        return _concat(parts)

    def atom(self):
        c = self.peek()
        if c == "":
            self.error("syntax-error", "pattern ended unexpectedly")
        if c == "(":
            return self.group()
        if c == "[":
            return Symbol(self.char_class())
        if c == ".":
            self.take()
            return Symbol(CharClass.full() if "s" in self.flags else DOT_NO_NL)
        if c == "\\":
            return self.escape_atom()
        if c in "^$":
            self.error("unsupported-feature", f"anchor {c!r}")
        if c in "*+?":
            self.error("syntax-error", f"quantifier {c!r} with nothing to repeat")
        self.take()
        return Symbol(self._lit(c))

    def _lit(self, c):
        cls = CharClass.single(c)
        return cls.widen_ascii_case() if "i" in self.flags else cls

    def group(self):
        open_pos = self.pos
        self.take()  # (
        capturing = True
        if self.peek() == "?":
            self.take()
            c = self.peek()
            if c == ":":
                self.take()
                capturing = False
            elif c in "=!<>P'":
                self.error("unsupported-feature", "lookaround/atomic/named group", open_pos)
            else:
                self.error("unsupported-feature", f"inline modifier group (?{c}", open_pos)
        if capturing:
            self.n_groups += 1
            gid = self.n_groups
        body = self.alternation()
        if not self.eat(")"):
            self.error("syntax-error", "unclosed group", open_pos)
        return Capture(gid, body) if capturing else body

    def escape_atom(self):
        pos = self.pos
        self.take()  # backslash
        c = self.peek()
        if c == "":
            self.error("syntax-error", "trailing backslash", pos)
        if c.isdigit() and c != "0":
            num = 0
            while self.peek().isdigit() and num * 10 + int(self.peek()) <= 99:
                num = num * 10 + int(self.take())
            return Backref(num)
        if c in "AbBzZG":
            self.error("unsupported-feature", f"\\{c} assertion", pos)
        got = self.escape_char_or_class()
        if isinstance(got, CharClass):
            return Symbol(got)
        return Symbol(self._lit(chr(got)))

    def escape_char_or_class(self):
        """Shared by top-level and in-class escapes. Returns a code point or a CharClass."""
        c = self.take()
        if c in _CLASS_SHORTHANDS:
            return _CLASS_SHORTHANDS[c]
        if c in _CONTROL_ESCAPES:
            return _CONTROL_ESCAPES[c]
        if c == "x":
            if self.eat("{"):
                digits = ""
                while self.peek() != "}":
                    if self.peek() == "":
                        self.error("syntax-error", "unclosed \\x{")
                    digits += self.take()
                self.take()
            else:
                digits = ""
                for _ in range(2):
                    if self.peek() and self.peek() in "0123456789abcdefABCDEF":
                        digits += self.take()
                if len(digits) != 2:
                    self.error("syntax-error", "\\x needs two hex digits")
            try:
                return int(digits, 16)
            except ValueError:
                self.error("syntax-error", f"bad hex escape \\x{{{digits}}}")
        if c == "u":
            digits = ""
            for _ in range(4):
                if self.peek() and self.peek() in "0123456789abcdefABCDEF":
                    digits += self.take()
            if len(digits) != 4:
                self.error("syntax-error", "\\u needs four hex digits")
            return int(digits, 16)
        if c.isalnum():
            self.error("unsupported-feature", f"escape \\{c}")
        return ord(c)

    def char_class(self):
        open_pos = self.pos
        self.take()  # [
        negated = self.eat("^")
        cls = CharClass.empty()
        first = True
        while True:
            c = self.peek()
            if c == "":
                self.error("syntax-error", "unclosed character class", open_pos)
            if c == "]" and not first:
                self.take()
                break
            first = False
            item = self._class_item()
            if isinstance(item, CharClass):
                cls = cls.union(item)
                continue
            lo = item
            if self.peek() == "-" and self.pos + 1 < len(self.src) and self.src[self.pos + 1] != "]":
                self.take()
                hi = self._class_item()
                if isinstance(hi, CharClass):
                    self.error("syntax-error", "class shorthand cannot end a range")
                if hi < lo:
                    self.error("syntax-error", "reversed range in class")
                cls = cls.union(CharClass.of((lo, hi)))
            else:
                cls = cls.union(CharClass.of((lo, lo)))
        if "i" in self.flags:
            cls = cls.widen_ascii_case()
        return cls.complement() if negated else cls

    def _class_item(self):
        c = self.take()
        if c != "\\":
            return ord(c)
        if self.peek() == "b":
            self.take()
            return 0x08  # backspace inside a class
        return self.escape_char_or_class()


def parse_rewb(pattern: str, flags=frozenset()) -> Node:
    """Parse a pattern into the core AST, or raise ParseError."""
    unknown = set(flags) - {"i", "s"}
    if unknown:
        raise ParseError("unsupported-feature", f"flags {''.join(sorted(unknown))}", 0)
    return _Parser(pattern, frozenset(flags)).parse()


# ---------------------------------------------------------------------------
# Printer (round-trips through parse_rewb for parser-produced trees)

_TOP_SPECIAL = set(".*+?()[]{}|\\^$/")
_CLASS_SPECIAL = set("]\\^-")

_NAMED_CLASSES = [(DIGIT, "\\d"), (WORD, "\\w"), (SPACE, "\\s"), (DOT_NO_NL, "."), (CharClass.full(), "[\\s\\S]")]


def _show_cp(cp, in_class):
    c = chr(cp)
    special = _CLASS_SPECIAL if in_class else _TOP_SPECIAL
    if c in special:
        return "\\" + c
    if 0x20 <= cp < 0x7F:
        return c
    return f"\\x{{{cp:x}}}"


def _show_class(cls: CharClass) -> str:
    for named, text in _NAMED_CLASSES:
        if cls == named:
            return text
    if cls.size() == 1:
        return _show_cp(cls.min_cp(), in_class=False)
    body = []
    for lo, hi in cls.ranges:
        if lo == hi:
            body.append(_show_cp(lo, True))
        elif hi == lo + 1:
            body.append(_show_cp(lo, True) + _show_cp(hi, True))
        else:
            body.append(f"{_show_cp(lo, True)}-{_show_cp(hi, True)}")
    return "[" + "".join(body) + "]"


def to_pattern(node) -> str:
    """Render an AST back to pattern text using only core constructs."""

    def atomish(n):
        # true when n renders as a single quantifiable unit
        return isinstance(n, (Symbol, Capture, Backref)) or (isinstance(n, Symbol))

    def render(n, ctx):
        # ctx: 'alt' (top/alt branch), 'concat', 'atom'
        if isinstance(n, Empty):
            return "" if ctx != "atom" else "(?:)"
        if isinstance(n, Symbol):
            return _show_class(n.cls)
        if isinstance(n, Backref):
            return f"\\{n.group}"
        if isinstance(n, Capture):
            return f"({render(n.child, 'alt')})"
        if isinstance(n, Star):
            return render(n.child, "atom") + ("*" if n.greedy else "*?")
        if isinstance(n, Concat):
            text = "".join(render(p, "concat") for p in n.parts)
            return f"(?:{text})" if ctx == "atom" else text
        if isinstance(n, Alt):
            text = "|".join(render(p, "alt") for p in n.parts)
            return f"(?:{text})" if ctx != "alt" else text
        raise TypeError(f"unknown node {n!r}")

    _ = atomish
    return render(node, "alt")


# ---------------------------------------------------------------------------
# Snort-style rule ingestion


def _split_options(body: str):
    """Split a rule option body on ';' respecting quotes and backslash escapes."""
    out, cur, in_q, esc = [], [], False, False
    for ch in body:
        if esc:
            cur.append(ch)
            esc = False
        elif ch == "\\":
            cur.append(ch)
            esc = True
        elif ch == '"':
            cur.append(ch)
            in_q = not in_q
        elif ch == ";" and not in_q:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return out


def _unquote(value: str) -> str:
    value = value.strip()
    if value.startswith('"') and value.endswith('"') and len(value) >= 2:
        value = value[1:-1]
    out, esc = [], False
    for ch in value:
        if esc:
            if ch not in '";\\':
                out.append("\\")
            out.append(ch)
            esc = False
        elif ch == "\\":
            esc = True
        else:
            out.append(ch)
    if esc:
        out.append("\\")
    return "".join(out)


def extract_pcre(rule: str):
    """Extract (pattern_body, flags) pairs from one rule's pcre options.

    Returns an empty list when the rule has no pcre option. Negated options
    (pcre:!"...") are extracted like positive ones.
    """
    lp = rule.find("(")
    rp = rule.rfind(")")
    if lp < 0 or rp <= lp:
        return []
    results = []
    for opt in _split_options(rule[lp + 1 : rp]):
        if ":" not in opt:
            continue
        key, _, value = opt.partition(":")
        if key.strip() != "pcre":
            continue
        value = value.strip()
        if value.startswith("!"):
            value = value[1:].strip()
        value = _unquote(value)
        if not value.startswith("/"):
            continue
        last = value.rfind("/")
        if last == 0:
            continue
        body = value[1:last]
        flags = set(value[last + 1 :].strip())
        results.append((body, flags))
    return results


def iter_rule_lines(text: str):
    """Yield (lineno, logical_rule) joining backslash continuations, skipping comments."""
    pending = ""
    start = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if pending:
            line = pending + line.lstrip()
        else:
            start = i
        if line.endswith("\\"):
            pending = line[:-1]
            continue
        pending = ""
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield start, stripped
