import pytest
from hypothesis import given, settings, strategies as st

from redosbr.syntax import (
    Alt,
    Backref,
    Capture,
    Concat,
    Empty,
    ParseError,
    Star,
    Symbol,
    extract_pcre,
    iter_rule_lines,
    parse_rewb,
    to_pattern,
)


def test_literal_concat():
    ast = parse_rewb("ab")
    assert isinstance(ast, Concat) and len(ast.parts) == 2


def test_capture_and_backref():
    ast = parse_rewb(r"(a*)\1b")
    cap = ast.parts[0]
    assert isinstance(cap, Capture) and cap.group == 1
    assert isinstance(cap.child, Star)
    assert ast.parts[1] == Backref(1)


def test_noncapturing_group_collapses():
    assert parse_rewb("(?:ab)c") == parse_rewb("abc")


def test_plus_desugars_to_copy_then_star():
    ast = parse_rewb("a+")
    assert isinstance(ast, Concat)
    assert isinstance(ast.parts[0], Symbol) and isinstance(ast.parts[1], Star)


def test_question_desugars_to_alt_with_empty():
    ast = parse_rewb("a?")
    assert isinstance(ast, Alt) and Empty() in ast.parts


def test_bounded_repeat():
    assert parse_rewb("a{2,3}") == parse_rewb("aaa{0,1}") == parse_rewb("aa(?:a?)")


def test_lazy_star_flag():
    assert parse_rewb("a*?") == Star(Symbol(parse_rewb("a").cls), greedy=False)


def test_char_class_features():
    ast = parse_rewb(r"[a-c\d]")
    assert ast.cls.contains(ord("b")) and ast.cls.contains(ord("7"))
    neg = parse_rewb(r"[^a]")
    assert not neg.cls.contains(ord("a")) and neg.cls.contains(ord("b"))
    assert parse_rewb(r"[\b]").cls.contains(0x08)


def test_hex_escapes():
    assert parse_rewb(r"\x28") == parse_rewb(r"\(")
    assert parse_rewb(r"\x{263A}").cls.contains(0x263A)
    assert parse_rewb(r"☺").cls.contains(0x263A)


def test_flags():
    assert parse_rewb("a", frozenset("i")).cls.contains(ord("A"))
    assert parse_rewb(".", frozenset("s")).cls.contains(ord("\n"))
    assert not parse_rewb(".").cls.contains(ord("\n"))


@pytest.mark.parametrize(
    "pat,kind",
    [
        ("a(b", "syntax-error"),
        ("*a", "syntax-error"),
        ("a{3,2}", "syntax-error"),
        ("^a", "unsupported-feature"),
        ("a$", "unsupported-feature"),
        ("(?=a)", "unsupported-feature"),
        ("(?<name>a)", "unsupported-feature"),
        ("(?>a)", "unsupported-feature"),
        (r"a\b", "unsupported-feature"),
        (r"\2(a)", "invalid-backref"),
    ],
)
def test_rejections(pat, kind):
    with pytest.raises(ParseError) as e:
        parse_rewb(pat)
    assert e.value.kind == kind


def test_unsupported_flag():
    with pytest.raises(ParseError):
        parse_rewb("a", frozenset("m"))


PATTERNS = st.sampled_from(
    [
        "a",
        "ab|cd",
        "(a*)b",
        r"(a|b)*\1",
        "[a-z]+",
        "a{1,3}b?",
        r"(a)(b)\2\1",
        "a*?b+?",
        r"[\d_]{2}",
        "(?:ab|c)*d",
    ]
)


@given(PATTERNS)
@settings(max_examples=40)
def test_printer_round_trip(pat):
    ast = parse_rewb(pat)
    assert parse_rewb(to_pattern(ast)) == ast


# ---------------------------------------------------------------- Snort glue

RULE = (
    'alert tcp any any -> any 80 (msg:"demo"; '
    'pcre:"/(a*)\\1b/i"; sid:77; rev:1;)'
)


def test_extract_pcre_basic():
    assert extract_pcre(RULE) == [(r"(a*)\1b", {"i"})]


def test_extract_pcre_escaped_quote_and_negation():
    rule = r'alert (pcre:!"/a\"b/"; sid:1;)'
    assert extract_pcre(rule) == [('a"b', set())]


def test_extract_pcre_multiple():
    rule = 'x (pcre:"/a/"; pcre:"/b/s";)'
    assert extract_pcre(rule) == [("a", set()), ("b", {"s"})]


def test_iter_rule_lines_continuation_and_comments():
    text = "# comment\nalert a \\\n  b\n\nalert c\n"
    assert list(iter_rule_lines(text)) == [(2, "alert a b"), (5, "alert c")]
