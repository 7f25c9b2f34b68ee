"""Static and dynamic detection of backreference-induced regex blowup."""

from .syntax import ParseError, parse_rewb, to_pattern
from .automaton import Mfa, UnsupportedPattern, compile_ast, compile_pattern
from .matcher import CompiledMfa, MatchOutcome, bt_run

__all__ = [
    "ParseError",
    "parse_rewb",
    "to_pattern",
    "Mfa",
    "UnsupportedPattern",
    "compile_ast",
    "compile_pattern",
    "CompiledMfa",
    "MatchOutcome",
    "bt_run",
]

__version__ = "0.1.0"
