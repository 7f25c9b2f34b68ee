"""Shared generators for differential and property tests."""

from __future__ import annotations

import random

from redosbr.charclass import CharClass
from redosbr.syntax import Alt, Backref, Capture, Concat, Empty, Star, Symbol


def random_ast(rng: random.Random, depth: int = 3, state: dict | None = None):
    """Random pattern AST over {a, b}; backrefs only to already-closed groups."""
    if state is None:
        state = {"next_group": 1, "closed": []}
    literals = [Symbol(CharClass.single(ord("a"))), Symbol(CharClass.single(ord("b")))]
    if depth <= 0:
        choices = ["sym", "sym", "empty"]
        if state["closed"]:
            choices.append("backref")
        pick = rng.choice(choices)
        if pick == "sym":
            return rng.choice(literals)
        if pick == "backref":
            return Backref(rng.choice(state["closed"]))
        return Empty()
    pick = rng.random()
    if pick < 0.25:
        parts = tuple(random_ast(rng, depth - 1, state) for _ in range(rng.randint(2, 3)))
        return Concat(parts)
    if pick < 0.45:
        parts = tuple(random_ast(rng, depth - 1, state) for _ in range(2))
        return Alt(parts)
    if pick < 0.6:
        child = random_ast(rng, depth - 1, state)
        return Star(child, greedy=True)
    if pick < 0.8 and state["next_group"] <= 9:
        g = state["next_group"]
        state["next_group"] += 1
        child = random_ast(rng, depth - 1, state)
        state["closed"].append(g)
        return Capture(g, child)
    return rng.choice(literals)


def random_text(rng: random.Random, max_len: int = 6) -> str:
    return "".join(rng.choice("ab") for _ in range(rng.randint(0, max_len)))
