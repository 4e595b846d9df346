"""Small formula families used by the verification suites and the tests."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Optional

from .formula import QbfInstance
from .gadgets import all_clause_keys

# ∀x1 ∃x2 (x1 ∨ ¬x1 ∨ x2)
RUNNING = QbfInstance.build("AE", [(1, -1, 2)])
# ∀x1 ∃x2 (x1 ∨ ¬x1 ∨ ¬x2) ∧ (x1 ∨ x2 ∨ ¬x2), the dominating set illustration
DS_FIGURE = QbfInstance.build("AE", [(1, -1, -2), (1, 2, -2)])
# ∀x1 ∃x2 ∀x3 (x1 ∨ x2 ∨ x3) ∧ (x1 ∨ ¬x2 ∨ x3): false, x1 = x3 = false leaves x2 stuck
FALSE_WITNESS = QbfInstance.build("AEA", [(1, 2, 3), (1, -2, 3)])


def alternating_prefixes(n: int) -> list[str]:
    a = "".join("AE"[i % 2] for i in range(n))
    e = "".join("EA"[i % 2] for i in range(n))
    return [a, e]


def normalized_formulas(n: int, max_m: int, prefixes: Optional[list[str]] = None) -> Iterator[QbfInstance]:
    """Every normalized formula over n variables with at most max_m clauses."""
    if n < 2:
        return
    keys = all_clause_keys(n)
    for prefix in prefixes or alternating_prefixes(n):
        for m in range(max_m + 1):
            for clauses in itertools.combinations(keys, m):
                yield QbfInstance.build(prefix, clauses)


def sample_formulas(ns=(2, 3), max_m: int = 2, count: int = 100, seed: int = 0) -> list[QbfInstance]:
    """All small formulas when there are at most ``count`` of them, else a seeded sample."""
    pool = [q for n in ns for q in normalized_formulas(n, max_m)]
    if len(pool) <= count:
        return pool
    return random.Random(seed).sample(pool, count)
