"""Quantified 3-CNF formulas: parsing, normalization and exact game evaluation.

Variables are numbered ``1..n`` in prefix order and literals are signed
integers (``-3`` is the negation of ``x3``), as in DIMACS.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

DEFAULT_VARIABLE_CAP = 24


class Quantifier(str, Enum):
    EXISTS = "e"
    FORALL = "a"

    @property
    def symbol(self) -> str:
        return "∃" if self is Quantifier.EXISTS else "∀"

    def flipped(self) -> "Quantifier":
        return Quantifier.FORALL if self is Quantifier.EXISTS else Quantifier.EXISTS


class FormulaError(ValueError):
    """Raised for malformed formulas."""


class QdimacsSyntaxError(FormulaError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ResourceLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Literal:
    variable_index: int
    positive: bool = True

    def __post_init__(self):
        if self.variable_index < 1:
            raise FormulaError(f"variable index must be positive, got {self.variable_index}")

    @classmethod
    def from_int(cls, value: int) -> "Literal":
        if value == 0:
            raise FormulaError("0 is not a literal")
        return cls(abs(value), value > 0)

    def __int__(self) -> int:
        return self.variable_index if self.positive else -self.variable_index

    def __neg__(self) -> "Literal":
        return Literal(self.variable_index, not self.positive)

    def __str__(self) -> str:
        return f"{'' if self.positive else '¬'}x{self.variable_index}"


@dataclass(frozen=True)
class Clause:
    """An ordered tuple of literals; normalized clauses hold exactly three distinct ones."""

    literals: tuple[int, ...]

    def __post_init__(self):
        if not self.literals:
            raise FormulaError("empty clause")
        if any(lit == 0 for lit in self.literals):
            raise FormulaError("0 is not a literal")

    def __iter__(self):
        return iter(self.literals)

    def __len__(self):
        return len(self.literals)

    @property
    def key(self) -> frozenset[int]:
        return frozenset(self.literals)

    def is_proper(self) -> bool:
        return len(self.literals) == 3 and len(set(self.literals)) == 3

    def __str__(self) -> str:
        return "(" + " ∨ ".join(str(Literal.from_int(l)) for l in self.literals) + ")"


@dataclass(frozen=True)
class QbfInstance:
    quantifiers: tuple[Quantifier, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        n = len(self.quantifiers)
        for clause in self.clauses:
            for lit in clause:
                if abs(lit) > n:
                    raise FormulaError(f"clause {clause} references x{abs(lit)} but n = {n}")

    @classmethod
    def build(cls, prefix: str | Sequence[Quantifier], clauses: Iterable[Iterable[int]]) -> "QbfInstance":
        """``QbfInstance.build("AE", [(1, -1, 2)])`` is ∀x1 ∃x2 (x1 ∨ ¬x1 ∨ x2)."""
        if isinstance(prefix, str):
            quants = tuple(Quantifier.FORALL if ch in "Aa∀" else Quantifier.EXISTS for ch in prefix)
        else:
            quants = tuple(prefix)
        return cls(quants, tuple(Clause(tuple(c)) for c in clauses))

    @property
    def n(self) -> int:
        return len(self.quantifiers)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def quantifier(self, i: int) -> Quantifier:
        return self.quantifiers[i - 1]

    def is_forall(self, i: int) -> bool:
        return self.quantifiers[i - 1] is Quantifier.FORALL

    def forall_before(self, i: int) -> int:
        """Number of ∀-variables with index < i."""
        return sum(1 for q in self.quantifiers[: i - 1] if q is Quantifier.FORALL)

    def forall_upto(self, i: int) -> int:
        """Number of ∀-variables with index <= i."""
        return sum(1 for q in self.quantifiers[:i] if q is Quantifier.FORALL)

    @property
    def prefix_string(self) -> str:
        return "".join("A" if q is Quantifier.FORALL else "E" for q in self.quantifiers)

    def is_normalized(self) -> bool:
        if self.n < 2:
            return False
        if any(a is b for a, b in zip(self.quantifiers, self.quantifiers[1:])):
            return False
        if not all(c.is_proper() for c in self.clauses):
            return False
        return len({c.key for c in self.clauses}) == len(self.clauses)

    def __str__(self) -> str:
        prefix = "".join(f"{q.symbol}x{i}" for i, q in enumerate(self.quantifiers, 1))
        return prefix + " " + " ∧ ".join(str(c) for c in self.clauses)

    def to_qdimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        for q, group in itertools.groupby(enumerate(self.quantifiers, 1), key=lambda t: t[1]):
            lines.append(f"{q.value} " + " ".join(str(i) for i, _ in group) + " 0")
        for clause in self.clauses:
            lines.append(" ".join(str(l) for l in clause) + " 0")
        return "\n".join(lines) + "\n"


def parse_qbf(text: str) -> QbfInstance:
    """Parse the QDIMACS subset: ``p cnf n m``, ``a``/``e`` prefix lines, clause lines.

    Variables are renumbered so that prefix order is index order; variables
    that never appear in the prefix are existential and outermost.
    """
    declared: tuple[int, int] | None = None
    prefix: list[tuple[Quantifier, int]] = []
    raw_clauses: list[list[int]] = []
    pending: list[int] = []
    pending_line = 0

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        tokens = stripped.split()
        head = tokens[0]
        if head == "p":
            if declared is not None or prefix or raw_clauses:
                raise QdimacsSyntaxError("misplaced header", lineno)
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise QdimacsSyntaxError("expected 'p cnf <n> <m>'", lineno)
            try:
                declared = (int(tokens[2]), int(tokens[3]))
            except ValueError:
                raise QdimacsSyntaxError("header counts must be integers", lineno, line.find(tokens[2]) + 1)
            continue
        if head in ("a", "e"):
            if raw_clauses or pending:
                raise QdimacsSyntaxError("quantifier line after clauses", lineno)
            quant = Quantifier(head)
            values = _int_tokens(tokens[1:], line, lineno)
            if not values or values[-1] != 0:
                raise QdimacsSyntaxError("quantifier line must end with 0", lineno, len(line))
            for v in values[:-1]:
                if v <= 0:
                    raise QdimacsSyntaxError(f"bad variable {v} in prefix", lineno)
                if any(v == w for _, w in prefix):
                    raise QdimacsSyntaxError(f"variable {v} quantified twice", lineno)
                prefix.append((quant, v))
            continue
        values = _int_tokens(tokens, line, lineno)
        for v in values:
            if v == 0:
                if not pending:
                    raise QdimacsSyntaxError("empty clause", lineno)
                raw_clauses.append(pending)
                pending = []
            else:
                if not pending:
                    pending_line = lineno
                pending.append(v)
    if pending:
        raise QdimacsSyntaxError("clause not terminated by 0", pending_line)

    used = {abs(l) for c in raw_clauses for l in c} | {v for _, v in prefix}
    if declared is not None:
        n_decl, m_decl = declared
        too_big = [v for v in used if v > n_decl]
        if too_big:
            raise FormulaError(f"variable {max(too_big)} out of range (n = {n_decl})")
        if m_decl != len(raw_clauses):
            raise FormulaError(f"header declares {m_decl} clauses, found {len(raw_clauses)}")
        universe = range(1, n_decl + 1)
    else:
        universe = range(1, max(used, default=0) + 1)

    quantified = {v for _, v in prefix}
    free = [v for v in universe if v not in quantified]
    order = [(Quantifier.EXISTS, v) for v in free] + prefix
    rename = {old: new for new, (_, old) in enumerate(order, 1)}
    quants = tuple(q for q, _ in order)
    clauses = tuple(
        Clause(tuple(rename[abs(l)] if l > 0 else -rename[abs(l)] for l in c)) for c in raw_clauses
    )
    return QbfInstance(quants, clauses)


def _int_tokens(tokens: Sequence[str], line: str, lineno: int) -> list[int]:
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise QdimacsSyntaxError(f"unexpected token {tok!r}", lineno, line.find(tok) + 1)
    return out


def normalize(q: QbfInstance) -> QbfInstance:
    """Return a game-equivalent instance with alternating prefix, n >= 2 and
    proper, pairwise distinct 3-literal clauses."""
    if q.is_normalized():
        return q
    quants: list[Quantifier] = list(q.quantifiers)
    # fresh variables get ids past the original ones and are placed innermost
    fresh_count = [0]

    def fresh() -> int:
        quants.append(Quantifier.EXISTS)
        fresh_count[0] += 1
        return len(quants)

    clauses: list[tuple[int, ...]] = []
    # repeated input clauses would otherwise each get their own padding variables
    originals: dict[frozenset[int], tuple[int, ...]] = {}
    for clause in q.clauses:
        originals.setdefault(clause.key, tuple(dict.fromkeys(clause.literals)))
    for lits in originals.values():
        for piece in _split_long(lits, fresh):
            clauses.extend(_pad_short(piece, fresh))

    seen: set[frozenset[int]] = set()
    unique = []
    for c in clauses:
        if frozenset(c) not in seen:
            seen.add(frozenset(c))
            unique.append(c)

    # alternate the prefix by inserting clause-free dummies between equal neighbours
    positions: list[int] = []
    new_quants: list[Quantifier] = []
    for old_index, quant in enumerate(quants, 1):
        if new_quants and new_quants[-1] is quant:
            new_quants.append(quant.flipped())
        new_quants.append(quant)
        positions.append(len(new_quants))
    if len(new_quants) < 2:
        new_quants.append(new_quants[-1].flipped() if new_quants else Quantifier.EXISTS)
    if len(new_quants) < 2:
        new_quants.append(new_quants[-1].flipped())

    remap = {old: new for old, new in enumerate(positions, 1)}
    renamed = [tuple(remap[abs(l)] if l > 0 else -remap[abs(l)] for l in c) for c in unique]
    return QbfInstance(tuple(new_quants), tuple(Clause(c) for c in renamed))


def _split_long(lits: tuple[int, ...], fresh) -> list[tuple[int, ...]]:
    pieces = []
    while len(lits) > 3:
        y = fresh()
        pieces.append(lits[:2] + (y,))
        lits = (-y,) + lits[2:]
    pieces.append(lits)
    return pieces


def _pad_short(lits: tuple[int, ...], fresh) -> list[tuple[int, ...]]:
    if len(lits) >= 3:
        return [lits]
    if len({abs(l) for l in lits}) < len(lits):
        # a tautological short clause (x ∨ ¬x) stays satisfiable after padding either way
        pass
    y = fresh()
    out = []
    for piece in (lits + (y,), lits + (-y,)):
        out.extend(_pad_short(piece, fresh))
    return out


def _literal_true(lit: int, values: Mapping[int, bool]) -> bool | None:
    v = values.get(abs(lit))
    if v is None:
        return None
    return v if lit > 0 else not v


def satisfies(q: QbfInstance, values: Mapping[int, bool]) -> bool:
    return all(any(_literal_true(l, values) for l in c) for c in q.clauses)


def evaluate_tqbf(
    q: QbfInstance,
    partial: Mapping[int, bool] | None = None,
    *,
    variable_cap: int = DEFAULT_VARIABLE_CAP,
) -> bool:
    """Value of the TQBF game: True iff the ∃-player wins.

    ``partial`` fixes a prefix x1..xj of the variables; play continues at x_{j+1}.
    """
    if q.n > variable_cap:
        raise ResourceLimitExceeded(f"{q.n} variables exceed the cap of {variable_cap}")
    partial = dict(partial or {})
    start = 1
    while start in partial:
        start += 1
    if any(v >= start for v in partial):
        raise ValueError("partial assignment must fix a prefix of the variables")

    # clauses reduced by the fixed prefix; a clause is a tuple of still-open literals
    open_clauses = []
    for clause in q.clauses:
        status = [_literal_true(l, partial) for l in clause]
        if any(status):
            continue
        rest = tuple(sorted(l for l, s in zip(clause, status) if s is None))
        if not rest:
            return False
        open_clauses.append(rest)
    return _game_value(q.quantifiers, start, frozenset(open_clauses), {})


def _game_value(quants, i, open_clauses: frozenset, memo) -> bool:
    if not open_clauses:
        return True
    if i > len(quants):
        return False
    key = (i, open_clauses)
    if key in memo:
        return memo[key]
    results = []
    for value in (True, False):
        lit = i if value else -i
        nxt = []
        dead = False
        for clause in open_clauses:
            if lit in clause:
                continue
            if -lit in clause:
                clause = tuple(l for l in clause if l != -lit)
                if not clause:
                    dead = True
                    break
            nxt.append(clause)
        outcome = False if dead else _game_value(quants, i + 1, frozenset(nxt), memo)
        results.append(outcome)
        if quants[i - 1] is Quantifier.EXISTS and outcome:
            break
        if quants[i - 1] is Quantifier.FORALL and not outcome:
            break
    value = any(results) if quants[i - 1] is Quantifier.EXISTS else all(results)
    memo[key] = value
    return value


def exists_move(q: QbfInstance, partial: Mapping[int, bool], i: int) -> bool:
    """A winning value for the ∃-variable x_i given x_1..x_{i-1}; ties prefer True."""
    if q.is_forall(i):
        raise ValueError(f"x{i} is universally quantified")
    return winning_value(q, partial, i)


def winning_value(q: QbfInstance, partial: Mapping[int, bool], i: int) -> bool:
    """Value of x_i that keeps the ∃-player winning, whatever x_i's quantifier.

    Used when a ∀-variable has degenerated into a free choice.
    """
    if set(partial) != set(range(1, i)):
        raise ValueError(f"partial assignment must fix exactly x1..x{i - 1}")
    for value in (True, False):
        if evaluate_tqbf(q, {**partial, i: value}):
            return value
    return True


def brute_force_tqbf(q: QbfInstance) -> bool:
    """Plain minimax over the full assignment tree; no memo, no pruning."""

    def rec(i: int, values: dict[int, bool]) -> bool:
        if i > q.n:
            return satisfies(q, values)
        branches = [rec(i + 1, {**values, i: v}) for v in (True, False)]
        return any(branches) if q.quantifiers[i - 1] is Quantifier.EXISTS else all(branches)

    return rec(1, {})
