"""Online algorithm and adversary strategies on the extended reductions.

The algorithm reads a revealed vertex's row off the degree table. Fixed rows
carry their decision. An ∃-literal is resolved by degree and decided with the
TQBF game move. ∀-literals of one variable share a degree, so the first one
revealed is selected and the second rejected; which truth value that encoded
is read later from the dependency reveal star (``identify_forall``).

The adversary reveals variable gadgets in quantifier order. For each
∀-variable it simulates the algorithm on cloned sessions and keeps the
literal order that hurts the ∃-player most.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

from .degrees import DegreeRow, row_lookup
from .embedding import Observation, possible_images
from .formula import evaluate_tqbf, winning_value
from .gadgets import OnlineInstance
from .game import GameState, Outcome, RevelationSubgraph, View, play
from .graph import Kind, Strategy
from .offline import Problem, aux_name, lit_name


class UnresolvableObservation(RuntimeError):
    """A revealed degree matches no table row: the instance is corrupt."""


class UnknownStrategy(ValueError):
    pass


# classification ---------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    row: DegreeRow

    @property
    def fixed(self) -> Optional[bool]:
        if self.row.strategy is Strategy.DEPENDS:
            return None
        return self.row.strategy is Strategy.ACCEPT

    @property
    def is_literal(self) -> bool:
        return self.row.kind == "literal"

    @property
    def is_clause(self) -> bool:
        return self.row.kind == "clause"


def classify_by_degree(inst: OnlineInstance, revelation) -> Classification:
    degree = revelation if isinstance(revelation, int) else revelation.degree
    table = _table(inst)
    if degree not in table:
        raise UnresolvableObservation(f"degree {degree} matches no row of the degree table")
    return Classification(table[degree])


_TABLES: dict = {}


def _table(inst: OnlineInstance) -> dict[int, DegreeRow]:
    key = (inst.problem, inst.formula)
    if key not in _TABLES:
        _TABLES[key] = row_lookup(inst.problem, inst.formula)
    return _TABLES[key]


def _row_of(inst, view: View, sid: int) -> Optional[DegreeRow]:
    return _table(inst).get(view.degree(sid))


def literal_pair(inst, view: View, i: int) -> list[int]:
    """Revealed session vertices on x_i's literal rows, in reveal order."""
    out = []
    for s in view.order:
        row = _row_of(inst, view, s)
        if row is not None and row.kind == "literal" and row.variable == i:
            out.append(s)
    return out


# ∀ identification ------------------------------------------------------------------

def identify_forall(inst: OnlineInstance, view: View, i: int) -> Optional[int]:
    """Session id of the negative literal vertex of ∀-variable x_i, once it is determined."""
    q = inst.formula
    if not q.is_forall(i):
        raise ValueError(f"x{i} is existentially quantified")
    pair = literal_pair(inst, view, i)
    if len(pair) < 2:
        return None
    a, b = pair
    na, nb = view.neighbors(a), view.neighbors(b)
    p = inst.problem
    for s in view.order:
        row = _row_of(inst, view, s)
        if row is None or row.kind not in ("literal", "clause"):
            continue
        ns = view.neighbors(s)
        if row.kind == "clause" and row.variable == i:
            # a clause member touches v_ℓ (VC) or v_ℓ̄ (IS)
            touched = a if a in ns else b if b in ns else None
            if touched is None:
                continue
            touched_positive = row.positive if p is Problem.VC else not row.positive
            other = b if touched == a else a
            return other if touched_positive else touched
        if row.variable <= i:
            continue
        # the dr star of x_i is a common neighbor of s and the negative literal only
        ca = len((ns & na) - nb - {b})
        cb = len((ns & nb) - na - {a})
        if ca > cb:
            return a
        if cb > ca:
            return b
    return None


# algorithm -------------------------------------------------------------------------

class PaperAlgorithm:
    """Deterministic policy; every decision is a function of the view alone."""

    name = "paper"

    def __init__(self, inst: OnlineInstance, leak_aware: bool = False):
        self.inst = inst
        self.leak_aware = leak_aware

    def clone(self) -> "PaperAlgorithm":
        return self

    def __call__(self, view: View, rev: RevelationSubgraph) -> bool:
        cls = classify_by_degree(self.inst, rev)
        if cls.fixed is not None:
            return cls.fixed
        row = cls.row
        if row.kind == "literal":
            return self._literal(view, rev.vertex, row)
        return self._clause(view, rev.vertex, row)

    # literal vertices
    def _literal(self, view: View, s: int, row: DegreeRow) -> bool:
        i = row.variable
        q = self.inst.formula
        pair = literal_pair(self.inst, view, i)
        partner = [t for t in pair if t != s and view.decision(t) is not None]
        if partner:
            return not view.decision(partner[0])
        if q.is_forall(i):
            if self.leak_aware:
                polarity = self._leaked_polarity(view, s, i)
                if polarity is not None:
                    value = self._exists_value(view, i)
                    return polarity == value
            return True
        value = self._exists_value(view, i)
        return row.positive == value

    def _exists_value(self, view: View, i: int) -> bool:
        values = self.assignment(view, upto=i - 1)
        if values is None or len(values) != i - 1:
            return True
        return winning_value(self.inst.formula, values, i)

    def _leaked_polarity(self, view: View, s: int, i: int) -> Optional[bool]:
        obs = Observation.from_view(view)
        images = possible_images(obs, self.inst.graph, s, [lit_name(i), lit_name(-i)])
        if len(images) == 1:
            return images == {lit_name(i)}
        return None

    def assignment(self, view: View, upto: Optional[int] = None) -> Optional[dict[int, bool]]:
        """Truth values of x_1..x_upto as encoded by the decisions so far."""
        q = self.inst.formula
        upto = q.n if upto is None else upto
        values = {}
        for j in range(1, upto + 1):
            pair = literal_pair(self.inst, view, j)
            decided = [t for t in pair if view.decision(t) is not None]
            if not decided:
                return None
            if q.is_forall(j):
                neg = identify_forall(self.inst, view, j)
                if neg is None:
                    return None
                if view.decision(neg) is not None:
                    values[j] = not view.decision(neg)
                else:
                    values[j] = bool(view.decision(next(t for t in pair if t != neg)))
            else:
                t = decided[0]
                row = _row_of(self.inst, view, t)
                values[j] = view.decision(t) == row.positive
        return values

    # clause members (VC / IS)
    def _clause(self, view: View, s: int, row: DegreeRow) -> bool:
        p = self.inst.problem
        nbrs = view.neighbors(s)
        lit_vertex = None
        mates = []
        for t in nbrs:
            if not view.is_revealed(t):
                continue
            r = _row_of(self.inst, view, t)
            if r is None:
                continue
            if r.kind == "literal" and r.variable == row.variable:
                lit_vertex = t
            elif r.kind == "clause":
                mates.append(t)
        truth = None
        if lit_vertex is not None and view.decision(lit_vertex) is not None:
            selected = view.decision(lit_vertex)
            truth = selected if p is Problem.VC else not selected
        if p is Problem.VC:
            if truth and not any(view.decision(m) is False for m in mates):
                return False
            return True
        return bool(truth) and not any(view.decision(m) for m in mates)


def algorithm_paper_policy(inst: OnlineInstance) -> PaperAlgorithm:
    return PaperAlgorithm(inst)


def algorithm_leak_aware(inst: OnlineInstance) -> PaperAlgorithm:
    """The paper policy plus detection of ∀-literals identified too early."""
    return PaperAlgorithm(inst, leak_aware=True)


# adversaries ----------------------------------------------------------------------

def variable_gadget(inst: OnlineInstance, i: int) -> list[str]:
    vs = [lit_name(i), lit_name(-i)]
    if inst.problem is Problem.DS:
        vs.append(aux_name(i))
    return vs


def tail_order(inst: OnlineInstance) -> list:
    """Fixed order after the variable gadgets: clauses, fake clauses, dr stars, ID gadgets."""
    g = inst.graph
    clause_part = [v for v in inst.base.graph if inst.base.graph.role(v).kind is Kind.CLAUSE_MEMBER]
    rest = []
    for kind in ("fake-clause", "dr", "literal-id", "clause-id"):
        for gadget in inst.gadgets_of(kind):
            verts = gadget.vertex_names
            centers = [v for v in verts if g.role(v).kind in (Kind.FAKE_MEMBER, Kind.DR_CENTER,
                                                              Kind.ID_MIDDLE, Kind.ID_CENTER)]
            leaves = [v for v in verts if v not in set(centers)]
            rest.extend(centers + leaves)
    return clause_part + rest


def decoded_values(inst: OnlineInstance, state: GameState, upto: int) -> dict[int, bool]:
    """Assignment of x_1..x_upto as encoded in the current decisions (adversary side)."""
    values = {}
    for j in range(1, upto + 1):
        pos = state.decisions.get(lit_name(j))
        neg = state.decisions.get(lit_name(-j))
        if pos is not None:
            values[j] = pos
        elif neg is not None:
            values[j] = not neg
    return values


class PaperAdversary:
    name = "paper"

    def __init__(self, inst: OnlineInstance, algorithm: Callable, lead: tuple = ()):
        self.inst = inst
        self.algorithm = algorithm
        self.lead = list(lead)  # vertices revealed first (deviations)
        self._tail = tail_order(inst)
        self._cursor = 0
        self._choices: dict[int, bool] = {}

    def clone(self) -> "PaperAdversary":
        other = PaperAdversary(self.inst, self.algorithm, tuple(self.lead))
        other._choices = dict(self._choices)
        return other

    def _forall_first(self, state: GameState, i: int) -> str:
        """Simulate both literal orders and keep the worse one for the ∃-player."""
        if i in self._choices:
            return lit_name(i) if self._choices[i] else lit_name(-i)
        best = None
        for positive_first in (True, False):
            sim = state.clone()
            first, second = (lit_name(i), lit_name(-i)) if positive_first else (lit_name(-i), lit_name(i))
            for v in (first, second):
                if v in sim._seen_revealed:
                    continue
                rev = sim.reveal(v)
                sim.decide(self.algorithm(sim.view(), rev))
            values = decoded_values(self.inst, sim, i)
            value = evaluate_tqbf(self.inst.formula, values) if len(values) == i else True
            if best is None or (not value and best[0]):
                best = (value, positive_first)
        self._choices[i] = best[1]
        return lit_name(i) if best[1] else lit_name(-i)

    def __call__(self, state: GameState):
        seen = state._seen_revealed
        for v in self.lead:
            if v not in seen:
                return v
        q = self.inst.formula
        for i in range(1, q.n + 1):
            gadget = variable_gadget(self.inst, i)
            if all(v in seen for v in gadget):
                continue
            pos, neg = lit_name(i), lit_name(-i)
            if pos not in seen and neg not in seen:
                return self._forall_first(state, i) if q.is_forall(i) else pos
            for v in gadget:
                if v not in seen:
                    return v
        while self._cursor < len(self._tail) and self._tail[self._cursor] in seen:
            self._cursor += 1
        if self._cursor < len(self._tail):
            return self._tail[self._cursor]
        for v in state.graph:
            if v not in seen:
                return v
        raise RuntimeError("no vertex left to reveal")


def adversary_paper_policy(inst: OnlineInstance, algo: Callable) -> PaperAdversary:
    return PaperAdversary(inst, algo)


DEVIATIONS = ("none", "dr-first", "fake-first", "clause-first")


def adversary_deviant(inst: OnlineInstance, spec: str, algo: Callable) -> PaperAdversary:
    """Paper adversary that breaks one reveal-order constraint.

    ``dr-first[:i]`` reveals the dr center of ∀-variable x_i (default: the first)
    before anything else; ``fake-first`` a fake clause member; ``clause-first``
    the members of the first real clause.
    """
    name, _, arg = spec.partition(":")
    q = inst.formula
    if name == "none":
        return PaperAdversary(inst, algo)
    if name == "dr-first":
        foralls = [i for i in range(1, q.n + 1) if q.is_forall(i)]
        i = int(arg) if arg else (foralls[0] if foralls else None)
        if i is None or not q.is_forall(i):
            raise UnknownStrategy(f"dr-first needs a ∀-variable, got {arg or 'none'}")
        return PaperAdversary(inst, algo, (f"D{i}",))
    if name == "fake-first":
        fakes = inst.gadgets_of("fake-clause")
        if not fakes:
            raise UnknownStrategy("instance has no fake clause")
        gadget = fakes[int(arg) if arg else 0]
        member = next(v for v in gadget.vertex_names
                      if inst.graph.role(v).kind is Kind.FAKE_MEMBER)
        return PaperAdversary(inst, algo, (member,))
    if name == "clause-first":
        members = [v for v in inst.base.graph if inst.base.graph.role(v).kind is Kind.CLAUSE_MEMBER]
        if not members:
            raise UnknownStrategy("instance has no clause")
        if inst.problem is Problem.DS:
            members = members[:1]
        else:
            members = members[:3]
        return PaperAdversary(inst, algo, tuple(members))
    raise UnknownStrategy(f"unknown deviation {spec!r}")


class RandomPrecedenceAdversary:
    """Random order obeying the reveal-order constraints; ID vertices go anywhere."""

    name = "random"

    def __init__(self, inst: OnlineInstance, seed: int = 0):
        rng = random.Random(seed)
        q = inst.formula
        head = []
        for i in range(1, q.n + 1):
            pair = [lit_name(i), lit_name(-i)]
            rng.shuffle(pair)
            head.extend(pair)
            if inst.problem is Problem.DS:
                head.append(aux_name(i))
        ids = [v for g in inst.gadgets if g.kind in ("literal-id", "clause-id") for v in g.vertex_names]
        others = [v for v in inst.graph if v not in set(head) and v not in set(ids)]
        rng.shuffle(others)
        seq = head + others
        for v in ids:
            seq.insert(rng.randrange(len(seq) + 1), v)
        self.order = seq

    def __call__(self, state: GameState):
        return self.order[state.step]


def run_match(inst: OnlineInstance, algorithm=None, adversary=None, seed: int = 0,
              early_stop: bool = False) -> GameState:
    algorithm = algorithm or algorithm_paper_policy(inst)
    adversary = adversary or adversary_paper_policy(inst, algorithm)
    state = GameState(inst.graph, inst.problem, inst.k, seed=seed, early_stop=early_stop)
    return play(state, algorithm, adversary)


# reveal-order constraints -----------------------------------------------------------

@dataclass
class PrecedenceReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_precedence(inst: OnlineInstance, order: list) -> PrecedenceReport:
    """Check a reveal order against the four ordering constraints.

    (1) x_i's variable gadget entirely before any vertex of x_j's for i < j;
    (2) a real clause after the gadgets of all its variables;
    (3) the same for fake clauses;
    (4) the dr star of x_i after x_i's variable gadget.
    """
    pos = {v: t for t, v in enumerate(order)}
    q = inst.formula
    out = []
    INF = float("inf")

    def done(i):
        return max(pos.get(v, INF) for v in variable_gadget(inst, i))

    def first(vs):
        return min((pos.get(v, INF) for v in vs), default=INF)

    for i in range(1, q.n):
        nxt = first(variable_gadget(inst, i + 1))
        if nxt < done(i):
            out.append(f"(1) x{i + 1} gadget revealed before x{i} gadget completed")
    base = inst.base.graph
    for v in base:
        role = base.role(v)
        if role.kind is Kind.CLAUSE_MEMBER:
            for lit in role.clause:
                if pos.get(v, INF) < done(abs(lit)):
                    out.append(f"(2) clause vertex {v} before the gadget of x{abs(lit)}")
    for gadget in inst.gadgets_of("fake-clause"):
        t = first(gadget.vertex_names)
        for lit in gadget.target:
            if t < done(abs(lit)):
                out.append(f"(3) fake clause {gadget.name} before the gadget of x{abs(lit)}")
    for gadget in inst.gadgets_of("dr"):
        if first(gadget.vertex_names) < done(gadget.target):
            out.append(f"(4) dr star {gadget.name} before the gadget of x{gadget.target}")
    return PrecedenceReport(list(dict.fromkeys(out)))


ALGORITHMS = {"paper": algorithm_paper_policy, "leak-aware": algorithm_leak_aware}


def make_adversary(name: str, inst: OnlineInstance, algo, seed: int = 0):
    if name == "paper":
        return adversary_paper_policy(inst, algo)
    if name == "random":
        return RandomPrecedenceAdversary(inst, seed)
    if name.startswith("deviant"):
        _, _, spec = name.partition("=")
        return adversary_deviant(inst, spec or "none", algo)
    if name.split(":")[0] in DEVIATIONS:
        return adversary_deviant(inst, name, algo)
    raise UnknownStrategy(f"unknown adversary {name!r}")


def make_algorithm(name: str, inst: OnlineInstance):
    if name not in ALGORITHMS:
        raise UnknownStrategy(f"unknown algorithm {name!r}")
    return ALGORITHMS[name](inst)
