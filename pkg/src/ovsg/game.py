"""The neighborhood reveal game engine.

The adversary reveals vertices of the host graph one at a time; each reveal
discloses the vertex, its closed neighborhood and its incident edges. The
algorithm sees only session identifiers: small integers handed out when a
vertex is first seen, in an order shuffled per reveal so that they carry no
information about the host graph's own vertex names.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .graph import LabeledGraph
from .offline import Problem, feasible, meets_budget

__all__ = [
    "GameError", "Outcome", "RevelationSubgraph", "GameState", "View", "Transcript",
    "feasible", "early_loss", "outcome", "reveal", "decide", "replay",
]


class GameError(RuntimeError):
    pass


class Outcome(str, Enum):
    ALGORITHM = "algorithm-wins"
    ADVERSARY = "adversary-wins"


@dataclass(frozen=True)
class RevelationSubgraph:
    """What one reveal discloses, in session ids."""

    vertex: int
    neighbors: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    new: tuple[int, ...] = ()  # ids seen for the first time

    @property
    def degree(self) -> int:
        return len(self.neighbors)

    @property
    def closed(self) -> tuple[int, ...]:
        return (self.vertex,) + self.neighbors


class GameState:
    def __init__(self, graph: LabeledGraph, problem, k: int, seed: int = 0, early_stop: bool = False):
        self.graph = graph
        self.problem = Problem.parse(problem)
        self.k = k
        self.seed = seed
        self.early_stop = early_stop
        self._rng = random.Random(seed)
        self.revealed: list = []
        self._seen_revealed: set = set()
        self.exposed: set = set()
        self.revealed_edges: set[frozenset] = set()
        self.decisions: dict = {}
        self.pending = None
        self.sid: dict = {}
        self.by_sid: list = []
        self.log: list[dict] = []
        self.stopped: Optional[Outcome] = None

    # engine ----------------------------------------------------------------
    @property
    def step(self) -> int:
        return len(self.revealed)

    @property
    def finished(self) -> bool:
        if self.stopped is not None:
            return True
        return len(self.revealed) == len(self.graph) and self.pending is None

    def _name(self, v) -> int:
        return self.sid[v]

    def reveal(self, v) -> RevelationSubgraph:
        if self.finished:
            raise GameError("game is over")
        if self.pending is not None:
            raise GameError("previous reveal still awaits a decision")
        if v not in self.graph:
            raise GameError(f"unknown vertex {v!r}")
        if v in self._seen_revealed:
            raise GameError(f"vertex {v!r} already revealed")
        nbrs = list(self.graph.neighbors(v))
        fresh = [w for w in [v] + nbrs if w not in self.sid]
        self._rng.shuffle(fresh)
        for w in fresh:
            self.sid[w] = len(self.by_sid)
            self.by_sid.append(w)
        self.revealed.append(v)
        self._seen_revealed.add(v)
        self.exposed.discard(v)
        for w in nbrs:
            self.revealed_edges.add(frozenset((v, w)))
            if w not in self._seen_revealed:
                self.exposed.add(w)
        self.pending = v
        me = self.sid[v]
        ns = tuple(sorted(self.sid[w] for w in nbrs))
        return RevelationSubgraph(me, ns, tuple((min(me, x), max(me, x)) for x in ns),
                                  tuple(sorted(self.sid[w] for w in fresh)))

    def decide(self, choice: bool) -> "GameState":
        if self.pending is None:
            raise GameError("no reveal awaits a decision")
        v = self.pending
        if v in self.decisions:
            raise GameError("decision already made")
        self.decisions[v] = bool(choice)
        self.pending = None
        self.log.append({
            "step": len(self.revealed),
            "vertex": v,
            "sid": self.sid[v],
            "degree": len(self.graph.neighbors(v)),
            "decision": "in" if choice else "out",
        })
        if self.early_stop and early_loss(self):
            self.stopped = Outcome.ADVERSARY
        return self

    def solution(self) -> set:
        return {v for v, d in self.decisions.items() if d}

    def outcome(self) -> Outcome:
        if self.stopped is not None:
            return self.stopped
        if not self.finished:
            raise GameError("game not finished")
        sol = self.solution()
        ok = feasible(self.problem, self.graph, sol) and meets_budget(self.problem, len(sol), self.k)
        return Outcome.ALGORITHM if ok else Outcome.ADVERSARY

    def clone(self) -> "GameState":
        other = copy.copy(self)
        other._rng = random.Random()
        other._rng.setstate(self._rng.getstate())
        other.revealed = list(self.revealed)
        other._seen_revealed = set(self._seen_revealed)
        other.exposed = set(self.exposed)
        other.revealed_edges = set(self.revealed_edges)
        other.decisions = dict(self.decisions)
        other.sid = dict(self.sid)
        other.by_sid = list(self.by_sid)
        other.log = list(self.log)
        return other

    def view(self) -> "View":
        return View(self)

    def transcript(self) -> "Transcript":
        out = self.outcome() if self.finished else None
        return Transcript(self.problem, self.k, self.seed, list(self.log), out,
                          sorted(map(str, self.solution())))


class View:
    """The algorithm's window on a session: session ids only."""

    def __init__(self, state: GameState):
        self._s = state

    @property
    def order(self) -> list[int]:
        return [self._s.sid[v] for v in self._s.revealed]

    @property
    def pending(self) -> Optional[int]:
        return None if self._s.pending is None else self._s.sid[self._s.pending]

    def decision(self, sid: int) -> Optional[bool]:
        return self._s.decisions.get(self._s.by_sid[sid])

    def decisions(self) -> dict[int, bool]:
        return {self._s.sid[v]: d for v, d in self._s.decisions.items()}

    def is_revealed(self, sid: int) -> bool:
        return self._s.by_sid[sid] in self._s._seen_revealed

    def neighbors(self, sid: int) -> set[int]:
        """Known neighbors: all of them for a revealed vertex, revealed ones otherwise."""
        v = self._s.by_sid[sid]
        if self.is_revealed(sid):
            return {self._s.sid[w] for w in self._s.graph.neighbors(v)}
        return {self._s.sid[w] for w in self._s.graph.neighbors(v)
                if frozenset((v, w)) in self._s.revealed_edges}

    def degree(self, sid: int) -> int:
        if not self.is_revealed(sid):
            raise GameError("degree of an unrevealed vertex is unknown")
        return len(self._s.graph.neighbors(self._s.by_sid[sid]))

    @property
    def exposed(self) -> set[int]:
        return {self._s.sid[v] for v in self._s.exposed}

    @property
    def seen(self) -> int:
        return len(self._s.by_sid)

    @property
    def problem(self) -> Problem:
        return self._s.problem

    @property
    def k(self) -> int:
        return self._s.k


def reveal(s: GameState, v) -> RevelationSubgraph:
    return s.reveal(v)


def decide(s: GameState, choice: bool) -> GameState:
    return s.decide(choice)


def outcome(s: GameState) -> Outcome:
    return s.outcome()


def early_loss(s: GameState) -> bool:
    """True when every completion of the current decisions loses."""
    g = s.graph
    dec = s.decisions
    sol = [v for v, d in dec.items() if d]
    p = s.problem
    if p is Problem.VC:
        if len(sol) > s.k:
            return True
        return any(dec.get(u) is False and dec.get(w) is False for u, w in g.edges())
    if p is Problem.IS:
        if any(dec.get(u) and dec.get(w) for u, w in g.edges()):
            return True
        return len(sol) + (len(g) - len(dec)) < s.k
    if len(sol) > s.k:
        return True
    for v in g:
        if dec.get(v) is False and all(dec.get(w) is False for w in g.neighbors(v)):
            return True
    return False


@dataclass
class Transcript:
    problem: Problem
    k: int
    seed: int
    turns: list[dict]
    outcome: Optional[Outcome]
    solution: list[str] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "header", "problem": self.problem.value, "k": self.k, "seed": self.seed})]
        for t in self.turns:
            lines.append(json.dumps({"type": "turn", **{**t, "vertex": str(t["vertex"])}}))
        lines.append(json.dumps({
            "type": "footer",
            "outcome": self.outcome.value if self.outcome else None,
            "size": len(self.solution),
            "solution": self.solution,
        }))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        header, turns, footer = None, [], None
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.pop("type")
            if kind == "header":
                header = rec
            elif kind == "turn":
                turns.append(rec)
            elif kind == "footer":
                footer = rec
        if header is None:
            raise ValueError("transcript has no header")
        out = Outcome(footer["outcome"]) if footer and footer.get("outcome") else None
        solution = list(footer.get("solution", [])) if footer else []
        return cls(Problem.parse(header["problem"]), header["k"], header.get("seed", 0), turns, out, solution)


def replay(t: Transcript, graph: LabeledGraph) -> GameState:
    """Feed a transcript's reveals and decisions back through a fresh session."""
    names = {str(v): v for v in graph}
    s = GameState(graph, t.problem, t.k, seed=t.seed)
    for turn in t.turns:
        s.reveal(names[str(turn["vertex"])])
        s.decide(turn["decision"] == "in")
    return s


def play(state: GameState, algorithm, adversary) -> GameState:
    """Run a full match; ``adversary(state)`` names the next vertex and
    ``algorithm(view, revelation)`` returns the decision."""
    while not state.finished:
        v = adversary(state)
        rev = state.reveal(v)
        state.decide(algorithm(state.view(), rev))
    return state


def all_sequences_outcomes(graph: LabeledGraph, problem, k: int, order: Iterable, decisions: Iterable[bool]):
    """Play a fixed order and fixed decision list; small helper for tests."""
    s = GameState(graph, problem, k)
    for v, d in zip(order, decisions):
        s.reveal(v)
        s.decide(d)
    return s
