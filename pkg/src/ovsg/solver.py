"""Exact value of the online vertex subset game on small graphs.

The algorithm wins iff some decision function on observations wins against
every reveal order. Observations form a tree (the algorithm remembers its
history), so the value is an AND-OR recursion over observation classes: the
algorithm picks a decision for the class, then every concrete history in the
class and every next reveal must lead to a winning class.

An observation is keyed exactly by what the algorithm sees: for each reveal
position, the decision and which earlier positions it is adjacent to, plus
the multiset of exposure patterns of the not yet revealed neighbors.
"""

from __future__ import annotations

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

from .formula import QbfInstance, evaluate_tqbf
from .game import GameState, Outcome, early_loss
from .graph import LabeledGraph, automorphisms, canonical_code
from .offline import Problem, feasible, meets_budget

DEFAULT_VERTEX_CAP = 12
BRUTE_FORCE_CAP = 7
DEFAULT_MEMO_CAP = 2_000_000


class SolverCapError(RuntimeError):
    pass


@dataclass
class GameValue:
    winner: Outcome
    k: int
    problem: Problem
    policy: dict = field(default_factory=dict)  # observation key -> decision (algorithm wins)
    refutation: dict = field(default_factory=dict)  # key -> {decision: child key} (adversary wins)
    root: Optional[object] = None  # first-reveal key chosen by a refutation
    stats: dict = field(default_factory=dict)

    @property
    def algorithm_wins(self) -> bool:
        return self.winner is Outcome.ALGORITHM


class _Arena:
    """Index-based view of a small graph plus the observation keys."""

    def __init__(self, g: LabeledGraph, p: Problem, k: int):
        self.g = g
        self.p = p
        self.k = k
        self.verts = list(g)
        self.n = len(self.verts)
        self.adj = g.adjacency_masks()
        self.deg = [bin(m).count("1") for m in self.adj]

    def key(self, h: tuple, dec: tuple) -> tuple:
        pos = {v: t for t, v in enumerate(h)}
        back = []
        for t, v in enumerate(h):
            m = 0
            for s in range(t):
                if self.adj[v] >> h[s] & 1:
                    m |= 1 << s
            back.append(m)
        sigs = []
        for u in range(self.n):
            if u in pos:
                continue
            m = 0
            for t, v in enumerate(h):
                if self.adj[u] >> v & 1:
                    m |= 1 << t
            if m:
                sigs.append(m)
        sigs.sort()
        return (tuple(back), dec, tuple(sigs))

    def status(self, h: tuple, dec: tuple) -> Optional[bool]:
        """True/False when the outcome is already forced (win reachable by a fixed
        completion / every completion loses), None otherwise."""
        t = len(dec)
        sol = sum(dec)
        rest = self.n - t
        decided = {h[s]: dec[s] for s in range(t)}
        p = self.p
        if p is Problem.VC:
            if sol > self.k:
                return False
            for s in range(t):
                if not dec[s]:
                    for s2 in range(s):
                        if not dec[s2] and self.adj[h[s]] >> h[s2] & 1:
                            return False
            if sol + rest <= self.k:
                return True
            return None
        if p is Problem.IS:
            for s in range(t):
                if dec[s]:
                    for s2 in range(s):
                        if dec[s2] and self.adj[h[s]] >> h[s2] & 1:
                            return False
            if sol + rest < self.k:
                return False
            if sol >= self.k:
                return True
            return None
        if sol > self.k:
            return False
        for s in range(t):
            v = h[s]
            if dec[s]:
                continue
            if all(decided.get(w) is False for w in _bits(self.adj[v])):
                return False
        if sol + rest <= self.k:
            return True
        return None


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def completion(p: Problem) -> bool:
    """Decision used for every remaining vertex once a win is locked in."""
    return p is not Problem.IS


def solve_game_exact(g: LabeledGraph, p, k: int, cap: int = DEFAULT_VERTEX_CAP,
                     memo_cap: int = DEFAULT_MEMO_CAP, aut_cap: int = 2000) -> GameValue:
    p = Problem.parse(p)
    if len(g) > cap:
        raise SolverCapError(f"{len(g)} vertices exceed the solver cap of {cap}")
    A = _Arena(g, p, k)
    auts = automorphisms(g, cap=aut_cap) if A.n else [()]

    def canon(h: tuple) -> tuple:
        if not auts:
            return h
        return min(tuple(sigma[v] for v in h) for sigma in auts)

    memo: OrderedDict = OrderedDict()
    policy: dict = {}
    refutation: dict = {}
    stats = {"nodes": 0}

    def children(S, dec):
        groups: dict = {}
        for h in S:
            used = set(h)
            for v in range(A.n):
                if v in used:
                    continue
                h2 = h + (v,)
                groups.setdefault(A.key(h2, dec), set()).add(canon(h2))
        # small classes first: they tend to be decided quickly
        return sorted(groups.items(), key=lambda kv: (len(kv[1]), kv[0]))

    def win(key, S) -> bool:
        if key in memo:
            memo.move_to_end(key)
            return memo[key]
        stats["nodes"] += 1
        h0 = next(iter(S))
        dec = key[1]
        result = False
        options = (True, False) if p is not Problem.IS else (True, False)
        refute = {}
        for d in options:
            dec2 = dec + (d,)
            st = A.status(h0, dec2)
            if st is None and len(dec2) == A.n:
                st = feasible(p, g, {A.verts[h0[s]] for s in range(A.n) if dec2[s]}) and \
                    meets_budget(p, sum(dec2), k)
            if st is True:
                result = True
                policy[key] = d
                break
            if st is False:
                refute[d] = None
                continue
            ok = True
            for ckey, cS in children(S, dec2):
                if not win(ckey, cS):
                    ok = False
                    refute[d] = ckey
                    break
            if ok:
                result = True
                policy[key] = d
                break
        if not result:
            refutation[key] = refute
        memo[key] = result
        if len(memo) > memo_cap:
            memo.popitem(last=False)
        return result

    value = True
    root = None
    if A.n:
        first = {}
        for v in range(A.n):
            first.setdefault(A.key((v,), ()), set()).add(canon((v,)))
        for ckey, cS in sorted(first.items(), key=lambda kv: (len(kv[1]), kv[0])):
            if not win(ckey, cS):
                value = False
                root = ckey
                break
    else:
        value = meets_budget(p, 0, k)
    winner = Outcome.ALGORITHM if value else Outcome.ADVERSARY
    stats["memo"] = len(memo)
    if value:
        return GameValue(winner, k, p, policy=policy, stats=stats)
    return GameValue(winner, k, p, refutation=refutation, root=root, stats=stats)


# certificate checks ------------------------------------------------------------

def verify_certificate(g: LabeledGraph, p, k: int, value: GameValue) -> bool:
    """Replay a certificate through the game engine."""
    p = Problem.parse(p)
    A = _Arena(g, p, k)
    if value.algorithm_wins:
        return _verify_policy(A, value.policy)
    return _verify_refutation(A, value)


def _policy_decision(A: _Arena, policy: dict, h: tuple, dec: tuple) -> bool:
    for s in range(1, len(dec) + 1):
        if A.status(h[:s], dec[:s]) is True:
            return completion(A.p)
    return policy[A.key(h, dec)]


def _verify_policy(A: _Arena, policy: dict) -> bool:
    """Every reveal order against the policy must end in a win (orbit-pruned DFS)."""
    auts = automorphisms(A.g) or [tuple(range(A.n))]
    checked: set = set()

    def canon(h):
        return min(tuple(sigma[v] for v in h) for sigma in auts)

    def rec(state: GameState, h: tuple, dec: tuple) -> bool:
        if len(h) == A.n:
            return state.outcome() is Outcome.ALGORITHM
        for v in range(A.n):
            if v in h:
                continue
            h2 = h + (v,)
            c = (canon(h2), dec)
            if c in checked:
                continue
            try:
                d = _policy_decision(A, policy, h2, dec)
            except KeyError:
                return False
            s2 = state.clone()
            s2.reveal(A.verts[v])
            s2.decide(d)
            if not rec(s2, h2, dec + (d,)):
                return False
            checked.add(c)
        return True

    return rec(GameState(A.g, A.p, A.k), (), ())


def _verify_refutation(A: _Arena, value: GameValue) -> bool:
    """Follow every decision path of the refutation to a concrete losing order."""
    if A.n == 0:
        return not meets_budget(A.p, 0, A.k)
    start = [(v,) for v in range(A.n) if A.key((v,), ()) == value.root]
    if not start:
        return False

    def rec(S: list, key) -> bool:
        refute = value.refutation.get(key)
        if refute is None:
            return False
        for d in (True, False):
            if d not in refute:
                return False
            dec2 = key[1] + (d,)
            child = refute[d]
            if child is None:
                # loss is forced right after this decision
                h = S[0]
                state = GameState(A.g, A.p, A.k)
                for s, v in enumerate(h):
                    state.reveal(A.verts[v])
                    state.decide(dec2[s])
                if len(h) == A.n:
                    if state.outcome() is not Outcome.ADVERSARY:
                        return False
                elif not early_loss(state):
                    return False
                continue
            S2 = [h + (v,) for h in S for v in range(A.n) if v not in h and A.key(h + (v,), dec2) == child]
            if not S2 or not rec(S2, child):
                return False
        return True

    return rec(start, value.root)


# brute-force oracle -----------------------------------------------------------------

def _observation_code(g: LabeledGraph, verts: list, order: tuple, dec: tuple) -> bytes:
    obs = LabeledGraph()
    labels = {}
    seen = set(order)
    for t, v in enumerate(order):
        obs.add_vertex(v)
        labels[v] = (t, dec[t] if t < len(dec) else None)
    for v in order:
        for w in g.neighbors(v):
            if w not in obs:
                obs.add_vertex(w)
                labels[w] = "exposed"
            if not obs.has_edge(v, w):
                obs.add_edge(v, w)
    return canonical_code(obs, visible=labels)


def enumerate_policies_bruteforce(g: LabeledGraph, p, k: int, cap: int = BRUTE_FORCE_CAP,
                                  node_cap: int = 5_000_000) -> GameValue:
    """Search the space of decision functions directly.

    Every concrete reveal order is played out. Decisions are assigned lazily to
    observation classes (canonical codes of the observed labeled graph); a
    losing order triggers conflict-directed backjumping to the latest class
    whose decision that order depended on.
    """
    p = Problem.parse(p)
    if len(g) > cap:
        raise SolverCapError(f"{len(g)} vertices exceed the brute-force cap of {cap}")
    verts = list(g)
    n = len(verts)
    if n == 0:
        ok = meets_budget(p, 0, k)
        return GameValue(Outcome.ALGORITHM if ok else Outcome.ADVERSARY, k, p)
    codes: dict = {}

    def code(order, dec):
        key = (order, dec)
        if key not in codes:
            codes[key] = _observation_code(g, verts, order, dec)
        return codes[key]

    def lost(order, dec) -> bool:
        state = GameState(g, p, k)
        for v, d in zip(order, dec):
            state.reveal(v)
            state.decide(d)
        if len(order) == n:
            return state.outcome() is Outcome.ADVERSARY
        return early_loss(state)

    policy: dict = {}
    assigned_at: dict = {}  # key -> trail index
    trail: list = []  # entries: [key, frontier snapshot, option index, conflict set]
    # frontier entries: (order, decisions, keys used along the path)
    frontier = [((v,), (), frozenset()) for v in reversed(verts)]
    steps = 0

    while True:
        conflict = None
        while frontier:
            steps += 1
            if steps > node_cap:
                raise SolverCapError("brute-force search exceeded its node cap")
            order, dec, path = frontier.pop()
            key = code(order, dec)
            if key not in policy:
                trail.append([key, frontier + [(order, dec, path)], 0, set()])
                policy[key] = True
                assigned_at[key] = len(trail) - 1
            d = policy[key]
            dec2 = dec + (d,)
            path2 = path | {key}
            if lost(order, dec2):
                conflict = {assigned_at[x] for x in path2}
                break
            if len(order) < n:
                for v in reversed(verts):
                    if v not in order:
                        frontier.append((order + (v,), dec2, path2))
        if conflict is None:
            return GameValue(Outcome.ALGORITHM, k, p, policy=dict(policy), stats={"steps": steps})
        # backjump
        while True:
            if not conflict:
                return GameValue(Outcome.ADVERSARY, k, p, stats={"steps": steps})
            target = max(conflict)
            while len(trail) - 1 > target:
                dead = trail.pop()
                del policy[dead[0]]
                del assigned_at[dead[0]]
            entry = trail[-1]
            entry[3] |= conflict - {target}
            if entry[2] == 0:
                entry[2] = 1
                policy[entry[0]] = False
                frontier = list(entry[1])
                break
            conflict = set(entry[3])
            trail.pop()
            del policy[entry[0]]
            del assigned_at[entry[0]]


# k sweeps and reductions ------------------------------------------------------------------

def minimal_winning_k(g: LabeledGraph, p, solver=solve_game_exact) -> int:
    """Best budget the algorithm can guarantee (smallest for VC/DS, largest for IS)."""
    p = Problem.parse(p)
    n = len(g)
    if p.minimize:
        lo, hi = 0, n  # k = n always wins
        while lo < hi:
            mid = (lo + hi) // 2
            if solver(g, p, mid).algorithm_wins:
                hi = mid
            else:
                lo = mid + 1
        return lo
    lo, hi = 0, n  # k = 0 always wins
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if solver(g, p, mid).algorithm_wins:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass
class Verdict:
    tier: str
    consistent: bool
    tqbf: bool
    game: bool
    detail: str = ""


def value_of_reduction(q: QbfInstance, p, graph: Optional[LabeledGraph] = None,
                       k: Optional[int] = None, seed: int = 0) -> Verdict:
    """Compare the TQBF value with the game value on the reduction.

    A small explicit ``graph`` (with ``k``) is solved exactly; otherwise the
    full extended reduction is built and the paper strategies are played.
    """
    from .gadgets import build_online_instance
    from .strategies import run_match

    p = Problem.parse(p)
    truth = evaluate_tqbf(q)
    if graph is not None and len(graph) <= DEFAULT_VERTEX_CAP:
        val = solve_game_exact(graph, p, k)
        return Verdict("exact", val.algorithm_wins == truth, truth, val.algorithm_wins)
    inst = build_online_instance(q, p)
    state = run_match(inst, seed=seed)
    won = state.outcome() is Outcome.ALGORITHM
    return Verdict("strategy-play", won == truth, truth, won,
                   f"|V|={len(inst.graph)} k={inst.k} |sol|={len(state.solution())}")
