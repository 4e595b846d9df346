"""Consistent embeddings of an observation into the map.

An observation fixes, for each revealed session vertex, its degree and its
full neighbor set; exposed vertices are known only through the revealed
vertices they touch. An embedding sends revealed vertices to map vertices so
that degrees and revealed adjacencies agree and the map's unrevealed
neighbors of the image carry exactly the observed exposure pattern.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .graph import LabeledGraph


@dataclass(frozen=True)
class Observation:
    order: tuple[int, ...]
    neighbors: Mapping[int, frozenset]  # revealed sid -> all neighbor sids
    decisions: Mapping[int, bool]
    exposed: frozenset

    @classmethod
    def from_view(cls, view) -> "Observation":
        order = tuple(view.order)
        nbrs = {s: frozenset(view.neighbors(s)) for s in order}
        return cls(order, nbrs, dict(view.decisions()), frozenset(view.exposed))

    def exposure_signatures(self) -> Counter:
        sig: dict[int, set] = {x: set() for x in self.exposed}
        for r in self.order:
            for x in self.neighbors[r]:
                if x in sig:
                    sig[x].add(r)
        return Counter(frozenset(s) for s in sig.values())


def embeddings(obs: Observation, g: LabeledGraph, pins: Optional[Mapping[int, object]] = None,
               limit: Optional[int] = None) -> Iterator[dict]:
    """Yield maps revealed sid -> map vertex consistent with ``obs``."""
    pins = dict(pins or {})
    revealed = list(obs.order)
    rset = set(revealed)
    by_degree: dict[int, list] = {}
    for v in g:
        by_degree.setdefault(len(g.neighbors(v)), []).append(v)
    target_sigs = obs.exposure_signatures()
    rev_nbrs = {r: obs.neighbors[r] & rset for r in revealed}

    # order: pinned first, then greedily by connectivity to already placed vertices
    placed_order: list[int] = []
    remaining = set(revealed)
    while remaining:
        def score(r):
            return (r in pins, len(rev_nbrs[r] & set(placed_order)), -revealed.index(r))
        r = max(remaining, key=score)
        placed_order.append(r)
        remaining.discard(r)

    phi: dict[int, object] = {}
    used: set = set()
    count = [0]

    def candidates(r):
        if r in pins:
            return [pins[r]]
        deg = len(obs.neighbors[r])
        anchors = [s for s in rev_nbrs[r] if s in phi]
        if anchors:
            return [v for v in g.neighbors(phi[anchors[0]]) if len(g.neighbors(v)) == deg]
        return by_degree.get(deg, [])

    def consistent(r, v) -> bool:
        if v in used or len(g.neighbors(v)) != len(obs.neighbors[r]):
            return False
        nv = g.neighbors(v)
        for s, w in phi.items():
            if (s in rev_nbrs[r]) != (w in nv):
                return False
        return True

    def final_ok() -> bool:
        inv = {w: s for s, w in phi.items()}
        sigs: dict = {}
        for s, w in phi.items():
            for u in g.neighbors(w):
                if u in inv:
                    continue
                sigs.setdefault(u, set()).add(s)
        return Counter(frozenset(x) for x in sigs.values()) == target_sigs

    def rec(i):
        if limit is not None and count[0] >= limit:
            return
        if i == len(placed_order):
            if final_ok():
                count[0] += 1
                yield dict(phi)
            return
        r = placed_order[i]
        for v in candidates(r):
            if consistent(r, v):
                phi[r] = v
                used.add(v)
                yield from rec(i + 1)
                del phi[r]
                used.discard(v)

    yield from rec(0)


def possible_images(obs: Observation, g: LabeledGraph, sid: int, options) -> set:
    """Which of ``options`` the session vertex ``sid`` can be mapped to."""
    out = set()
    for v in options:
        if next(embeddings(obs, g, pins={sid: v}, limit=1), None) is not None:
            out.add(v)
    return out


def is_consistent(obs: Observation, g: LabeledGraph, phi: Mapping[int, object]) -> bool:
    return next(embeddings(obs, g, pins=phi, limit=1), None) is not None
