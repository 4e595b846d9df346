"""Role-labeled undirected graphs, canonical codes and isomorphism tests."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

CANON_LIMIT = 64
ISO_LIMIT = 4096


class GraphSizeError(RuntimeError):
    pass


class Kind(str, Enum):
    LITERAL = "literal"
    VARIABLE_AUX = "variable-aux"
    CLAUSE_MEMBER = "clause-member"
    FAKE_MEMBER = "fake-clause-member"
    FAKE_LEAF = "fake-clause-leaf"
    DR_CENTER = "dr-center"
    DR_LEAF = "dr-leaf"
    ID_MIDDLE = "id-middle"
    ID_LEAF = "id-leaf"
    ID_CENTER = "id-center"
    DUMMY = "dummy"


class Strategy(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    DEPENDS = "formula-dependent"


@dataclass(frozen=True)
class VertexRole:
    """What a vertex stands for in a reduction.

    ``variable``/``positive`` name the owning literal (literal vertices, clause
    members, ID vertices of a literal), ``clause`` the owning clause as a
    sorted literal tuple, ``target`` the host vertex an ID gadget identifies.
    """

    kind: Kind = Kind.DUMMY
    variable: Optional[int] = None
    positive: Optional[bool] = None
    clause: Optional[tuple[int, ...]] = None
    target: Optional[str] = None
    strategy: Strategy = Strategy.REJECT

    @property
    def literal(self) -> Optional[int]:
        if self.variable is None or self.positive is None:
            return None
        return self.variable if self.positive else -self.variable

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "strategy": self.strategy.value}
        if self.variable is not None:
            out["variable"] = self.variable
        if self.positive is not None:
            out["positive"] = self.positive
        if self.clause is not None:
            out["clause"] = list(self.clause)
        if self.target is not None:
            out["target"] = self.target
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "VertexRole":
        return cls(
            kind=Kind(data.get("kind", "dummy")),
            variable=data.get("variable"),
            positive=data.get("positive"),
            clause=tuple(data["clause"]) if data.get("clause") is not None else None,
            target=data.get("target"),
            strategy=Strategy(data.get("strategy", "reject")),
        )


PLAIN = VertexRole()


class LabeledGraph:
    """Simple undirected graph with a role per vertex.

    Vertex order is insertion order; it fixes the integer index used by the
    game engine and solvers. Connecting edges of extension gadgets can be
    tagged so the DOT export can dash them.
    """

    def __init__(self, vertices: Iterable[Hashable] = (), edges: Iterable[tuple] = ()):
        self._roles: dict = {}
        self._adj: dict = {}
        self.connecting: set[frozenset] = set()
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    # construction -------------------------------------------------------
    def add_vertex(self, v, role: VertexRole = PLAIN) -> None:
        if v in self._roles:
            raise ValueError(f"vertex {v!r} already present")
        self._roles[v] = role
        self._adj[v] = set()

    def add_edge(self, u, v, connecting: bool = False) -> None:
        if u == v:
            raise ValueError(f"self-loop at {u!r}")
        if u not in self._adj or v not in self._adj:
            missing = u if u not in self._adj else v
            raise KeyError(f"edge endpoint {missing!r} not in graph")
        if v in self._adj[u]:
            raise ValueError(f"parallel edge {u!r}-{v!r}")
        self._adj[u].add(v)
        self._adj[v].add(u)
        if connecting:
            self.connecting.add(frozenset((u, v)))

    def remove_edge(self, u, v) -> None:
        self._adj[u].remove(v)
        self._adj[v].remove(u)
        self.connecting.discard(frozenset((u, v)))

    def remove_vertices(self, vs: Iterable) -> None:
        for v in list(vs):
            for w in self._adj.pop(v):
                self._adj[w].discard(v)
                self.connecting.discard(frozenset((v, w)))
            del self._roles[v]

    def set_role(self, v, role: VertexRole) -> None:
        if v not in self._roles:
            raise KeyError(v)
        self._roles[v] = role

    def copy(self) -> "LabeledGraph":
        g = LabeledGraph()
        g._roles = dict(self._roles)
        g._adj = {v: set(ns) for v, ns in self._adj.items()}
        g.connecting = set(self.connecting)
        return g

    def subgraph(self, vs: Iterable) -> "LabeledGraph":
        keep = [v for v in self._roles if v in set(vs)]
        kept = set(keep)
        g = LabeledGraph()
        for v in keep:
            g.add_vertex(v, self._roles[v])
        for u, v in self.edges():
            if u in kept and v in kept:
                g.add_edge(u, v, frozenset((u, v)) in self.connecting)
        return g

    # queries ------------------------------------------------------------
    def __contains__(self, v) -> bool:
        return v in self._roles

    def __len__(self) -> int:
        return len(self._roles)

    def __iter__(self) -> Iterator:
        return iter(self._roles)

    @property
    def vertices(self) -> list:
        return list(self._roles)

    def role(self, v) -> VertexRole:
        return self._roles[v]

    def roles(self) -> dict:
        return dict(self._roles)

    def neighbors(self, v) -> set:
        return self._adj[v]

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, ())

    def edges(self) -> list[tuple]:
        index = {v: i for i, v in enumerate(self._roles)}
        out = []
        for u in self._roles:
            for v in self._adj[u]:
                if index[u] < index[v]:
                    out.append((u, v))
        out.sort(key=lambda e: (index[e[0]], index[e[1]]))
        return out

    @property
    def n_edges(self) -> int:
        return sum(len(ns) for ns in self._adj.values()) // 2

    def index(self) -> dict:
        return {v: i for i, v in enumerate(self._roles)}

    def adjacency_masks(self) -> list[int]:
        """Bitmask adjacency over the insertion-order index."""
        idx = self.index()
        masks = []
        for v in self._roles:
            m = 0
            for w in self._adj[v]:
                m |= 1 << idx[w]
            masks.append(m)
        return masks

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for v, role in self._roles.items():
            g.add_node(v, role=role)
        g.add_edges_from(self.edges())
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self._roles == other._roles and self._adj == other._adj

    def __repr__(self) -> str:
        return f"LabeledGraph(|V|={len(self)}, |E|={self.n_edges})"


def degree(g: LabeledGraph, v) -> int:
    if v not in g:
        raise KeyError(f"unknown vertex {v!r}")
    return len(g.neighbors(v))


# small named graphs used across tests and the CLI
def path_graph(k: int) -> LabeledGraph:
    return LabeledGraph(range(k), [(i, i + 1) for i in range(k - 1)])


def cycle_graph(k: int) -> LabeledGraph:
    return LabeledGraph(range(k), [(i, (i + 1) % k) for i in range(k)])


def complete_graph(k: int) -> LabeledGraph:
    return LabeledGraph(range(k), [(i, j) for i in range(k) for j in range(i + 1, k)])


def star_graph(leaves: int) -> LabeledGraph:
    return LabeledGraph(range(leaves + 1), [(0, i) for i in range(1, leaves + 1)])


def from_networkx(h: nx.Graph) -> LabeledGraph:
    g = LabeledGraph()
    for v in h.nodes:
        g.add_vertex(v, h.nodes[v].get("role", PLAIN))
    for u, v in h.edges:
        g.add_edge(u, v)
    return g


# canonical codes --------------------------------------------------------

Labeler = Callable[[Hashable, VertexRole], Hashable]


def role_label(v, role: VertexRole):
    return role


def _initial_labels(g: LabeledGraph, visible) -> list:
    if visible is None or visible is False:
        return [0] * len(g)
    if visible is True:
        visible = role_label
    if isinstance(visible, Mapping):
        return [visible.get(v, None) for v in g]
    return [visible(v, g.role(v)) for v in g]


def _rank(keys: list) -> list[int]:
    """Replace keys by their rank among the distinct keys (keys must be sortable by repr)."""
    ordered = sorted(set(keys), key=_sort_key)
    rank = {k: i for i, k in enumerate(ordered)}
    return [rank[k] for k in keys]


def _sort_key(x):
    return (type(x).__name__, repr(x))


def _refine(adj: list[list[int]], colors: list[int]) -> list[int]:
    n = len(colors)
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(n)]
        ordered = sorted(set(sigs))
        rank = {s: i for i, s in enumerate(ordered)}
        new = [rank[s] for s in sigs]
        if len(ordered) == len(set(colors)):
            return new
        colors = new


def canonical_code(g: LabeledGraph, visible=None, limit: int = CANON_LIMIT) -> bytes:
    """A byte string equal for two graphs iff they are isomorphic respecting labels.

    ``visible`` selects the vertex annotations that must be preserved: ``None``
    hides all roles, ``True`` uses full roles, a mapping gives per-vertex labels
    (missing vertices get ``None``), a callable ``(v, role) -> label`` computes
    them. Color refinement with individualization; twins are branched once.
    """
    n = len(g)
    if n > limit:
        raise GraphSizeError(f"{n} vertices exceed the canonical-code limit of {limit}")
    verts = list(g)
    idx = {v: i for i, v in enumerate(verts)}
    adj = [sorted(idx[w] for w in g.neighbors(v)) for v in verts]
    adjset = [set(a) for a in adj]
    raw = _initial_labels(g, visible)
    label_rank = _rank(raw)
    label_names = sorted(set(raw), key=_sort_key)

    best: list = [None]

    def leaf_code(colors: list[int]) -> tuple:
        order = sorted(range(n), key=lambda v: colors[v])
        pos = {v: i for i, v in enumerate(order)}
        labels = tuple(label_rank[v] for v in order)
        edges = tuple(sorted((min(pos[u], pos[w]), max(pos[u], pos[w])) for u in range(n) for w in adj[u] if u < w))
        return labels, edges

    def search(colors: list[int]) -> None:
        colors = _refine(adj, colors)
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                if target is None or len(cells[c]) < len(cells[target]):
                    target = c
        if target is None:
            code = leaf_code(colors)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        tried: list[int] = []
        for v in cells[target]:
            # same-cell twins give isomorphic subtrees
            if any(adjset[v] - {u} == adjset[u] - {v} for u in tried):
                continue
            tried.append(v)
            individualized = [2 * c + (1 if c >= target else 0) for c in colors]
            individualized[v] = 2 * target
            search(individualized)

    search(label_rank)
    labels, edges = best[0]
    text = repr(([repr(label_names[i]) for i in labels], edges))
    return f"{n}:".encode() + text.encode()


def _node_match(visible):
    if visible is None or visible is False:
        return None, None
    if visible is True:
        visible = role_label
    return visible, (lambda a, b: a["label"] == b["label"])


def are_isomorphic(g: LabeledGraph, h: LabeledGraph, visible=None, limit: int = ISO_LIMIT) -> bool:
    """Backtracking isomorphism test (networkx VF2) respecting visible labels."""
    if len(g) > limit or len(h) > limit:
        raise GraphSizeError(f"graph exceeds the isomorphism limit of {limit}")
    if len(g) != len(h) or g.n_edges != h.n_edges:
        return False
    if sorted(len(g.neighbors(v)) for v in g) != sorted(len(h.neighbors(v)) for v in h):
        return False
    labeler, match = _node_match(visible)
    a, b = g.to_networkx(), h.to_networkx()
    if labeler is not None:
        for graph, src in ((a, g), (b, h)):
            labels = labeler if not isinstance(labeler, Mapping) else (lambda v, r, m=labeler: m.get(v))
            for v in src:
                graph.nodes[v]["label"] = labels(v, src.role(v))
    return GraphMatcher(a, b, node_match=match).is_isomorphic()


def automorphisms(g: LabeledGraph, visible=None, cap: int = 5000) -> Optional[list[tuple[int, ...]]]:
    """All automorphisms as index permutations, or ``None`` if there are more than ``cap``."""
    labeler, match = _node_match(visible)
    a = g.to_networkx()
    if labeler is not None:
        for v in g:
            a.nodes[v]["label"] = labeler(v, g.role(v))
    idx = g.index()
    out = []
    for mapping in GraphMatcher(a, a, node_match=match).isomorphisms_iter():
        out.append(tuple(idx[mapping[v]] for v in g))
        if len(out) > cap:
            return None
    return out
