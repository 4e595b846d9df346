"""Base 3-SAT reductions and exact offline solvers for VC, IS and DS."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .formula import FormulaError, QbfInstance, satisfies
from .graph import Kind, LabeledGraph, Strategy, VertexRole

DEFAULT_NODE_CAP = 10**7


class Problem(str, Enum):
    VC = "vc"
    IS = "is"
    DS = "ds"

    @property
    def minimize(self) -> bool:
        return self is not Problem.IS

    @property
    def title(self) -> str:
        return {"vc": "Vertex Cover", "is": "Independent Set", "ds": "Dominating Set"}[self.value]

    @classmethod
    def parse(cls, name) -> "Problem":
        if isinstance(name, Problem):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "vc": "vc", "vertexcover": "vc",
            "is": "is", "independentset": "is",
            "ds": "ds", "dominatingset": "ds",
        }
        if key not in aliases:
            raise ValueError(f"unknown problem {name!r}")
        return cls(aliases[key])


class SolverCapExceeded(RuntimeError):
    """Branch-and-bound explored more nodes than allowed."""


class Infeasible(ValueError):
    """No solution respects the forced vertices."""


class DecodeError(ValueError):
    pass


# vertex names ------------------------------------------------------------

def lit_name(lit: int) -> str:
    return f"L{'+' if lit > 0 else '-'}{abs(lit)}"


def signed(lit: int) -> str:
    return f"{'+' if lit > 0 else '-'}{abs(lit)}"


def clause_vertex(j: int, lit: Optional[int] = None) -> str:
    return f"C{j}" if lit is None else f"C{j}.{signed(lit)}"


def aux_name(i: int) -> str:
    return f"A{i}"


@dataclass
class OfflineReduction:
    problem: Problem
    graph: LabeledGraph
    k: int
    source: QbfInstance


def _literal_role(lit: int) -> VertexRole:
    return VertexRole(Kind.LITERAL, abs(lit), lit > 0, strategy=Strategy.DEPENDS)


def reduce_3sat(p, q: QbfInstance) -> OfflineReduction:
    """The folklore 3-SAT reductions; quantifiers are ignored."""
    p = Problem.parse(p)
    if not q.is_normalized():
        raise FormulaError("reduce_3sat needs a normalized formula")
    g = LabeledGraph()
    for i in range(1, q.n + 1):
        g.add_vertex(lit_name(i), _literal_role(i))
        g.add_vertex(lit_name(-i), _literal_role(-i))
        if p is Problem.DS:
            g.add_vertex(aux_name(i), VertexRole(Kind.VARIABLE_AUX, i, strategy=Strategy.REJECT))
            g.add_edge(lit_name(i), aux_name(i))
            g.add_edge(lit_name(-i), aux_name(i))
        g.add_edge(lit_name(i), lit_name(-i))
    for j, clause in enumerate(q.clauses, 1):
        key = tuple(sorted(clause.literals))
        if p is Problem.DS:
            c = clause_vertex(j)
            g.add_vertex(c, VertexRole(Kind.CLAUSE_MEMBER, clause=key, strategy=Strategy.REJECT))
            for lit in clause:
                g.add_edge(c, lit_name(lit))
            continue
        members = [clause_vertex(j, lit) for lit in clause]
        for lit, v in zip(clause, members):
            role = VertexRole(Kind.CLAUSE_MEMBER, abs(lit), lit > 0, key, strategy=Strategy.DEPENDS)
            g.add_vertex(v, role)
        for a in range(3):
            for b in range(a + 1, 3):
                g.add_edge(members[a], members[b])
        for lit, v in zip(clause, members):
            # VC attaches to the literal itself, IS to its negation
            g.add_edge(v, lit_name(lit if p is Problem.VC else -lit))
    k = {Problem.VC: q.n + 2 * q.m, Problem.IS: q.n + q.m, Problem.DS: q.n}[p]
    return OfflineReduction(p, g, k, q)


# feasibility ---------------------------------------------------------------

def feasible(p, g: LabeledGraph, sol: Iterable) -> bool:
    p = Problem.parse(p)
    sol = set(sol)
    if not sol <= set(g):
        raise ValueError("solution contains unknown vertices")
    if p is Problem.VC:
        return all(u in sol or v in sol for u, v in g.edges())
    if p is Problem.IS:
        return not any(u in sol and v in sol for u, v in g.edges())
    return all(v in sol or g.neighbors(v) & sol for v in g)


def meets_budget(p, size: int, k: int) -> bool:
    return size <= k if Problem.parse(p).minimize else size >= k


# exact solvers --------------------------------------------------------------

@dataclass(frozen=True)
class OfflineResult:
    size: int
    witness: frozenset
    nodes: int = 0


class _Counter:
    def __init__(self, cap: int):
        self.cap = cap
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise SolverCapExceeded(f"branch-and-bound exceeded {self.cap} nodes")


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _min_vertex_cover(adj: list[int], alive: int, counter: _Counter) -> tuple[int, int]:
    """Return (size, cover mask) of a minimum vertex cover of the alive subgraph."""
    best = [None, 0]

    def matching_bound(alive: int) -> int:
        count = 0
        rest = alive
        while rest:
            v = (rest & -rest).bit_length() - 1
            nb = adj[v] & rest
            rest &= ~(1 << v)
            if nb:
                w = (nb & -nb).bit_length() - 1
                rest &= ~(1 << w)
                count += 1
        return count

    def rec(alive: int, taken: int, size: int):
        counter.tick()
        # reductions
        changed = True
        while changed:
            changed = False
            for v in _bits(alive):
                nb = adj[v] & alive
                d = _popcount(nb)
                if d == 0:
                    alive &= ~(1 << v)
                    changed = True
                elif d == 1:
                    taken |= nb
                    size += 1
                    alive &= ~(nb | (1 << v))
                    changed = True
                elif d == 2:
                    a, b = list(_bits(nb))
                    if adj[a] >> b & 1:
                        taken |= nb
                        size += 2
                        alive &= ~(nb | (1 << v))
                        changed = True
                if changed:
                    break
        if best[0] is not None and size + matching_bound(alive) >= best[0]:
            return
        if not alive:
            best[0], best[1] = size, taken
            return
        v = max(_bits(alive), key=lambda u: (_popcount(adj[u] & alive), -u))
        nb = adj[v] & alive
        rec(alive & ~(1 << v), taken | (1 << v), size + 1)
        rec(alive & ~(nb | (1 << v)), taken | nb, size + _popcount(nb))

    rec(alive, 0, 0)
    return best[0], best[1]


def _min_dominating_set(
    closed: list[int], undominated: int, allowed: int, counter: _Counter
) -> Optional[tuple[int, int]]:
    """Minimum set within ``allowed`` whose closed neighborhoods cover ``undominated``."""
    best = [None, 0]
    cover_of = closed

    def rec(undom: int, allowed: int, chosen: int, size: int):
        counter.tick()
        if not undom:
            if best[0] is None or size < best[0]:
                best[0], best[1] = size, chosen
            return
        # lower bound: largest single coverage among allowed candidates
        gain = 0
        pick = None
        pick_opts = None
        for u in _bits(undom):
            opts = cover_of[u] & allowed
            c = _popcount(opts)
            if c == 0:
                return
            if pick is None or c < pick_opts:
                pick, pick_opts = u, c
        for w in _bits(allowed):
            gain = max(gain, _popcount(cover_of[w] & undom))
        need = -(-_popcount(undom) // gain)
        if best[0] is not None and size + need >= best[0]:
            return
        options = sorted(
            _bits(cover_of[pick] & allowed), key=lambda w: (-_popcount(cover_of[w] & undom), w)
        )
        for w in options:
            rec(undom & ~cover_of[w], allowed & ~(1 << w), chosen | (1 << w), size + 1)
            allowed &= ~(1 << w)

    rec(undominated, allowed, 0, 0)
    if best[0] is None:
        return None
    return best[0], best[1]


def _optimum(p: Problem, g: LabeledGraph, forced_in: set, forced_out: set, need_dominated,
             counter: _Counter) -> tuple[int, int]:
    idx = g.index()
    n = len(g)
    adj = g.adjacency_masks()
    fin = 0
    fout = 0
    for v in forced_in:
        fin |= 1 << idx[v]
    for v in forced_out:
        fout |= 1 << idx[v]
    if fin & fout:
        raise Infeasible("vertex forced both in and out")
    full = (1 << n) - 1
    if p is Problem.IS:
        # an independent set is the complement of a vertex cover
        size, cover = _optimum(Problem.VC, g, forced_out, forced_in, None, counter)
        return n - size, full & ~cover
    if p is Problem.VC:
        for v in _bits(fout):
            if adj[v] & fout:
                raise Infeasible("adjacent vertices both forced out")
            fin |= adj[v]
        alive = full & ~fin & ~fout
        size, cover = _min_vertex_cover(adj, alive, counter)
        return size + _popcount(fin), cover | fin
    closed = [adj[v] | (1 << v) for v in range(n)]
    undom = full
    if need_dominated is not None:
        undom = 0
        for v in need_dominated:
            undom |= 1 << idx[v]
    for v in _bits(fin):
        undom &= ~closed[v]
    result = _min_dominating_set(closed, undom, full & ~fin & ~fout, counter)
    if result is None:
        raise Infeasible("some vertex cannot be dominated")
    return result[0] + _popcount(fin), result[1] | fin


def solve_offline_exact(
    p,
    g: LabeledGraph,
    cap: Optional[int] = None,
    forced_in: Iterable = (),
    forced_out: Iterable = (),
    need_dominated: Optional[Iterable] = None,
    node_cap: int = DEFAULT_NODE_CAP,
    witness: bool = True,
) -> OfflineResult:
    """Exact optimum with the lexicographically smallest optimal witness.

    ``cap`` bounds the vertex count; ``need_dominated`` restricts which
    vertices a DS solution must dominate (default: all).
    """
    p = Problem.parse(p)
    if cap is not None and len(g) > cap:
        raise SolverCapExceeded(f"{len(g)} vertices exceed the cap of {cap}")
    counter = _Counter(node_cap)
    fin, fout = set(forced_in), set(forced_out)
    nd = None if need_dominated is None else set(need_dominated)
    size, mask = _optimum(p, g, fin, fout, nd, counter)
    verts = list(g)
    if not witness:
        return OfflineResult(size, frozenset(verts[i] for i in _bits(mask)), counter.nodes)
    chosen = set()
    for v in verts:
        if v in fin or v in fout:
            continue
        try:
            s, _ = _optimum(p, g, fin | {v}, fout, nd, counter)
        except Infeasible:
            s = None
        if s == size:
            fin = fin | {v}
        else:
            fout = fout | {v}
    s, mask = _optimum(p, g, fin, fout, nd, counter)
    assert s == size
    return OfflineResult(size, frozenset(verts[i] for i in _bits(mask)), counter.nodes)


def brute_force_optimum(p, g: LabeledGraph) -> int:
    """Subset enumeration; only for tiny graphs."""
    p = Problem.parse(p)
    verts = list(g)
    n = len(verts)
    best = None
    for mask in range(1 << n):
        sol = {verts[i] for i in range(n) if mask >> i & 1}
        if feasible(p, g, sol):
            s = len(sol)
            if best is None or (s < best if p.minimize else s > best):
                best = s
    return best


def all_optimal_solutions(p, g: LabeledGraph) -> list[frozenset]:
    p = Problem.parse(p)
    verts = list(g)
    opt = solve_offline_exact(p, g, witness=False).size
    out = []
    from itertools import combinations

    for combo in combinations(verts, opt):
        if feasible(p, g, combo):
            out.append(frozenset(combo))
    return out


# dependence and decoding ------------------------------------------------------

def classify_dependence(r: OfflineReduction) -> dict:
    """Map each vertex to the variable it is solution dependent on, or ``None``."""
    out = {}
    for v in r.graph:
        role = r.graph.role(v)
        if r.problem is Problem.DS:
            out[v] = role.variable if role.kind is Kind.LITERAL else None
        else:
            out[v] = role.variable
    return out


def varying_vertices(p, g: LabeledGraph) -> set:
    """Vertices that are in some optimal solution and out of another."""
    p = Problem.parse(p)
    opt = solve_offline_exact(p, g, witness=False).size
    varying = set()
    for v in g:
        try:
            with_v = solve_offline_exact(p, g, forced_in=[v], witness=False).size
            without_v = solve_offline_exact(p, g, forced_out=[v], witness=False).size
        except Infeasible:
            continue
        if with_v == opt and without_v == opt:
            varying.add(v)
    return varying


def decode_assignment(p, r: OfflineReduction, witness: Iterable) -> dict[int, bool]:
    """Read the truth assignment a budget-meeting witness encodes."""
    p = Problem.parse(p)
    sol = set(witness)
    g = r.graph
    if not feasible(p, g, sol):
        raise DecodeError("witness is not feasible")
    if not meets_budget(p, len(sol), r.k):
        raise DecodeError(f"witness size {len(sol)} misses the budget {r.k}")
    values = {}
    for i in range(1, r.source.n + 1):
        pos, neg = lit_name(i) in sol, lit_name(-i) in sol
        if pos and neg:
            raise DecodeError(f"both literal vertices of x{i} selected")
        if not pos and not neg and not (p is Problem.DS and aux_name(i) in sol):
            raise DecodeError(f"no literal vertex of x{i} selected")
        values[i] = pos or not neg
    if not satisfies(r.source, values):
        raise DecodeError("decoded assignment does not satisfy the formula")
    return values
