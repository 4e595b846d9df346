"""Extension gadgets and the three-stage online reduction pipeline.

Starting from the base reduction, the pipeline adds one fake clause gadget
per absent 3-literal clause, one dependency reveal (dr) star per
∀-variable, and ID gadgets that pad every solution dependent vertex to the
degree its row in the degree table prescribes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional

from .formula import Clause, FormulaError, QbfInstance
from .graph import Kind, LabeledGraph, Strategy, VertexRole
from .offline import (
    Infeasible,
    OfflineReduction,
    Problem,
    feasible,
    lit_name,
    reduce_3sat,
    signed,
    solve_offline_exact,
)

VERIFY_LIMIT = 40


class GadgetError(ValueError):
    pass


@dataclass
class ExtensionGadget:
    name: str
    kind: str
    problem: Problem
    vertices: list[tuple[str, VertexRole]]
    edges: list[tuple[str, str]]
    connecting: list[tuple[str, str]]  # (host vertex, gadget vertex)
    standalone_optimum: int
    standalone_witness: frozenset
    target: object = None

    @property
    def vertex_names(self) -> list[str]:
        return [v for v, _ in self.vertices]

    def boundary(self) -> list[str]:
        return list(dict.fromkeys(h for h, _ in self.connecting))

    def graph(self) -> LabeledGraph:
        g = LabeledGraph()
        for v, role in self.vertices:
            g.add_vertex(v, role)
        for u, v in self.edges:
            g.add_edge(u, v)
        return g

    def with_boundary(self, host: Optional[LabeledGraph] = None) -> LabeledGraph:
        """Gadget plus its boundary host vertices and E_con (no host edges)."""
        g = self.graph()
        for h in self.boundary():
            g.add_vertex(h, host.role(h) if host is not None and h in host else VertexRole())
        for h, v in self.connecting:
            g.add_edge(h, v, connecting=True)
        return g


def extend(host: LabeledGraph, gadget: ExtensionGadget) -> LabeledGraph:
    """The graph extension: vertex and edge unions plus the connecting edges."""
    g = host.copy()
    extend_in_place(g, gadget)
    return g


def extend_in_place(g: LabeledGraph, gadget: ExtensionGadget) -> None:
    for v, _ in gadget.vertices:
        if v in g:
            raise GadgetError(f"gadget vertex {v!r} collides with the host")
    names = set(gadget.vertex_names)
    for h, v in gadget.connecting:
        if h not in g:
            raise GadgetError(f"connecting edge to unknown host vertex {h!r}")
        if v not in names:
            raise GadgetError(f"connecting edge from unknown gadget vertex {v!r}")
    for v, role in gadget.vertices:
        g.add_vertex(v, role)
    for u, v in gadget.edges:
        g.add_edge(u, v)
    for h, v in gadget.connecting:
        g.add_edge(h, v, connecting=True)


# counting helpers ------------------------------------------------------------

def forall_below(q: QbfInstance, i: int) -> int:
    return q.forall_before(i)


def forall_upto(q: QbfInstance, i: int) -> int:
    return q.forall_upto(i)


def forall_below_closed_form(q: QbfInstance, i: int) -> int:
    """Floor form of the ∀-count, valid for alternating prefixes."""
    return i // 2 if q.is_forall(1) else (i - 1) // 2


def forall_upto_closed_form(q: QbfInstance, i: int) -> int:
    return (i + 1) // 2 if q.is_forall(1) else i // 2


def base_binom(n: int) -> int:
    return comb(2 * n - 1, 2)


def dr_center_degree(p: Problem, n: int) -> int:
    if p is Problem.DS:
        return 2 * n + 1
    return 3 * comb(2 * n, 3) + 2 * n + 1


def all_clause_keys(n: int) -> list[tuple[int, ...]]:
    lits = [l for i in range(1, n + 1) for l in (i, -i)]
    return [tuple(sorted(c, key=_lit_order)) for c in itertools.combinations(lits, 3)]


def _lit_order(l: int):
    return (abs(l), l < 0)


def fake_name(key: tuple[int, ...]) -> str:
    return "F(" + ",".join(signed(l) for l in key) + ")"


def _flip(p: Problem, s: Strategy) -> Strategy:
    if p is not Problem.IS or s is Strategy.DEPENDS:
        return s
    return Strategy.REJECT if s is Strategy.ACCEPT else Strategy.ACCEPT


# gadget builders --------------------------------------------------------------

def build_fake_clause(p, c, n: int, real: Iterable = ()) -> ExtensionGadget:
    """Fake clause gadget for an absent clause ``c`` over ``n`` variables."""
    p = Problem.parse(p)
    lits = tuple(c.literals if isinstance(c, Clause) else c)
    if len(lits) != 3 or len(set(lits)) != 3:
        raise GadgetError("a fake clause needs 3 distinct literals")
    key = tuple(sorted(lits, key=_lit_order))
    real_keys = {frozenset(r.literals if isinstance(r, Clause) else r) for r in real}
    if frozenset(key) in real_keys:
        raise GadgetError(f"{key} is a real clause")
    name = fake_name(key)
    clause_key = tuple(sorted(key))
    verts, edges, con = [], [], []
    if p is Problem.DS:
        center = name
        verts.append((center, VertexRole(Kind.FAKE_MEMBER, clause=clause_key, strategy=Strategy.ACCEPT)))
        for j in range(1, 2 * n - 1):
            leaf = f"{name}/l{j}"
            verts.append((leaf, VertexRole(Kind.FAKE_LEAF, clause=clause_key, target=center)))
            edges.append((center, leaf))
        for l in key:
            con.append((lit_name(l), center))
        return ExtensionGadget(name, "fake-clause", p, verts, edges, con, 1, frozenset([center]), key)
    members = []
    for l in key:
        m = f"{name}.{signed(l)}"
        members.append(m)
        verts.append((m, VertexRole(Kind.FAKE_MEMBER, abs(l), l > 0, clause_key,
                                    strategy=_flip(p, Strategy.ACCEPT))))
        for j in (1, 2):
            leaf = f"{m}/p{j}"
            verts.append((leaf, VertexRole(Kind.FAKE_LEAF, abs(l), l > 0, clause_key, target=m,
                                           strategy=_flip(p, Strategy.REJECT))))
            edges.append((m, leaf))
        con.append((lit_name(l if p is Problem.VC else -l), m))
    for a, b in itertools.combinations(members, 2):
        edges.append((a, b))
    if p is Problem.VC:
        return ExtensionGadget(name, "fake-clause", p, verts, edges, con, 3, frozenset(members), key)
    pendants = frozenset(v for v, r in verts if r.kind is Kind.FAKE_LEAF)
    return ExtensionGadget(name, "fake-clause", p, verts, edges, con, 6, pendants, key)


def dr_targets(p, i: int, q: QbfInstance) -> list[str]:
    """Host vertices the dr star of ∀-variable x_i is joined to."""
    p = Problem.parse(p)
    targets = []
    for j in range(i, q.n + 1):
        if j != i:
            targets.append(lit_name(j))
        targets.append(lit_name(-j))
    if p is not Problem.DS:
        for c_index, clause in enumerate(q.clauses, 1):
            for l in clause:
                if abs(l) >= i:
                    targets.append(f"C{c_index}.{signed(l)}")
    return targets


def build_dependency_reveal(p, i: int, q: QbfInstance) -> ExtensionGadget:
    p = Problem.parse(p)
    if not q.is_forall(i):
        raise GadgetError(f"x{i} is not universally quantified")
    targets = dr_targets(p, i, q)
    center = f"D{i}"
    leaves = dr_center_degree(p, q.n) - len(targets)
    if leaves < 2:
        raise GadgetError(f"dr star for x{i} would have {leaves} leaves")
    verts = [(center, VertexRole(Kind.DR_CENTER, i, strategy=_flip(p, Strategy.ACCEPT)))]
    edges = []
    for j in range(1, leaves + 1):
        leaf = f"{center}/l{j}"
        verts.append((leaf, VertexRole(Kind.DR_LEAF, i, target=center, strategy=_flip(p, Strategy.REJECT))))
        edges.append((center, leaf))
    con = [(t, center) for t in targets]
    if p is Problem.IS:
        witness = frozenset(v for v, _ in verts[1:])
        return ExtensionGadget(center, "dr", p, verts, edges, con, leaves, witness, i)
    return ExtensionGadget(center, "dr", p, verts, edges, con, 1, frozenset([center]), i)


def literal_id_count(p, q: QbfInstance, lit: int) -> int:
    p = Problem.parse(p)
    i = abs(lit)
    below = forall_below(q, i)
    if p is Problem.DS:
        offset = 2 if lit > 0 else (3 if q.is_forall(i) else 1)
    else:
        offset = 1 if lit > 0 else (2 if q.is_forall(i) else 0)
    return 4 * i - below - offset


def clause_id_count(p, q: QbfInstance, lit: int) -> int:
    p = Problem.parse(p)
    if p is Problem.DS:
        raise GadgetError("DS clause vertices get the empty ID gadget")
    i = abs(lit)
    return base_binom(q.n) + 4 * i - forall_upto(q, i) - (1 if lit > 0 else 0)


def build_id_gadget(p, target: str, role: VertexRole, q: QbfInstance) -> ExtensionGadget:
    """ID gadget for a literal vertex or (VC/IS) a clause member."""
    p = Problem.parse(p)
    lit = role.literal
    if role.kind is Kind.LITERAL:
        d = literal_id_count(p, q, lit)
        kind = "literal-id"
    elif role.kind is Kind.CLAUSE_MEMBER and p is not Problem.DS:
        d = clause_id_count(p, q, lit)
        kind = "clause-id"
    else:
        raise GadgetError(f"{role.kind.value} vertices get the empty ID gadget")
    if d < 0:
        raise GadgetError(f"negative ID count {d} for {target}")
    name = f"ID({target})"
    verts, edges, con = [], [], []
    owner = dict(variable=abs(lit), positive=lit > 0, clause=role.clause, target=target)
    if p is Problem.DS:
        center = f"{name}/c"
        verts.append((center, VertexRole(Kind.ID_CENTER, strategy=Strategy.ACCEPT, **owner)))
        for j in range(1, base_binom(q.n) + 4 * (q.n + 1) + 1):
            leaf = f"{name}/l{j}"
            connected = j <= d
            leaf_role = VertexRole(Kind.ID_LEAF, strategy=Strategy.REJECT, **owner) if connected else \
                VertexRole(Kind.ID_LEAF, strategy=Strategy.REJECT, target=center)
            verts.append((leaf, leaf_role))
            edges.append((center, leaf))
            if connected:
                con.append((target, leaf))
        return ExtensionGadget(name, kind, p, verts, edges, con, 1, frozenset([center]), target)
    middles, ends = [], []
    for j in range(1, d + 1):
        m = f"{name}/m{j}"
        middles.append(m)
        verts.append((m, VertexRole(Kind.ID_MIDDLE, strategy=_flip(p, Strategy.ACCEPT), **owner)))
        for side in "ab":
            e = f"{m}{side}"
            ends.append(e)
            verts.append((e, VertexRole(Kind.ID_LEAF, strategy=_flip(p, Strategy.REJECT),
                                        variable=abs(lit), positive=lit > 0, target=m)))
            edges.append((m, e))
        con.append((target, m))
    if p is Problem.IS:
        return ExtensionGadget(name, kind, p, verts, edges, con, 2 * d, frozenset(ends), target)
    return ExtensionGadget(name, kind, p, verts, edges, con, d, frozenset(middles), target)


# standalone verification ---------------------------------------------------

def verify_standalone(g: ExtensionGadget) -> bool:
    """Recompute the gadget's own optimum with the exact solver."""
    if len(g.vertices) > VERIFY_LIMIT:
        return True
    gg = g.graph()
    size = solve_offline_exact(g.problem, gg, witness=False).size
    if size != g.standalone_optimum:
        return False
    return feasible(g.problem, gg, g.standalone_witness) and len(g.standalone_witness) == size


# online instance -------------------------------------------------------------

@dataclass
class OnlineInstance:
    graph: LabeledGraph
    problem: Problem
    k: int
    formula: QbfInstance
    base: OfflineReduction
    gadgets: list[ExtensionGadget] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.formula.n

    def gadgets_of(self, kind: str) -> list[ExtensionGadget]:
        return [g for g in self.gadgets if g.kind == kind]

    def without(self, gadget_name: str) -> "OnlineInstance":
        """The instance with one gadget (vertices and edges) deleted."""
        keep = [g for g in self.gadgets if g.name != gadget_name]
        if len(keep) == len(self.gadgets):
            raise KeyError(gadget_name)
        dropped = next(g for g in self.gadgets if g.name == gadget_name)
        graph = self.graph.copy()
        graph.remove_vertices(dropped.vertex_names)
        inst = OnlineInstance(graph, self.problem, 0, self.formula, self.base, keep)
        inst.k = compute_budget(inst)
        return inst


def build_online_instance(q: QbfInstance, p, verify: bool = False) -> OnlineInstance:
    """Assemble G''' = base ∘ fake clauses ∘ dr stars ∘ ID gadgets."""
    p = Problem.parse(p)
    if not q.is_normalized():
        raise FormulaError("build_online_instance needs a normalized formula")
    base = reduce_3sat(p, q)
    g = base.graph.copy()
    gadgets: list[ExtensionGadget] = []
    real = {c.key for c in q.clauses}
    for key in all_clause_keys(q.n):
        if frozenset(key) in real:
            continue
        gadgets.append(build_fake_clause(p, key, q.n))
        extend_in_place(g, gadgets[-1])
    for i in range(1, q.n + 1):
        if q.is_forall(i):
            gadgets.append(build_dependency_reveal(p, i, q))
            extend_in_place(g, gadgets[-1])
    for v in list(base.graph):
        role = base.graph.role(v)
        if role.kind is Kind.LITERAL or (role.kind is Kind.CLAUSE_MEMBER and p is not Problem.DS):
            gadgets.append(build_id_gadget(p, v, role, q))
            extend_in_place(g, gadgets[-1])
    if verify:
        for gadget in gadgets:
            if not verify_standalone(gadget):
                raise GadgetError(f"standalone optimum of {gadget.name} is wrong")
    inst = OnlineInstance(g, p, 0, q, base, gadgets)
    inst.k = compute_budget(inst)
    return inst


def compute_budget(inst: OnlineInstance) -> int:
    """Base budget plus the standalone optimum of every gadget."""
    return inst.base.k + sum(g.standalone_optimum for g in inst.gadgets)


# self-containment ------------------------------------------------------------

@dataclass
class SelfContainedReport:
    gadget: str
    standalone_optimum: int
    assignments: int
    violations: list[tuple[dict, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_self_contained(p, g: ExtensionGadget, host: Optional[LabeledGraph] = None,
                         limit: int = 12) -> SelfContainedReport:
    """Check that every in/out choice on the boundary leaves the gadget's
    own optimum unchanged (and so never forces a boundary vertex)."""
    p = Problem.parse(p)
    full = g.with_boundary(host)
    boundary = g.boundary()
    if len(boundary) > limit:
        raise GadgetError(f"{len(boundary)} boundary vertices exceed the forcing limit {limit}")
    inner = set(g.vertex_names)
    violations = []
    count = 0
    for bits in itertools.product((True, False), repeat=len(boundary)):
        count += 1
        forcing = dict(zip(boundary, bits))
        fin = [v for v, b in forcing.items() if b]
        fout = [v for v, b in forcing.items() if not b]
        try:
            res = solve_offline_exact(p, full, forced_in=fin, forced_out=fout,
                                      need_dominated=inner if p is Problem.DS else None,
                                      witness=False)
            part = res.size - len(fin)
        except Infeasible:
            part = None
        if part != g.standalone_optimum:
            violations.append((forcing, part))
    return SelfContainedReport(g.name, g.standalone_optimum, count, violations)
