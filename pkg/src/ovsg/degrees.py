"""Closed-form degree tables for the fully extended reductions and audits against them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .gadgets import OnlineInstance, base_binom, dr_center_degree
from .graph import Kind, Strategy, VertexRole
from .offline import Problem


@dataclass(frozen=True)
class DegreeRow:
    """One row of a degree table; ``literal`` is set for formula-dependent rows."""

    degree: int
    label: str
    strategy: Strategy
    kind: Optional[str] = None  # "literal" or "clause" for formula-dependent rows
    variable: Optional[int] = None
    positive: Optional[bool] = None  # None for the shared ∀-literal row


def degree_table(p, q) -> list[DegreeRow]:
    """All rows for problem ``p`` and formula ``q``, fixed rows first."""
    p = Problem.parse(p)
    n = q.n
    b = base_binom(n)
    accept, reject = Strategy.ACCEPT, Strategy.REJECT
    if p is Problem.IS:
        accept, reject = reject, accept
    rows: list[DegreeRow] = []
    if p is Problem.DS:
        rows += [
            DegreeRow(1, "leaf of fake clause / dr / unconnected ID leaf", Strategy.REJECT),
            DegreeRow(2, "connected ID leaf / variable aux", Strategy.REJECT),
            DegreeRow(3, "clause vertex", Strategy.REJECT),
            DegreeRow(2 * n + 1, "center of fake clause / dr star", Strategy.ACCEPT),
            DegreeRow(b + 4 * (n + 1), "center of literal ID star", Strategy.ACCEPT),
        ]
    else:
        rows += [
            DegreeRow(1, "leaf of extension gadget", reject),
            DegreeRow(3, "ID middle", accept),
            DegreeRow(5, "fake clause triangle", accept),
            DegreeRow(dr_center_degree(p, n), "dr center", accept),
        ]
    for i in range(1, n + 1):
        if q.is_forall(i):
            rows.append(DegreeRow(b + 4 * i, f"literal of ∀x{i}", Strategy.DEPENDS, "literal", i, None))
        else:
            rows.append(DegreeRow(b + 4 * i, f"literal x{i}", Strategy.DEPENDS, "literal", i, True))
            rows.append(DegreeRow(b + 4 * i + 1, f"literal ¬x{i}", Strategy.DEPENDS, "literal", i, False))
        if p is not Problem.DS:
            rows.append(DegreeRow(b + 4 * i + 2, f"clause member x{i}", Strategy.DEPENDS, "clause", i, True))
            rows.append(DegreeRow(b + 4 * i + 3, f"clause member ¬x{i}", Strategy.DEPENDS, "clause", i, False))
    return rows


def row_lookup(p, q) -> dict[int, DegreeRow]:
    table = {}
    for row in degree_table(p, q):
        if row.degree in table:
            raise ValueError(f"degree {row.degree} labels two rows ({table[row.degree].label}, {row.label})")
        table[row.degree] = row
    return table


def expected_degree(p, q, role: VertexRole) -> int:
    """Degree the table prescribes for a vertex with this role."""
    p = Problem.parse(p)
    n = q.n
    b = base_binom(n)
    k = role.kind
    if k is Kind.LITERAL:
        return b + 4 * role.variable + (1 if not role.positive and not q.is_forall(role.variable) else 0)
    if p is Problem.DS:
        if k is Kind.VARIABLE_AUX:
            return 2
        if k is Kind.CLAUSE_MEMBER:
            return 3
        if k in (Kind.FAKE_MEMBER, Kind.DR_CENTER):
            return 2 * n + 1
        if k is Kind.ID_CENTER:
            return b + 4 * (n + 1)
        if k is Kind.ID_LEAF:
            return 2 if role.variable is not None else 1
        if k in (Kind.FAKE_LEAF, Kind.DR_LEAF):
            return 1
    else:
        if k is Kind.CLAUSE_MEMBER:
            return b + 4 * role.variable + (2 if role.positive else 3)
        if k is Kind.FAKE_MEMBER:
            return 5
        if k is Kind.DR_CENTER:
            return dr_center_degree(p, n)
        if k is Kind.ID_MIDDLE:
            return 3
        if k in (Kind.FAKE_LEAF, Kind.DR_LEAF, Kind.ID_LEAF):
            return 1
    raise ValueError(f"no degree row for {k.value} in the {p.value} profile")


@dataclass
class AuditReport:
    mismatches: list[tuple[str, int, int]] = field(default_factory=list)  # (vertex, expected, actual)
    partition: dict[int, set[str]] = field(default_factory=dict)  # degree -> role rows
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def shared_degrees(self) -> dict[int, set[str]]:
        return {d: rows for d, rows in self.partition.items() if len(rows) > 1}


def _row_name(role: VertexRole) -> str:
    if role.kind in (Kind.LITERAL, Kind.CLAUSE_MEMBER) and role.variable is not None:
        return f"{role.kind.value}:{'+' if role.positive else '-'}{role.variable}"
    return role.kind.value


def audit_degrees(inst: OnlineInstance) -> AuditReport:
    report = AuditReport()
    g = inst.graph
    for v in g:
        role = g.role(v)
        actual = len(g.neighbors(v))
        try:
            want = expected_degree(inst.problem, inst.formula, role)
        except ValueError:
            want = -1
        report.checked += 1
        if want != actual:
            report.mismatches.append((v, want, actual))
        report.partition.setdefault(actual, set()).add(_row_name(role))
    return report


