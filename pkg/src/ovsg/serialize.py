"""Instance files and DOT export.

Instances are JSON documents tagged ``"format": "ovsg-instance/1"``:

    {"format": ..., "problem": "vc", "k": 52, "offline": false,
     "formula": "<qdimacs text or null>",
     "vertices": [{"name": "L+1", "role": {...}}, ...],
     "edges": [["L+1", "L-1"], ["L+1", "D1", true], ...]}

A third edge entry ``true`` marks a connecting edge of an extension gadget.
Plain edge lists (``u v`` per line, ``#`` comments) are accepted for small
graphs handed to the solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .formula import QbfInstance, parse_qbf
from .gadgets import OnlineInstance, build_online_instance
from .graph import Kind, LabeledGraph, VertexRole
from .offline import OfflineReduction, Problem, reduce_3sat

FORMAT = "ovsg-instance/1"


class InstanceFormatError(ValueError):
    pass


@dataclass
class InstanceFile:
    graph: LabeledGraph
    problem: Optional[Problem]
    k: Optional[int]
    formula: Optional[QbfInstance] = None
    offline: bool = False


def graph_to_dict(g: LabeledGraph) -> dict:
    edges = []
    for u, v in g.edges():
        e = [str(u), str(v)]
        if frozenset((u, v)) in g.connecting:
            e.append(True)
        edges.append(e)
    return {
        "vertices": [{"name": str(v), "role": g.role(v).to_dict()} for v in g],
        "edges": edges,
    }


def graph_from_dict(data: dict) -> LabeledGraph:
    g = LabeledGraph()
    try:
        for item in data["vertices"]:
            if isinstance(item, str):
                g.add_vertex(item)
            else:
                g.add_vertex(item["name"], VertexRole.from_dict(item.get("role", {})))
        for e in data["edges"]:
            g.add_edge(e[0], e[1], connecting=len(e) > 2 and bool(e[2]))
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise InstanceFormatError(f"bad graph data: {exc}") from exc
    return g


def dumps_instance(obj, problem=None, k=None) -> str:
    """Serialize an OnlineInstance, an OfflineReduction or a bare graph."""
    if isinstance(obj, OnlineInstance):
        doc = {"problem": obj.problem.value, "k": obj.k, "offline": False,
               "formula": obj.formula.to_qdimacs(), **graph_to_dict(obj.graph)}
    elif isinstance(obj, OfflineReduction):
        doc = {"problem": obj.problem.value, "k": obj.k, "offline": True,
               "formula": obj.source.to_qdimacs(), **graph_to_dict(obj.graph)}
    else:
        doc = {"problem": Problem.parse(problem).value if problem else None, "k": k,
               "offline": False, "formula": None, **graph_to_dict(obj)}
    return json.dumps({"format": FORMAT, **doc}, indent=1) + "\n"


def _parse_edge_list(text: str) -> InstanceFile:
    g = LabeledGraph()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            if parts[0] not in g:
                g.add_vertex(parts[0])
            continue
        if len(parts) != 2:
            raise InstanceFormatError(f"line {lineno}: expected 'u v'")
        for v in parts:
            if v not in g:
                g.add_vertex(v)
        if not g.has_edge(*parts):
            try:
                g.add_edge(*parts)
            except ValueError as exc:
                raise InstanceFormatError(f"line {lineno}: {exc}") from exc
    return InstanceFile(g, None, None)


def loads_instance(text: str) -> InstanceFile:
    stripped = text.lstrip()
    if not stripped.startswith("{"):
        return _parse_edge_list(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise InstanceFormatError(f"unsupported format tag {doc.get('format')!r}")
    g = graph_from_dict(doc)
    problem = Problem.parse(doc["problem"]) if doc.get("problem") else None
    formula = parse_qbf(doc["formula"]) if doc.get("formula") else None
    return InstanceFile(g, problem, doc.get("k"), formula, bool(doc.get("offline")))


def graph_differences(expected: LabeledGraph, actual: LabeledGraph, limit: int = 20) -> list[str]:
    """Human-readable differences, used to pinpoint corrupted instance files."""
    out = []
    ev, av = set(map(str, expected)), set(map(str, actual))
    out += [f"missing vertex {v}" for v in sorted(ev - av)]
    out += [f"unexpected vertex {v}" for v in sorted(av - ev)]
    ee = {frozenset(map(str, e)) for e in expected.edges()}
    ae = {frozenset(map(str, e)) for e in actual.edges()}
    out += ["missing edge " + "-".join(sorted(e)) for e in sorted(ee - ae, key=sorted)]
    out += ["unexpected edge " + "-".join(sorted(e)) for e in sorted(ae - ee, key=sorted)]
    for v in sorted(ev & av):
        if expected.role(v) != actual.role(v):
            out.append(f"role of {v} differs")
    return out[:limit]


def rebuild(inst: InstanceFile):
    """Recreate the reduction an instance file claims to be and check it matches.

    Returns an OnlineInstance (or OfflineReduction for offline files); raises
    InstanceFormatError listing the differences otherwise.
    """
    if inst.formula is None or inst.problem is None:
        raise InstanceFormatError("instance carries no formula to rebuild from")
    built = reduce_3sat(inst.problem, inst.formula) if inst.offline else \
        build_online_instance(inst.formula, inst.problem)
    diffs = graph_differences(built.graph, inst.graph)
    if inst.k is not None and inst.k != built.k:
        diffs.insert(0, f"budget k={inst.k} but the construction gives k={built.k}")
    if diffs:
        raise InstanceFormatError("instance does not match its formula: " + "; ".join(diffs))
    return built


# DOT ---------------------------------------------------------------------------------

_SHAPES = {
    Kind.LITERAL: "circle",
    Kind.CLAUSE_MEMBER: "box",
    Kind.VARIABLE_AUX: "diamond",
}


def to_dot(g: LabeledGraph, name: str = "G") -> str:
    """Graphviz rendering; gadget connecting edges are dashed."""
    lines = [f'graph "{name}" {{', "  node [fontsize=10];"]
    for v in g:
        role = g.role(v)
        shape = _SHAPES.get(role.kind, "point" if "leaf" in role.kind.value else "ellipse")
        lines.append(f'  "{v}" [shape={shape}, tooltip="{role.kind.value}"];')
    for u, v in g.edges():
        style = " [style=dashed]" if frozenset((u, v)) in g.connecting else ""
        lines.append(f'  "{u}" -- "{v}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
