import pytest

from ovsg.corpus import DS_FIGURE, FALSE_WITNESS, RUNNING, sample_formulas
from ovsg.degrees import audit_degrees, degree_table, row_lookup
from ovsg.gadgets import build_online_instance, dr_center_degree
from ovsg.graph import Kind, Strategy
from ovsg.offline import Problem


def test_running_vc_audit():
    inst = build_online_instance(RUNNING, "vc")
    audit = audit_degrees(inst)
    assert audit.ok and audit.checked == 160
    assert dr_center_degree(Problem.VC, 2) == 17
    assert len(inst.graph.neighbors("D1")) == 17
    shared = audit.shared_degrees()
    assert shared[7] == {"literal:+1", "literal:-1"}


def test_ds_figure_audit():
    inst = build_online_instance(DS_FIGURE, "ds")
    assert audit_degrees(inst).ok
    g = inst.graph
    centers = [v for v in g if g.role(v).kind in (Kind.FAKE_MEMBER, Kind.DR_CENTER)]
    assert centers and all(len(g.neighbors(v)) == 5 for v in centers)


def test_corrupted_instance_flags_both_endpoints():
    inst = build_online_instance(RUNNING, "vc")
    inst.graph.remove_edge("L+1", "L-1")
    audit = audit_degrees(inst)
    assert sorted(v for v, _, _ in audit.mismatches) == ["L+1", "L-1"]
    assert all(want - got == 1 for _, want, got in audit.mismatches)


@pytest.mark.parametrize("p", ["vc", "is", "ds"])
def test_sampled_audits(p):
    for q in sample_formulas(count=40, seed=7):
        assert audit_degrees(build_online_instance(q, p)).ok


def test_tables_have_unique_degrees():
    for q in (RUNNING, FALSE_WITNESS, DS_FIGURE):
        for p in Problem:
            lookup = row_lookup(p, q)
            assert len(lookup) == len(degree_table(p, q))


def test_is_fixed_rows_are_flipped():
    vc = {r.label: r.strategy for r in degree_table("vc", RUNNING) if r.strategy is not Strategy.DEPENDS}
    is_ = {r.label: r.strategy for r in degree_table("is", RUNNING) if r.strategy is not Strategy.DEPENDS}
    assert vc.keys() == is_.keys()
    assert all(vc[k] is not is_[k] for k in vc)
