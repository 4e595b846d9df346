import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from ovsg.corpus import FALSE_WITNESS, RUNNING
from ovsg.formula import QbfInstance
from ovsg.graph import LabeledGraph, complete_graph, cycle_graph, from_networkx, path_graph, star_graph
from ovsg.offline import Problem, solve_offline_exact
from ovsg.solver import (SolverCapError, enumerate_policies_bruteforce, minimal_winning_k,
                         solve_game_exact, value_of_reduction, verify_certificate)


@pytest.mark.parametrize("g,p,k,wins", [
    (complete_graph(2), "vc", 1, True),
    (complete_graph(2), "vc", 0, False),
    (path_graph(3), "vc", 1, True),
    (star_graph(3), "ds", 1, True),
    (cycle_graph(4), "vc", 2, True),   # pinned once both solvers agreed on it
    (cycle_graph(4), "vc", 1, False),
    (path_graph(5), "vc", 2, False),   # offline optimum 2, but online the middle is ambiguous
    (path_graph(5), "ds", 2, True),
])
def test_examples(g, p, k, wins):
    a = solve_game_exact(g, p, k)
    b = enumerate_policies_bruteforce(g, p, k)
    assert a.algorithm_wins == b.algorithm_wins == wins
    assert verify_certificate(g, p, k, a)


def test_p3_policy_accepts_the_centre():
    value = solve_game_exact(path_graph(3), "vc", 1)
    assert value.algorithm_wins
    # a degree-2 first reveal is the centre; the winning decision there is "in"
    chosen = {key: d for key, d in value.policy.items() if len(key[1]) == 0}
    assert chosen[((0,), (), (1, 1))] is True
    assert chosen[((0,), (), (1,))] is False


def test_k_equals_n_always_wins_for_vc():
    for h in nx.graph_atlas_g()[1:30]:
        g = from_networkx(h)
        assert enumerate_policies_bruteforce(g, "vc", len(g)).algorithm_wins


def test_caps():
    with pytest.raises(SolverCapError):
        solve_game_exact(complete_graph(13), "vc", 12)
    with pytest.raises(SolverCapError):
        enumerate_policies_bruteforce(complete_graph(8), "vc", 7)


def test_minimal_winning_k():
    assert minimal_winning_k(cycle_graph(4), "vc") == 2
    assert minimal_winning_k(path_graph(5), "vc") == 3
    assert minimal_winning_k(path_graph(5), "is") == 2
    assert minimal_winning_k(star_graph(3), "ds") == 1


def test_lru_memo_cap_does_not_change_values():
    g = cycle_graph(6)
    for k in range(7):
        assert solve_game_exact(g, "vc", k, memo_cap=5).algorithm_wins == solve_game_exact(g, "vc", k).algorithm_wins


def test_adversary_certificate_replays():
    g = path_graph(5)
    value = solve_game_exact(g, "vc", 2)
    assert not value.algorithm_wins and value.refutation
    assert verify_certificate(g, "vc", 2, value)
    # tampering with the refutation breaks it
    broken = type(value)(value.winner, value.k, value.problem, refutation={}, root=value.root)
    assert not verify_certificate(g, "vc", 2, broken)


def test_value_of_reduction_tiers():
    v = value_of_reduction(RUNNING, "vc")
    assert v.tier == "strategy-play" and v.consistent and v.game
    v = value_of_reduction(FALSE_WITNESS, "ds")
    assert v.tier == "strategy-play" and v.consistent and not v.game
    # toy map: a 2-vertex "formula graph" where the algorithm wins exactly as the formula is true
    toy = value_of_reduction(QbfInstance.build("AE", [(1, -1, 2)]), "vc", graph=complete_graph(2), k=1)
    assert toy.tier == "exact" and toy.consistent


graphs = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n)
    .map(lambda es: (n, es)))


def make(spec):
    n, es = spec
    g = LabeledGraph(range(n))
    for u, v in es:
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v)
    return g


@settings(max_examples=40)
@given(graphs, st.sampled_from(list(Problem)))
def test_monotone_and_relaxation_bound(spec, p):
    g = make(spec)
    wins = [solve_game_exact(g, p, k).algorithm_wins for k in range(len(g) + 1)]
    if p.minimize:
        assert all(not a or b for a, b in zip(wins, wins[1:]))
    else:
        assert all(not b or a for a, b in zip(wins, wins[1:]))
    opt = solve_offline_exact(p, g, witness=False).size
    for k, w in enumerate(wins):
        if w:
            assert opt <= k if p.minimize else opt >= k


@settings(max_examples=40)
@given(graphs, st.sampled_from(list(Problem)), st.integers(0, 6))
def test_solvers_agree_and_certificates_replay(spec, p, k):
    g = make(spec)
    k = min(k, len(g))
    a = solve_game_exact(g, p, k)
    assert a.algorithm_wins == enumerate_policies_bruteforce(g, p, k).algorithm_wins
    assert verify_certificate(g, p, k, a)
