import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from ovsg.game import GameError, GameState, Outcome, Transcript, early_loss, replay
from ovsg.graph import LabeledGraph, complete_graph, from_networkx, path_graph, star_graph
from ovsg.offline import feasible


def test_reveal_k2():
    s = GameState(complete_graph(2), "vc", 1)
    rev = s.reveal(0)
    assert len(rev.closed) == 2 and len(rev.edges) == 1


def test_reveal_p3_accumulates():
    g = path_graph(3)  # a=0, b=1, c=2
    s = GameState(g, "vc", 1, seed=4)
    r0 = s.reveal(0)
    s.decide(False)
    r1 = s.reveal(1)
    assert r1.vertex == r0.neighbors[0]  # persistent session id
    assert r0.vertex in r1.neighbors and len(r1.neighbors) == 2
    assert len(r1.edges) == 2
    assert s.view().exposed == {s.sid[2]}


def test_reveal_p3_center():
    s = GameState(path_graph(3), "vc", 1)
    rev = s.reveal(1)
    assert len(rev.closed) == 3 and len(rev.edges) == 2


def test_decision_rules():
    s = GameState(complete_graph(2), "vc", 1)
    with pytest.raises(GameError):
        s.decide(True)
    s.reveal(0)
    with pytest.raises(GameError):
        s.reveal(1)
    s.decide(True)
    assert s.solution() == {0}
    with pytest.raises(GameError):
        s.decide(False)
    with pytest.raises(GameError):
        s.reveal(0)
    with pytest.raises(GameError):
        s.outcome()
    s.reveal(1)
    s.decide(False)
    assert s.solution() == {0}
    assert s.outcome() is Outcome.ALGORITHM


def test_feasible_examples():
    k2 = complete_graph(2)
    assert feasible("vc", k2, {0})
    assert not feasible("is", k2, {0, 1})
    assert feasible("ds", star_graph(4), {0})


def test_outcome_examples():
    k2 = complete_graph(2)
    for first in (0, 1):
        s = GameState(k2, "vc", 0)
        for v in (first, 1 - first):
            s.reveal(v)
            s.decide(v == 0)
        assert s.outcome() is Outcome.ADVERSARY
    s = GameState(k2, "is", 1)
    s.reveal(0)
    s.decide(True)
    s.reveal(1)
    s.decide(False)
    assert s.outcome() is Outcome.ALGORITHM


def test_every_k2_play_loses_with_k0():
    for order in itertools.permutations([0, 1]):
        for decisions in itertools.product((True, False), repeat=2):
            s = GameState(complete_graph(2), "vc", 0)
            for v, d in zip(order, decisions):
                s.reveal(v)
                s.decide(d)
            assert s.outcome() is Outcome.ADVERSARY


def test_view_hides_vertex_names():
    g = LabeledGraph(["secret-a", "secret-b"], [("secret-a", "secret-b")])
    s = GameState(g, "vc", 1, seed=1)
    rev = s.reveal("secret-a")
    view = s.view()
    assert all(isinstance(x, int) for x in view.order + list(rev.neighbors))
    with pytest.raises(GameError):
        view.degree(rev.neighbors[0])


def test_session_ids_depend_on_seed_only():
    g = star_graph(5)
    ids = set()
    for seed in range(8):
        s = GameState(g, "vc", 1, seed=seed)
        s.reveal(0)
        ids.add(tuple(s.sid[v] for v in range(6)))
    assert len(ids) > 1
    a, b = GameState(g, "vc", 1, seed=3), GameState(g, "vc", 1, seed=3)
    a.reveal(0)
    b.reveal(0)
    assert a.sid == b.sid


def test_all_reveals_disclose_everything():
    rng = random.Random(5)
    for trial in range(20):
        g = from_networkx(nx.gnp_random_graph(rng.randint(1, 12), 0.3, seed=trial))
        order = list(g)
        rng.shuffle(order)
        s = GameState(g, "ds", len(g))
        for v in order:
            s.reveal(v)
            s.decide(True)
        assert s.revealed_edges == {frozenset(e) for e in g.edges()}
        assert not s.exposed


def test_transcript_round_trip_and_replay():
    g = from_networkx(nx.cycle_graph(6))
    s = GameState(g, "vc", 3, seed=9)
    for v in (0, 3, 1, 4, 2, 5):
        s.reveal(v)
        s.decide(v % 2 == 0)
    t = s.transcript()
    text = t.to_jsonl()
    back = Transcript.from_jsonl(text)
    assert back.to_jsonl() == text
    again = replay(back, g)
    assert again.outcome() is s.outcome()
    assert again.solution() == s.solution()
    assert again.log == s.log


def test_early_stop_flag():
    s = GameState(path_graph(3), "vc", 1, early_stop=True)
    s.reveal(0)
    s.decide(False)
    s.reveal(1)
    s.decide(False)
    assert s.finished and s.outcome() is Outcome.ADVERSARY


small = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n),
                        st.permutations(list(range(n))), st.lists(st.booleans(), min_size=n, max_size=n),
                        st.integers(0, n), st.sampled_from(["vc", "is", "ds"])))


@given(small)
def test_early_loss_is_sound(case):
    n, es, order, decisions, k, p = case
    g = LabeledGraph(range(n))
    for u, v in es:
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v)
    s = GameState(g, p, k)
    for t, (v, d) in enumerate(zip(order, decisions)):
        s.reveal(v)
        s.decide(d)
        if early_loss(s):
            # no completion of the remaining decisions can win
            rest = order[t + 1:]
            for tail in itertools.product((True, False), repeat=len(rest)):
                c = s.clone()
                for w, e in zip(rest, tail):
                    c.reveal(w)
                    c.decide(e)
                assert c.outcome() is Outcome.ADVERSARY
            break
