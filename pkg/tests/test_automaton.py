import numpy as np
import pytest
from hypothesis import given, settings

from freeterm.automaton import Query, Semiautomaton, apply_sequence, build_graph, reach_set, reaches
from freeterm.errors import InvalidAutomaton, InvalidQuery
from freeterm.models import gen_fig1

from conftest import automata, fig2, reach_oracle


def test_fig1a_graph():
    a, _ = gen_fig1("a")
    g = build_graph(a)
    assert g.num_edges == 6
    assert g.num_sccs == 2


def test_single_state_graph():
    g = build_graph(Semiautomaton([[0]]))
    assert g.num_edges == 1 and g.num_sccs == 1
    assert g.edges(0) == [(0, 0)]


def test_fig1c_one_scc():
    a, _ = gen_fig1("c")
    g = build_graph(a)
    assert g.num_edges == 6
    assert g.num_sccs == 1
    assert len(g.scc_members(0)) == 2


def test_reach_set_examples():
    a, _ = gen_fig1("a")
    g = build_graph(a)
    assert reach_set(g, 0) == {0, 1}
    for s in range(a.num_states):
        assert reach_set(g, s, 0) == {s}


def test_reach_set_fig2():
    a, _ = fig2()
    g = build_graph(a)
    b = a.state_id("{b}")
    got = {a.state_name(s) for s in reach_set(g, b)}
    assert got == {"{b}", "{a,b}", "{b,c}", "{a,b,c}"}


def test_reaches_examples():
    a, _ = gen_fig1("a")
    g = build_graph(a)
    assert not reaches(g, 1, 0)
    assert all(reaches(g, s, s) for s in range(2))
    a2, _ = fig2()
    g2 = build_graph(a2)
    assert not reaches(g2, a2.state_id("{a}"), a2.state_id("{b,c}"))


def test_apply_sequence():
    a, _ = gen_fig1("a")
    assert apply_sequence(a, 0, ["b", "a"]) == 1
    assert apply_sequence(a, 0, []) == 0
    c, _ = gen_fig1("c")
    assert apply_sequence(c, 0, ["b", "b"]) == 0
    assert apply_sequence(c, 0, ["b"]) == 1


def test_invalid_inputs_rejected():
    a, _ = gen_fig1("a")
    g = build_graph(a)
    with pytest.raises(InvalidAutomaton):
        reach_set(g, 7)
    with pytest.raises(InvalidAutomaton):
        reaches(g, 0, -1)
    with pytest.raises(InvalidAutomaton):
        apply_sequence(a, 0, ["z"])
    with pytest.raises(InvalidAutomaton):
        Semiautomaton([[0, 2], [1, 1]])
    with pytest.raises(InvalidAutomaton):
        Semiautomaton([[0], [0]], labels=["a", "b"])
    with pytest.raises(InvalidAutomaton):
        Semiautomaton([[0]], start=3)


def test_query_validation():
    a, _ = gen_fig1("a")
    with pytest.raises(InvalidQuery):
        Query([True]).check_against(a)
    with pytest.raises(InvalidQuery):
        Query([])
    with pytest.raises(InvalidQuery):
        Query([1, 2], order=[(1, 2), (2, 1)])


def test_unreachable_states_warn(caplog):
    with caplog.at_level("WARNING"):
        Semiautomaton([[0], [1]], start=0)
    assert "not reachable" in caplog.text


def test_delta_is_read_only():
    a, _ = gen_fig1("a")
    with pytest.raises(ValueError):
        a.delta[0, 0] = 1


@settings(max_examples=150, deadline=None)
@given(automata(max_states=16))
def test_reach_properties(pair):
    a, _ = pair
    g = build_graph(a)
    n = a.num_states
    assert g.num_edges == n * a.num_labels
    for s in range(n):
        prev = frozenset()
        for k in range(n + 1):
            cur = reach_set(g, s, k)
            assert s in cur and prev <= cur
            prev = cur
        assert reach_set(g, s, n) == reach_set(g, s) == reach_oracle(a, s)


@settings(max_examples=60, deadline=None)
@given(automata(max_states=10))
def test_reaches_transitive_and_scc_consistent(pair):
    a, _ = pair
    g = build_graph(a)
    n = a.num_states
    r = [[reaches(g, s, t) for t in range(n)] for s in range(n)]
    for s in range(n):
        for t in range(n):
            assert (g.scc_id[s] == g.scc_id[t]) == (r[s][t] and r[t][s])
            if r[s][t]:
                assert all(r[s][u] for u in range(n) if r[t][u])


def test_condensation_is_reverse_topological():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        a = Semiautomaton(rng.integers(0, n, size=(n, 2)), check_reachable=False)
        g = build_graph(a)
        for c in range(g.num_sccs):
            assert all(d < c for d in g.scc_successors(c))
