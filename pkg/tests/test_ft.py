import numpy as np
import pytest
from hypothesis import given, settings

from freeterm.automaton import Query, Semiautomaton, build_graph
from freeterm.errors import InvalidAutomaton, SizeCapExceeded
from freeterm.ft import all_ft_states, classify_figure1_category, ft_oracle, ft_report, is_ft_state, verify_witnesses
from freeterm.models import gen_fig1

from conftest import automata, fig2, fixtures, random_automaton, random_strongly_connected


def _names(a, verdict):
    return sorted(a.state_name(s) for s in verdict.ft_states)


@pytest.mark.parametrize("variant,ft,category", [
    ("a", ["accept"], 1),
    ("b", ["top-left", "top-right"], 2),
    ("c", [], 3),
    ("d", ["top"], 4),
])
def test_fig1_variants(backend, variant, ft, category):
    a, q = gen_fig1(variant)
    g = build_graph(a)
    v = all_ft_states(g, q)
    assert _names(a, v) == sorted(ft)
    assert classify_figure1_category(g, q, v) == category
    assert verify_witnesses(g, q, v)


def test_fig2_ft_states(backend):
    a, q = fig2()
    v = all_ft_states(build_graph(a), q)
    assert _names(a, v) == ["{a,b,c}", "{a,b}", "{a,c}", "{a}"]


def test_fig2_identity_query_only_top_is_ft():
    a, q = fixtures()["fig2_identity"]
    v = all_ft_states(build_graph(a), q)
    assert _names(a, v) == ["{a,b,c}"]


def test_r_and_not_s_example():
    a, q = fixtures()["rc_not_sc"]
    g = build_graph(a)
    v = all_ft_states(g, q)
    # Once S(c) is present the value is false forever; otherwise it is not settled.
    assert all(("S(c)" in a.state_name(s)) == ok for s, ok in enumerate(v.per_state))


def test_is_ft_state_and_witness():
    a, q = gen_fig1("a")
    g = build_graph(a)
    assert is_ft_state(g, q, 1) == (True, None)
    ok, w = is_ft_state(g, q, 0)
    assert not ok and w == 1
    with pytest.raises(InvalidAutomaton):
        is_ft_state(g, q, 5)


def test_constant_query_everything_ft(backend):
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, _ = random_automaton(rng, int(rng.integers(1, 30)), 2)
        v = all_ft_states(build_graph(a), Query.constant(a))
        assert all(v.per_state)
        assert classify_figure1_category(build_graph(a), Query.constant(a), v) == 1


def test_strongly_connected_nonconstant_has_no_ft(backend):
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, q = random_strongly_connected(rng, int(rng.integers(2, 30)), 2)
        v = all_ft_states(build_graph(a), q)
        assert not any(v.per_state)


def test_oracle_equivalence_500_random(backend):
    rng = np.random.default_rng(2024)
    for _ in range(500):
        n = int(rng.integers(1, 60))
        a, q = random_automaton(rng, n, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        g = build_graph(a)
        fast = all_ft_states(g, q)
        assert fast.per_state == ft_oracle(g, q).per_state
        assert verify_witnesses(g, q, fast)


@settings(max_examples=200, deadline=None)
@given(automata(max_states=14))
def test_ft_closed_under_reachability(pair):
    a, q = pair
    g = build_graph(a)
    v = all_ft_states(g, q)
    assert v.per_state == ft_oracle(g, q).per_state
    for s in v.ft_states:
        reached = np.flatnonzero(g.depths([s]) >= 0)
        assert all(v.per_state[t] for t in reached)
        assert {q.values[t] for t in reached} == {q.values[s]}


@settings(max_examples=100, deadline=None)
@given(automata(max_states=12))
def test_ft_is_sccwise_uniform(pair):
    a, q = pair
    g = build_graph(a)
    v = all_ft_states(g, q)
    for s in range(a.num_states):
        for t in g.scc_members(g.scc_id[s]):
            assert v.per_state[s] == v.per_state[t]


def test_oracle_cap():
    a = Semiautomaton(np.zeros((10, 1), dtype=int), check_reachable=False)
    with pytest.raises(SizeCapExceeded):
        ft_oracle(build_graph(a), Query.constant(a), cap=5)


def test_category_4_needs_unreachable_ft():
    # 0 -> 1 (a loop with two values) and 0 -> 2 (a sink)
    a = Semiautomaton([[1, 2], [3, 1], [2, 2], [1, 3]], check_reachable=False)
    q = Query([0, 0, 1, 1])
    g = build_graph(a)
    assert classify_figure1_category(g, q) == 4


def test_report_uses_names():
    a, q = gen_fig1("b")
    rep = ft_report(build_graph(a), q)
    assert rep["category"] == 2
    assert set(rep["ft_states"]) == {"top-left", "top-right"}
    assert all(isinstance(k, str) for k in rep["witnesses"])


def test_large_chain_linear_time(backend):
    n = 100_000
    delta = np.stack([np.minimum(np.arange(n) + 1, n - 1), np.arange(n)], axis=1)
    a = Semiautomaton(delta, check_reachable=False)
    values = [0] * (n - 1) + [1]
    v = all_ft_states(build_graph(a), Query(values))
    assert v.ft_states == [n - 1]
    assert v.witness[0] == n - 1
