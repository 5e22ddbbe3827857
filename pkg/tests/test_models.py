import pytest

from freeterm.algebra import is_acyclic, is_commutative_update, is_join_semilattice, natural_order
from freeterm.automaton import apply_sequence, build_graph
from freeterm.errors import PreconditionError, SizeCapExceeded
from freeterm.ft import all_ft_states
from freeterm.models import (
    ModelSpec,
    gen_cyclic_group,
    gen_g_counter,
    gen_grow_only_set,
    gen_modular_counter,
    gen_pn_counter,
    gen_powerset_union,
    gen_string_count,
    gen_tc_fixpoint,
    gen_two_phase_set,
    tc_rounds,
)


def ft_names(a, q):
    return sorted(a.state_name(s) for s in all_ft_states(build_graph(a), q).ft_states)


def test_powerset_shape():
    a, q = gen_powerset_union(["x", "y", "z"])
    assert a.num_states == 8 and a.labels == ("x", "y", "z")
    g = build_graph(a)
    assert is_acyclic(g)
    assert is_join_semilattice(natural_order(g))[0]
    assert q.values[apply_sequence(a, 0, ["z", "x"])] == ("x", "z")
    assert ft_names(a, q) == ["{x,y,z}"]


def test_grow_only_set_merge_labels():
    a, q = gen_grow_only_set(["a", "b"])
    assert a.num_labels == 2 + 4
    assert is_commutative_update(a)
    s = apply_sequence(a, 0, ["merge{a,b}"])
    assert a.state_name(s) == "{a,b}"
    plain, _ = gen_grow_only_set(["a", "b"], with_merge=False)
    assert plain.num_labels == 2


def test_two_phase_set():
    a, q = gen_two_phase_set(["a"], query=lambda i, d: "a" in i - d)
    assert a.num_states == 4
    assert ft_names(a, q) == ["I={a} D={a}", "I={} D={a}"]
    s = apply_sequence(a, 0, ["insert(a)"])
    assert q.values[s] is True
    assert q.values[apply_sequence(a, s, ["delete(a)"])] is False
    a2, q2 = gen_two_phase_set(["a", "b"])
    assert a2.num_states == 16
    assert q2.values[apply_sequence(a2, 0, ["insert(a)", "insert(b)", "delete(b)"])] == ("a",)


def test_g_counter():
    a, q = gen_g_counter(2, 3)
    assert a.num_states == 16
    assert q.values[apply_sequence(a, 0, ["inc(0)", "inc(1)", "inc(1)"])] == 3
    assert ft_names(a, q) == ["(3,3)"]
    s = apply_sequence(a, 0, ["inc(0)"] * 5)
    assert a.state_name(s) == "(3,0)"
    t = apply_sequence(a, apply_sequence(a, 0, ["inc(1)"]), ["merge(2,0)"])
    assert a.state_name(t) == "(2,1)"


def test_g_counter_threshold_ft_is_true_region():
    a, q = gen_g_counter(2, 3, threshold=4)
    ft = all_ft_states(build_graph(a), q)
    assert all(ft.per_state[s] == q.values[s] for s in range(a.num_states))


def test_pn_counter_one_replica():
    a, q = gen_pn_counter(1, 1)
    assert a.num_states == 4
    assert list(q.values) == [0, 1, -1, 0]
    assert ft_names(a, q) == ["P=(1) N=(1)"]
    assert a.labels == ("inc(0)", "dec(0)")


def test_tc_rounds_and_queries():
    rounds = tc_rounds([(1, 2), (2, 3), (3, 4)])
    assert len(rounds) == 3
    assert (1, 4) in rounds[-1] and (1, 4) not in rounds[1]
    a, q = gen_tc_fixpoint([(1, 2), (2, 3), (3, 4)], 1, 3)
    assert list(q.values) == [False, True, True]
    assert ft_names(a, q) == ["round1", "round2"]
    c, cq = gen_tc_fixpoint([(1, 2), (2, 3), (3, 1)], cycle=True)
    assert list(cq.values) == [False, False, True]
    with pytest.raises(PreconditionError):
        gen_tc_fixpoint([(1, 2)])


def test_counters_and_groups_are_invertible():
    for a, q in [gen_modular_counter(6), gen_modular_counter(4, decrement=True), gen_cyclic_group(5)]:
        g = build_graph(a)
        assert g.num_sccs == 1
        assert ft_names(a, q) == []


def test_string_count():
    a, q = gen_string_count(max_len=2)
    assert q.values[apply_sequence(a, 0, ["a", "b", "a"])] == 2
    assert q.values[apply_sequence(a, 0, ["b", "a", "a", "a"])] == 3
    assert not is_commutative_update(a)


def test_size_caps():
    with pytest.raises(SizeCapExceeded):
        gen_powerset_union(range(21))
    with pytest.raises(SizeCapExceeded):
        gen_two_phase_set(range(11))
    with pytest.raises(SizeCapExceeded):
        gen_tc_fixpoint([(i, i + 1) for i in range(9)], 0, 1)
    with pytest.raises(SizeCapExceeded) as err:
        ModelSpec("g_counter", {"replicas": 7, "cap": 9}).generate()
    assert err.value.estimate == 10**7


def test_model_spec():
    assert ModelSpec("two_phase_set", {"universe": ["a", "b"]}).estimate_states() == 16
    assert ModelSpec("tc_fixpoint", {"edges": [(1, 2), (2, 3)]}).estimate_states() == 10
    a, _ = ModelSpec("fig1b").generate()
    assert a.meta["variant"] == "b"
    with pytest.raises(PreconditionError):
        ModelSpec("nope")


def test_duplicate_universe_rejected():
    with pytest.raises(PreconditionError):
        gen_powerset_union(["a", "a"])
