import sys
import numpy as np
import pytest
from hypothesis import strategies as st

import freeterm.automaton
import freeterm.ft
from freeterm import _pykernels
from freeterm._backend import compiled_kernels
from freeterm.automaton import Query, Semiautomaton
from freeterm.models import (
    gen_cyclic_group,
    gen_fig1,
    gen_g_counter,
    gen_grow_only_set,
    gen_modular_counter,
    gen_pn_counter,
    gen_powerset_union,
    gen_string_count,
    gen_tc_fixpoint,
    gen_two_phase_set,
)

BACKENDS = ["python"] + (["cython"] if compiled_kernels() is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = _pykernels if request.param == "python" else compiled_kernels()
    monkeypatch.setattr(freeterm.automaton, "kernels", mod)
    monkeypatch.setattr(freeterm.ft, "kernels", mod)
    return request.param


def fig2():
    return gen_powerset_union(["a", "b", "c"], query=lambda s: "a" in s)


def fixtures():
    """Named (automaton, query) pairs used across the suite."""
    out = {f"fig1{v}": gen_fig1(v) for v in "abcd"}
    out["fig2"] = fig2()
    out["fig2_identity"] = gen_powerset_union(["a", "b", "c"])
    out["rc_not_sc"] = gen_powerset_union(["R(a)", "R(c)", "S(c)"], query=lambda s: "R(c)" in s and "S(c)" not in s)
    out["z6"] = gen_modular_counter(6)
    out["z5_group"] = gen_cyclic_group(5)
    out["strings"] = gen_string_count()
    out["gset"] = gen_grow_only_set(["a", "b", "c"], query=lambda s: len(s) >= 2)
    out["gset_nomerge"] = gen_grow_only_set(["a", "b"], with_merge=False)
    out["twophase_a"] = gen_two_phase_set(["a"], query=lambda i, d: "a" in i - d)
    out["twophase_ab"] = gen_two_phase_set(["a", "b"])
    out["gcounter"] = gen_g_counter(2, 3, threshold=4)
    out["gcounter_sum"] = gen_g_counter(2, 3)
    out["pncounter"] = gen_pn_counter(1, 1)
    out["pncounter2"] = gen_pn_counter(2, 1)
    out["tc_path"] = gen_tc_fixpoint([(1, 2), (2, 3), (3, 4)], 1, 3)
    out["tc_cycle"] = gen_tc_fixpoint([(1, 2), (2, 3), (3, 1)], cycle=True)
    out["single"] = (Semiautomaton([[0]], ["a"], start=0), Query([True]))
    return out


def random_automaton(rng, n, nl, nvalues=2, start=None):
    delta = rng.integers(0, n, size=(n, nl))
    values = rng.integers(0, nvalues, size=n).tolist()
    return Semiautomaton(delta, start=start, check_reachable=False), Query(values)


def random_acyclic(rng, n, nl, nvalues=2):
    """Every transition goes to the same or a higher-numbered state."""
    delta = np.array([[rng.integers(s, n) for _ in range(nl)] for s in range(n)])
    values = rng.integers(0, nvalues, size=n).tolist()
    return Semiautomaton(delta, check_reachable=False), Query(values)


def random_strongly_connected(rng, n, nl, nvalues=2):
    """A cyclic successor label plus random labels."""
    cols = [(np.arange(n) + 1) % n] + [rng.integers(0, n, size=n) for _ in range(nl - 1)]
    delta = np.stack(cols, axis=1)
    values = rng.integers(0, nvalues, size=n).tolist()
    if n > 1 and len(set(values)) == 1:
        values[0] = 1 - values[0] if nvalues == 2 else (values[0] + 1) % nvalues
    return Semiautomaton(delta, start=0, check_reachable=False), Query(values)


@st.composite
def automata(draw, max_states=12, max_labels=3, max_values=3):
    n = draw(st.integers(1, max_states))
    nl = draw(st.integers(1, max_labels))
    delta = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=nl, max_size=nl), min_size=n, max_size=n))
    values = draw(st.lists(st.integers(0, max_values - 1), min_size=n, max_size=n))
    return Semiautomaton(delta, check_reachable=False), Query(values)


@st.composite
def acyclic_automata(draw, max_states=10, max_labels=3):
    n = draw(st.integers(1, max_states))
    nl = draw(st.integers(1, max_labels))
    delta = [[draw(st.integers(s, n - 1)) for _ in range(nl)] for s in range(n)]
    values = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return Semiautomaton(delta, check_reachable=False), Query(values)


def reach_oracle(automaton, s):
    """Plain DFS closure, independent of the graph machinery."""
    seen, todo = {s}, [s]
    while todo:
        v = todo.pop()
        for t in automaton.delta[v].tolist():
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n][2])
