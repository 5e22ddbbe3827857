"""Generators for concrete systems as finite semiautomata with queries.

Infinite state spaces (counters, unbounded universes) are truncated:
counters saturate at ``cap`` and sets range over an explicit finite
universe. Saturation keeps the update total and preserves acyclicity.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .automaton import Query, Semiautomaton
from .errors import PreconditionError, SizeCapExceeded
from .order import BOOL_ORDER

MAX_STATES = 10**6
MAX_EDGES = 10**7
MAX_UNIVERSE = 20
MAX_TWO_PHASE_UNIVERSE = 10
MAX_TC_VERTICES = 8


def _check_size(states: int, labels: int, what: str) -> None:
    if states > MAX_STATES:
        raise SizeCapExceeded(f"{what}: {states} states exceeds the cap of {MAX_STATES}", estimate=states)
    if states * labels > MAX_EDGES:
        raise SizeCapExceeded(
            f"{what}: {states} states x {labels} labels = {states * labels} edges exceeds the cap of {MAX_EDGES}",
            estimate=states * labels,
        )


def _set_name(atoms) -> str:
    return "{" + ",".join(str(a) for a in atoms) + "}"


def _subset(universe: Sequence, mask: int) -> frozenset:
    return frozenset(x for i, x in enumerate(universe) if mask >> i & 1)


def _sorted_subset(universe: Sequence, mask: int) -> list:
    return [x for i, x in enumerate(universe) if mask >> i & 1]


# --- small DFAs -----------------------------------------------------------

_FIG1 = {
    # rows: a, b, c targets; accepting flags; names by position in the drawing
    "a": (
        ["start", "accept"],
        [[1, 0, 0], [1, 1, 1]],
        [False, True],
        "contains an a",
    ),
    "b": (
        ["start", "top", "left", "top-left", "right", "top-right"],
        [
            [2, 4, 0],  # start
            [3, 5, 1],  # top
            [3, 1, 2],  # left
            [3, 3, 3],  # top-left, accepting sink
            [1, 5, 4],  # right
            [5, 5, 5],  # top-right, rejecting sink
        ],
        [False, False, False, True, False, False],
        "two a's occur, before the second b if there are two b's",
    ),
    "c": (
        ["start", "accept"],
        [[0, 1, 0], [1, 0, 1]],
        [False, True],
        "odd number of b's",
    ),
    "d": (
        ["start", "left", "top-left", "right", "top-right", "top"],
        [
            [4, 1, 3],  # start: a -> top-right, b -> left, c -> right
            [1, 2, 1],  # left (accepting)
            [2, 1, 2],  # top-left
            [4, 3, 3],  # right
            [5, 4, 4],  # top-right
            [5, 5, 5],  # top (accepting sink)
        ],
        [False, True, False, False, False, True],
        "starts with b and has an odd number of b's, or does not start with b and has two a's",
    ),
}


def gen_fig1(variant: str) -> tuple[Semiautomaton, Query]:
    """One of the four 3-letter example DFAs; the query is "accepting"."""
    try:
        names, delta, accept, language = _FIG1[variant]
    except KeyError:
        raise PreconditionError(f"unknown variant {variant!r}; expected one of a, b, c, d") from None
    meta = {"kind": "fig1", "variant": variant, "construct": f"example DFA: {language}"}
    return (
        Semiautomaton(delta, ["a", "b", "c"], start=0, state_names=names, meta=meta),
        Query(accept, BOOL_ORDER),
    )


def gen_modular_counter(modulus: int, decrement: bool = False) -> tuple[Semiautomaton, Query]:
    """``Z_n`` counter with +1 (and optionally -1); query "value is 0"."""
    if modulus < 1:
        raise PreconditionError("modulus must be positive")
    labels = ["+1", "-1"] if decrement else ["+1"]
    delta = [[(s + 1) % modulus] + ([(s - 1) % modulus] if decrement else []) for s in range(modulus)]
    meta = {"kind": "modular_counter", "modulus": modulus, "construct": "invertible counter"}
    return (
        Semiautomaton(delta, labels, start=0, state_names=[str(s) for s in range(modulus)], meta=meta),
        Query([s == 0 for s in range(modulus)], BOOL_ORDER),
    )


def gen_cyclic_group(order: int) -> tuple[Semiautomaton, Query]:
    """Binary update ``U(x, y) = x + y mod n`` with labels = group elements."""
    if order < 1:
        raise PreconditionError("group order must be positive")
    delta = [[(x + y) % order for y in range(order)] for x in range(order)]
    meta = {"kind": "cyclic_group", "order": order, "construct": "group update"}
    names = [str(x) for x in range(order)]
    return (
        Semiautomaton(delta, names, start=0, state_names=names, meta=meta),
        Query([x == 0 for x in range(order)], BOOL_ORDER),
    )


def gen_string_count(alphabet: Sequence[str] = ("a", "b"), max_len: int = 3,
                     counted: str = "a", count_cap: int | None = None) -> tuple[Semiautomaton, Query]:
    """String concatenation truncated at ``max_len``; query counts ``counted``.

    Strings longer than ``max_len`` collapse to an overflow state that keeps
    only the (capped) count, so the query stays order-insensitive while the
    update does not commute.
    """
    count_cap = max_len + 1 if count_cap is None else count_cap
    strings = [""]
    for k in range(1, max_len + 1):
        strings += ["".join(p) for p in itertools.product(alphabet, repeat=k)]
    index = {w: i for i, w in enumerate(strings)}
    overflow = {c: len(strings) + c for c in range(count_cap + 1)}
    n = len(strings) + count_cap + 1
    delta = np.zeros((n, len(alphabet)), dtype=np.intp)
    values = [0] * n
    for w, i in index.items():
        values[i] = w.count(counted)
        for j, x in enumerate(alphabet):
            nw = w + x
            delta[i, j] = index[nw] if len(nw) <= max_len else overflow[min(nw.count(counted), count_cap)]
    for c, i in overflow.items():
        values[i] = c
        for j, x in enumerate(alphabet):
            delta[i, j] = overflow[min(c + (x == counted), count_cap)]
    names = [repr(w) for w in strings] + [f"long#{c}" for c in overflow]
    meta = {"kind": "string_count", "max_len": max_len, "construct": f"string building, query counts {counted!r}"}
    return Semiautomaton(delta, list(alphabet), start=0, state_names=names, meta=meta), Query(values)


# --- set systems ----------------------------------------------------------

def gen_powerset_union(universe: Sequence[Hashable], query: Callable[[frozenset], Hashable] | None = None,
                       order=None) -> tuple[Semiautomaton, Query]:
    """All subsets of ``universe``; label ``x`` inserts ``x``; start is the empty set.

    State ``i`` is the subset whose bit ``j`` is set iff ``universe[j]`` is in
    it. ``query`` receives the subset as a frozenset; the default is the
    identity (sorted tuple of members).
    """
    universe = list(universe)
    k = len(universe)
    if len(set(universe)) != k:
        raise PreconditionError("universe elements must be distinct")
    if k > MAX_UNIVERSE:
        raise SizeCapExceeded(f"universe of {k} elements exceeds the cap of {MAX_UNIVERSE}", estimate=2**k)
    n = 1 << k
    _check_size(n, k, "powerset system")
    states = np.arange(n, dtype=np.intp)
    delta = np.stack([states | (1 << j) for j in range(k)], axis=1) if k else np.zeros((1, 0), dtype=np.intp)
    names = [_set_name(_sorted_subset(universe, m)) for m in range(n)]
    if query is None:
        values = [tuple(str(x) for x in _sorted_subset(universe, m)) for m in range(n)]
    else:
        values = [query(_subset(universe, m)) for m in range(n)]
    if order is None and all(isinstance(v, bool) for v in values):
        order = BOOL_ORDER
    meta = {"kind": "powerset_union", "universe": [str(x) for x in universe],
            "construct": "insert-only relational instances (set union)"}
    return Semiautomaton(delta, [str(x) for x in universe], start=0, state_names=names, meta=meta), Query(values, order)


def gen_grow_only_set(universe: Sequence[Hashable], with_merge: bool = True,
                      query: Callable[[frozenset], Hashable] | None = None) -> tuple[Semiautomaton, Query]:
    """Grow-only set CRDT: add(x) per element plus merge(B) per possible incoming set."""
    universe = list(universe)
    k = len(universe)
    if k > MAX_UNIVERSE:
        raise SizeCapExceeded(f"universe of {k} elements exceeds the cap of {MAX_UNIVERSE}", estimate=2**k)
    n = 1 << k
    nl = k + (n if with_merge else 0)
    _check_size(n, nl, "grow-only set")
    states = np.arange(n, dtype=np.intp)
    cols = [states | (1 << j) for j in range(k)]
    labels = [str(x) for x in universe]
    if with_merge:
        cols += [states | m for m in range(n)]
        labels += ["merge" + _set_name(_sorted_subset(universe, m)) for m in range(n)]
    delta = np.stack(cols, axis=1) if cols else np.zeros((1, 0), dtype=np.intp)
    names = [_set_name(_sorted_subset(universe, m)) for m in range(n)]
    if query is None:
        values = [tuple(str(x) for x in _sorted_subset(universe, m)) for m in range(n)]
    else:
        values = [query(_subset(universe, m)) for m in range(n)]
    order = BOOL_ORDER if all(isinstance(v, bool) for v in values) else None
    meta = {"kind": "grow_only_set", "universe": labels[:k], "merge_labels": with_merge,
            "construct": "grow-only set CRDT (update = insert, merge = union)"}
    return Semiautomaton(delta, labels, start=0, state_names=names, meta=meta), Query(values, order)


def gen_two_phase_set(universe: Sequence[Hashable], query: Callable[[frozenset, frozenset], Hashable] | None = None,
                      with_merge: bool = False) -> tuple[Semiautomaton, Query]:
    """Two-phase set CRDT over pairs (INSERTS, DELETES).

    State index is ``inserts_mask | deletes_mask << k``. The sets may
    overlap; the default query is the visible set INSERTS - DELETES.
    """
    universe = list(universe)
    k = len(universe)
    if k > MAX_TWO_PHASE_UNIVERSE:
        raise SizeCapExceeded(f"universe of {k} elements exceeds the cap of {MAX_TWO_PHASE_UNIVERSE}",
                              estimate=4**k)
    n = 1 << (2 * k)
    nl = 2 * k + (n if with_merge else 0)
    _check_size(n, nl, "two-phase set")
    states = np.arange(n, dtype=np.intp)
    cols = [states | (1 << j) for j in range(k)] + [states | (1 << (k + j)) for j in range(k)]
    labels = [f"insert({x})" for x in universe] + [f"delete({x})" for x in universe]
    if with_merge:
        cols += [states | m for m in range(n)]
        labels += [f"merge({m})" for m in range(n)]
    delta = np.stack(cols, axis=1) if cols else np.zeros((1, 0), dtype=np.intp)
    full = (1 << k) - 1
    names, values = [], []
    for m in range(n):
        ins, dels = m & full, m >> k
        names.append(f"I={_set_name(_sorted_subset(universe, ins))} D={_set_name(_sorted_subset(universe, dels))}")
        if query is None:
            values.append(tuple(str(x) for x in _sorted_subset(universe, ins & ~dels)))
        else:
            values.append(query(_subset(universe, ins), _subset(universe, dels)))
    order = BOOL_ORDER if all(isinstance(v, bool) for v in values) else None
    meta = {"kind": "two_phase_set", "universe": [str(x) for x in universe],
            "construct": "two-phase set CRDT, query INSERTS - DELETES"}
    return Semiautomaton(delta, labels, start=0, state_names=names, meta=meta), Query(values, order)


# --- counters -------------------------------------------------------------

def _vectors(replicas: int, cap: int) -> np.ndarray:
    """All vectors in ``{0..cap}^replicas``; row ``i`` has digit ``j`` = ``(i // (cap+1)^j) % (cap+1)``."""
    n = (cap + 1) ** replicas
    idx = np.arange(n, dtype=np.intp)
    return np.stack([(idx // (cap + 1) ** j) % (cap + 1) for j in range(replicas)], axis=1)


def _vec_index(vecs: np.ndarray, cap: int) -> np.ndarray:
    weights = (cap + 1) ** np.arange(vecs.shape[1], dtype=np.intp)
    return vecs @ weights


def _counter_query(vecs, sums, query, threshold):
    if query is not None:
        return [query(tuple(int(x) for x in row)) for row in vecs]
    if threshold is not None:
        return [bool(s >= threshold) for s in sums]
    return [int(s) for s in sums]


def gen_g_counter(replicas: int, cap: int, with_merge: bool = True, threshold: int | None = None,
                  query: Callable[[tuple], Hashable] | None = None) -> tuple[Semiautomaton, Query]:
    """Grow-only counter with per-replica entries saturating at ``cap``.

    Labels are ``inc(j)`` and, with merges, ``merge(v)`` for every vector v
    (element-wise max). The query is the sum, ``sum >= threshold`` when a
    threshold is given, or a custom function of the vector.
    """
    if replicas < 1 or cap < 0:
        raise PreconditionError("need at least one replica and a non-negative cap")
    n = (cap + 1) ** replicas
    nl = replicas + (n if with_merge else 0)
    _check_size(n, nl, "grow-only counter")
    vecs = _vectors(replicas, cap)
    cols, labels = [], []
    for j in range(replicas):
        nxt = vecs.copy()
        nxt[:, j] = np.minimum(nxt[:, j] + 1, cap)
        cols.append(_vec_index(nxt, cap))
        labels.append(f"inc({j})")
    names = ["(" + ",".join(str(int(x)) for x in row) + ")" for row in vecs]
    if with_merge:
        for m in range(n):
            cols.append(_vec_index(np.maximum(vecs, vecs[m]), cap))
            labels.append(f"merge{names[m]}")
    delta = np.stack(cols, axis=1)
    values = _counter_query(vecs, vecs.sum(axis=1), query, threshold)
    order = BOOL_ORDER if threshold is not None else None
    meta = {"kind": "g_counter", "replicas": replicas, "cap": cap, "merge_labels": with_merge,
            "construct": "grow-only counter CRDT (merge = element-wise max, query = sum)"}
    return Semiautomaton(delta, labels, start=0, state_names=names, meta=meta), Query(values, order)


def gen_pn_counter(replicas: int, cap: int, with_merge: bool = False, threshold: int | None = None,
                   query: Callable[[tuple], Hashable] | None = None) -> tuple[Semiautomaton, Query]:
    """Positive-negative counter: a pair of saturating grow-only vectors.

    State digits are the positive entries followed by the negative entries;
    the query is ``sum(pos) - sum(neg)``. ``inc(j)`` grows the positive
    entry of replica j, ``dec(j)`` the negative one.
    """
    if replicas < 1 or cap < 0:
        raise PreconditionError("need at least one replica and a non-negative cap")
    n = (cap + 1) ** (2 * replicas)
    nl = 2 * replicas + (n if with_merge else 0)
    _check_size(n, nl, "positive-negative counter")
    vecs = _vectors(2 * replicas, cap)
    cols, labels = [], []
    for j in range(replicas):
        nxt = vecs.copy()
        nxt[:, j] = np.minimum(nxt[:, j] + 1, cap)
        cols.append(_vec_index(nxt, cap))
        labels.append(f"inc({j})")
    for j in range(replicas):
        nxt = vecs.copy()
        nxt[:, replicas + j] = np.minimum(nxt[:, replicas + j] + 1, cap)
        cols.append(_vec_index(nxt, cap))
        labels.append(f"dec({j})")
    names = [
        "P=(" + ",".join(str(int(x)) for x in row[:replicas]) + ") N=("
        + ",".join(str(int(x)) for x in row[replicas:]) + ")"
        for row in vecs
    ]
    if with_merge:
        for m in range(n):
            cols.append(_vec_index(np.maximum(vecs, vecs[m]), cap))
            labels.append(f"merge[{names[m]}]")
    delta = np.stack(cols, axis=1)
    net = vecs[:, :replicas].sum(axis=1) - vecs[:, replicas:].sum(axis=1)
    values = _counter_query(vecs, net, query, threshold)
    order = BOOL_ORDER if threshold is not None else None
    meta = {"kind": "pn_counter", "replicas": replicas, "cap": cap, "merge_labels": with_merge,
            "construct": "positive-negative counter CRDT (query = increments - decrements)"}
    return Semiautomaton(delta, labels, start=0, state_names=names, meta=meta), Query(values, order)


# --- fixpoint computation ----------------------------------------------------

def tc_rounds(edges: Sequence[tuple]) -> list[frozenset]:
    """Naive evaluation of transitive closure, one state per round.

    Round 0 holds the path facts copied from the edges; each later round
    applies ``P(x,y) <- P(x,z), Edge(z,y)`` once. Stops at the fixpoint.
    """
    edges = {(a, b) for a, b in edges}
    state = frozenset(edges)
    rounds = [state]
    while True:
        nxt = state | {(x, y) for (x, z) in state for (z2, y) in edges if z == z2}
        if nxt == state:
            return rounds
        state = frozenset(nxt)
        rounds.append(state)


def gen_tc_fixpoint(edges: Sequence[tuple], source=None, target=None, cycle: bool = False,
                    vertices: Sequence | None = None) -> tuple[Semiautomaton, Query]:
    """Chain automaton of naive transitive-closure rounds.

    One label, ``step``; the last round loops on itself. The query is
    ``P(source, target)`` or, with ``cycle=True``, "some ``P(x, x)``".
    """
    verts = set(vertices or ()) | {v for e in edges for v in e}
    if len(verts) > MAX_TC_VERTICES:
        raise SizeCapExceeded(f"{len(verts)} vertices exceeds the cap of {MAX_TC_VERTICES}", estimate=len(verts))
    if not cycle and (source is None or target is None):
        raise PreconditionError("a path query needs source and target")
    rounds = tc_rounds(edges)
    n = len(rounds)
    delta = [[min(i + 1, n - 1)] for i in range(n)]
    if cycle:
        values = [any(x == y for x, y in r) for r in rounds]
        construct = "transitive closure fixpoint, query: some P(x,x)"
    else:
        values = [(source, target) in r for r in rounds]
        construct = f"transitive closure fixpoint, query: P({source},{target})"
    names = [f"round{i}" for i in range(n)]
    meta = {"kind": "tc_fixpoint", "edges": sorted([list(e) for e in edges]), "construct": construct,
            "facts": [sorted([list(p) for p in r]) for r in rounds]}
    return Semiautomaton(delta, ["step"], start=0, state_names=names, meta=meta), Query(values, BOOL_ORDER)


# --- dispatch ---------------------------------------------------------------

KINDS = ("fig1a", "fig1b", "fig1c", "fig1d", "powerset_union", "grow_only_set", "two_phase_set",
         "g_counter", "pn_counter", "tc_fixpoint")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")

    def estimate_states(self) -> int:
        p = self.params
        if self.kind.startswith("fig1"):
            return 6
        if self.kind in ("powerset_union", "grow_only_set"):
            return 2 ** len(p.get("universe", ()))
        if self.kind == "two_phase_set":
            return 4 ** len(p.get("universe", ()))
        if self.kind == "g_counter":
            return (p.get("cap", 0) + 1) ** p.get("replicas", 1)
        if self.kind == "pn_counter":
            return (p.get("cap", 0) + 1) ** (2 * p.get("replicas", 1))
        verts = {v for e in p.get("edges", ()) for v in e}
        return len(verts) ** 2 + 1

    def generate(self) -> tuple[Semiautomaton, Query]:
        p = dict(self.params)
        if self.kind.startswith("fig1"):
            return gen_fig1(self.kind[-1])
        if self.kind != "tc_fixpoint" and self.estimate_states() > MAX_STATES:
            raise SizeCapExceeded(f"{self.kind} would have {self.estimate_states()} states",
                                  estimate=self.estimate_states())
        return {
            "powerset_union": gen_powerset_union,
            "grow_only_set": gen_grow_only_set,
            "two_phase_set": gen_two_phase_set,
            "g_counter": gen_g_counter,
            "pn_counter": gen_pn_counter,
            "tc_fixpoint": gen_tc_fixpoint,
        }[self.kind](**p)
