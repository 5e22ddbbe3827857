"""Finite semiautomata, state queries, and transition-graph reachability."""

from __future__ import annotations

import logging
from collections.abc import Callable, Hashable, Iterable, Sequence

import numpy as np

from ._backend import kernels
from .errors import InvalidAutomaton, InvalidQuery, PreconditionError
from .order import PartialOrder, ValueOrder, bits_of

logger = logging.getLogger(__name__)


def freeze(value):
    """Make a JSON-ish value hashable (lists become tuples, sets frozensets)."""
    if isinstance(value, list | tuple):
        return tuple(freeze(v) for v in value)
    if isinstance(value, set | frozenset):
        return frozenset(freeze(v) for v in value)
    if isinstance(value, dict):
        return tuple(sorted((k, freeze(v)) for k, v in value.items()))
    return value


class Semiautomaton:
    """A finite semiautomaton ``(D, L, U)`` with an optional start state.

    States are ``0 .. num_states-1``; labels are ``0 .. num_labels-1`` with
    display names in ``labels``. ``delta[s, l]`` is ``U(s, l)``. Instances
    are immutable: the transition table is stored read-only.
    """

    __slots__ = ("delta", "labels", "start", "state_names", "meta", "_label_index")

    def __init__(
        self,
        delta,
        labels: Sequence[str] | None = None,
        start: int | None = None,
        state_names: Sequence[str] | None = None,
        meta: dict | None = None,
        check_reachable: bool = True,
    ):
        table = np.array(delta, dtype=np.intp)
        if table.ndim == 1 and table.size == 0:
            table = table.reshape(0, 0)
        if table.ndim != 2:
            raise InvalidAutomaton("transition table must be a 2-d table (state x label)")
        n, nl = table.shape
        if n < 1:
            raise InvalidAutomaton("a semiautomaton needs at least one state")
        if labels is None:
            labels = [f"l{i}" for i in range(nl)]
        labels = tuple(str(x) for x in labels)
        if len(labels) != nl:
            raise InvalidAutomaton(f"{nl} transition columns but {len(labels)} labels")
        if len(set(labels)) != nl:
            raise InvalidAutomaton("label names must be unique")
        if table.size and (table.min() < 0 or table.max() >= n):
            bad = np.argwhere((table < 0) | (table >= n))[0]
            raise InvalidAutomaton(
                f"delta[{bad[0]}][{bad[1]}] = {table[bad[0], bad[1]]} is not a state (0..{n - 1})"
            )
        if start is not None and not 0 <= start < n:
            raise InvalidAutomaton(f"start state {start} out of range")
        if state_names is not None:
            state_names = tuple(str(x) for x in state_names)
            if len(state_names) != n:
                raise InvalidAutomaton("state_names must name every state")
        table.setflags(write=False)
        self.delta = table
        self.labels = labels
        self.start = None if start is None else int(start)
        self.state_names = state_names
        self.meta = dict(meta or {})
        self._label_index = {name: i for i, name in enumerate(labels)}
        if check_reachable and self.start is not None:
            indptr, indices = _csr(table)
            unreached = int(np.count_nonzero(kernels.bfs(n, indptr, indices, [self.start]) < 0))
            if unreached:
                logger.warning("%d state(s) are not reachable from the start state", unreached)

    @property
    def num_states(self) -> int:
        return self.delta.shape[0]

    @property
    def num_labels(self) -> int:
        return self.delta.shape[1]

    def step(self, s: int, label) -> int:
        return int(self.delta[s, self.label_id(label)])

    def label_id(self, label) -> int:
        if isinstance(label, str):
            try:
                return self._label_index[label]
            except KeyError:
                raise InvalidAutomaton(f"unknown label {label!r}") from None
        label = int(label)
        if not 0 <= label < self.num_labels:
            raise InvalidAutomaton(f"label id {label} out of range")
        return label

    def state_name(self, s: int) -> str:
        return self.state_names[s] if self.state_names else f"s{s}"

    def state_id(self, name) -> int:
        """Resolve a state given as an index or a display name."""
        if isinstance(name, int | np.integer):
            _check_state(self.num_states, int(name))
            return int(name)
        if self.state_names and name in self.state_names:
            return self.state_names.index(name)
        if isinstance(name, str) and name.startswith("s") and name[1:].isdigit():
            return self.state_id(int(name[1:]))
        raise InvalidAutomaton(f"unknown state {name!r}")

    def with_start(self, start: int | None) -> Semiautomaton:
        return Semiautomaton(self.delta, self.labels, start, self.state_names, self.meta, check_reachable=False)

    def __eq__(self, other):
        if not isinstance(other, Semiautomaton):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.start == other.start
            and self.state_names == other.state_names
            and self.delta.shape == other.delta.shape
            and bool(np.array_equal(self.delta, other.delta))
        )

    def __hash__(self):
        return hash((self.labels, self.start, self.delta.shape, self.delta.tobytes()))

    def __repr__(self):
        return f"Semiautomaton(states={self.num_states}, labels={list(self.labels)}, start={self.start})"


class Query:
    """A total map ``Q: D -> R`` stored as a table, plus an optional order on R."""

    __slots__ = ("values", "order", "codes", "domain")

    def __init__(self, values: Iterable[Hashable], order: ValueOrder | Iterable | None = None):
        self.values = tuple(freeze(v) for v in values)
        if not self.values:
            raise InvalidQuery("query must assign a value to every state")
        index: dict = {}
        codes = np.empty(len(self.values), dtype=np.intp)
        for s, v in enumerate(self.values):
            try:
                codes[s] = index.setdefault(v, len(index))
            except TypeError:
                raise InvalidQuery(f"query value {v!r} of state {s} is not hashable") from None
        codes.setflags(write=False)
        self.codes = codes
        self.domain = tuple(index)
        if order is not None and not isinstance(order, ValueOrder):
            pairs = [(freeze(u), freeze(v)) for u, v in order]
            try:
                order = ValueOrder(self.domain + tuple(x for pair in pairs for x in pair), pairs)
            except PreconditionError as exc:
                raise InvalidQuery(f"result order is not a partial order: {exc}") from None
        if order is not None:
            missing = [v for v in self.domain if v not in order]
            if missing:
                raise InvalidQuery(f"values {missing!r} are missing from the result order")
        self.order = order

    @classmethod
    def from_function(cls, automaton: Semiautomaton, fn: Callable[[int], Hashable], order=None) -> Query:
        return cls([fn(s) for s in range(automaton.num_states)], order)

    @classmethod
    def constant(cls, automaton: Semiautomaton, value=True) -> Query:
        return cls([value] * automaton.num_states)

    def __len__(self):
        return len(self.values)

    def __call__(self, s: int):
        return self.values[s]

    @property
    def is_constant(self) -> bool:
        return len(self.domain) == 1

    def check_against(self, automaton: Semiautomaton) -> None:
        if len(self.values) != automaton.num_states:
            raise InvalidQuery(
                f"query has {len(self.values)} values but the automaton has {automaton.num_states} states"
            )

    def __eq__(self, other):
        if not isinstance(other, Query):
            return NotImplemented
        mine = None if self.order is None else set(self.order.pairs())
        theirs = None if other.order is None else set(other.order.pairs())
        return self.values == other.values and mine == theirs

    def __repr__(self):
        return f"Query({len(self.values)} states, {len(self.domain)} distinct values)"


class TransitionGraph:
    """The labelled transition graph of a semiautomaton with its SCCs.

    Edges are stored in CSR form; edge ``i`` leaves state ``i // L`` with
    label ``i % L``. SCC ids are numbered in reverse topological order of
    the condensation, so ``scc_id[t] <= scc_id[s]`` for every edge s -> t.
    """

    def __init__(self, automaton: Semiautomaton):
        self.automaton = automaton
        n, nl = automaton.delta.shape
        self.num_states = n
        self.num_labels = nl
        self.indptr, self.indices = _csr(automaton.delta)
        order = np.argsort(self.indices, kind="stable")
        self.rindices = (order // max(nl, 1)).astype(np.intp)
        counts = np.bincount(self.indices, minlength=n)
        self.rindptr = np.concatenate(([0], np.cumsum(counts))).astype(np.intp)
        self.num_sccs, self.scc_id = kernels.scc(n, self.indptr, self.indices)
        self.scc_id = np.asarray(self.scc_id, dtype=np.intp)
        src = np.repeat(np.arange(n, dtype=np.intp), nl)
        cs, cd = self.scc_id[src], self.scc_id[self.indices]
        keep = cs != cd
        keys = np.unique(cs[keep] * self.num_sccs + cd[keep])
        heads, tails = keys // max(self.num_sccs, 1), keys % max(self.num_sccs, 1)
        self.cond_indptr = np.concatenate(
            ([0], np.cumsum(np.bincount(heads, minlength=self.num_sccs)))
        ).astype(np.intp)
        self.cond_indices = tails.astype(np.intp)
        for arr in (self.indptr, self.indices, self.rindptr, self.rindices, self.scc_id,
                    self.cond_indptr, self.cond_indices):
            arr.setflags(write=False)
        self._members = None

    @property
    def num_edges(self) -> int:
        return self.num_states * self.num_labels

    def edges(self, s: int) -> list[tuple[int, int]]:
        """Outgoing ``(label, target)`` pairs of ``s``, self-loops included."""
        return [(l, int(t)) for l, t in enumerate(self.automaton.delta[s])]

    def successors(self, s: int) -> set[int]:
        return set(self.automaton.delta[s].tolist())

    def predecessors(self, s: int) -> set[int]:
        return set(self.rindices[self.rindptr[s]:self.rindptr[s + 1]].tolist())

    def scc_members(self, c: int) -> list[int]:
        if self._members is None:
            members = [[] for _ in range(self.num_sccs)]
            for s, comp in enumerate(self.scc_id.tolist()):
                members[comp].append(s)
            self._members = members
        return self._members[c]

    def scc_successors(self, c: int) -> list[int]:
        return self.cond_indices[self.cond_indptr[c]:self.cond_indptr[c + 1]].tolist()

    def topological_sccs(self) -> list[int]:
        """SCC ids ordered so that every condensation edge goes forward."""
        return list(range(self.num_sccs - 1, -1, -1))

    def has_self_loop_only(self, s: int) -> bool:
        return bool(np.all(self.automaton.delta[s] == s))

    def depths(self, sources: Iterable[int], max_depth: int = -1) -> np.ndarray:
        return kernels.bfs(self.num_states, self.indptr, self.indices, [int(s) for s in sources], max_depth)

    def reverse_depths(self, sources: Iterable[int]) -> np.ndarray:
        return kernels.bfs(self.num_states, self.rindptr, self.rindices, [int(s) for s in sources], -1)

    def reach_bitsets(self) -> list[int]:
        """Per-state reachability closures as bitsets (quadratic memory; small graphs)."""
        scc_reach = [0] * self.num_sccs
        for c in range(self.num_sccs):
            mask = bits_of(self.scc_members(c))
            for d in self.scc_successors(c):
                mask |= scc_reach[d]
            scc_reach[c] = mask
        return [scc_reach[c] for c in self.scc_id.tolist()]


def _csr(table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, nl = table.shape
    if nl == 0:
        return np.zeros(n + 1, dtype=np.intp), np.zeros(0, dtype=np.intp)
    indptr = np.arange(0, n * nl + 1, nl, dtype=np.intp)
    return indptr, np.ascontiguousarray(table.ravel(), dtype=np.intp)


def _check_state(n: int, s) -> int:
    if not isinstance(s, int | np.integer) or not 0 <= s < n:
        raise InvalidAutomaton(f"invalid state id {s!r} (expected 0..{n - 1})")
    return int(s)


def build_graph(automaton: Semiautomaton) -> TransitionGraph:
    return TransitionGraph(automaton)


def reach_set(graph: TransitionGraph, s: int, k: int | None = None) -> frozenset[int]:
    """``U^k(s)`` when ``k`` is given, else the closure ``U^inf(s)``."""
    s = _check_state(graph.num_states, s)
    if k is not None and k < 0:
        raise ValueError("bound k must be non-negative")
    depth = graph.depths([s], -1 if k is None else k)
    return frozenset(np.flatnonzero(depth >= 0).tolist())


def reaches(graph: TransitionGraph, s: int, t: int) -> bool:
    s = _check_state(graph.num_states, s)
    t = _check_state(graph.num_states, t)
    return s == t or bool(graph.depths([s])[t] >= 0)


def apply_sequence(automaton: Semiautomaton, s: int, seq: Iterable) -> int:
    """Left fold of the update function over ``seq`` starting at ``s``."""
    s = _check_state(automaton.num_states, s)
    for label in seq:
        s = int(automaton.delta[s, automaton.label_id(label)])
    return s


def natural_up_sets(graph: TransitionGraph) -> PartialOrder:
    """Reachability as up-sets; only a partial order when the graph is acyclic."""
    return PartialOrder(graph.num_states, graph.reach_bitsets())
