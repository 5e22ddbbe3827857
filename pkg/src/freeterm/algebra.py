"""Algebraic structure of semiautomata and its consequences for free termination.

Everything is decided by finite enumeration over the state table.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .automaton import Query, Semiautomaton, TransitionGraph, build_graph
from .errors import InvalidQuery, PreconditionError, PropositionViolated, SizeCapExceeded
from .ft import FtVerdict, all_ft_states
from .order import BOOL_ORDER, PartialOrder, ValueOrder, bits_of, iter_bits
from .verdict import PropVerdict

DENSE_ORDER_LIMIT = 4096
QUERY_COMMUTATIVITY_BOUND = 3
COMMUTATIVITY_BUDGET = 5 * 10**8


class ReachabilityOrder(PartialOrder):
    """Reachability order of a large acyclic graph, up-sets computed on demand."""

    def __init__(self, graph: TransitionGraph, cache_size: int = 1024):
        self.size = graph.num_states
        self._graph = graph
        self._cache: dict[int, int] = {}
        self._cache_size = cache_size

    def up_set(self, a: int) -> int:
        mask = self._cache.get(a)
        if mask is None:
            reached = np.flatnonzero(self._graph.depths([a]) >= 0)
            mask = bits_of(reached.tolist())
            if len(self._cache) >= self._cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[a] = mask
        return mask

    def le(self, a: int, b: int) -> bool:
        return bool(self.up_set(a) >> b & 1)

    def maximal_elements(self) -> list[int]:
        return [s for s in range(self.size) if self._graph.has_self_loop_only(s)]


@dataclass(frozen=True)
class Antichain:
    elements: tuple[int, ...]
    order: PartialOrder

    def __post_init__(self):
        if not self.order.is_antichain(self.elements):
            raise PreconditionError(f"{list(self.elements)} is not an antichain")
        object.__setattr__(self, "elements", tuple(sorted(set(self.elements))))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


# --- orders -----------------------------------------------------------------

def is_acyclic(graph: TransitionGraph) -> bool:
    """Acyclic apart from self-loops: every SCC is a single state."""
    return graph.num_sccs == graph.num_states


def natural_order(graph: TransitionGraph) -> PartialOrder:
    """``s <= t`` iff ``s`` reaches ``t``; rejected on cyclic graphs."""
    if not is_acyclic(graph):
        raise PreconditionError("reachability is not antisymmetric on a cyclic transition graph")
    if graph.num_states <= DENSE_ORDER_LIMIT:
        return PartialOrder(graph.num_states, graph.reach_bitsets())
    return ReachabilityOrder(graph)


def is_inflationary(graph: TransitionGraph, order: PartialOrder) -> bool:
    delta = graph.automaton.delta
    return all(order.le(s, int(t)) for s in range(graph.num_states) for t in set(delta[s].tolist()))


def is_deflationary(graph: TransitionGraph, order: PartialOrder) -> bool:
    delta = graph.automaton.delta
    return all(order.le(int(t), s) for s in range(graph.num_states) for t in set(delta[s].tolist()))


def _result_order(query: Query, order_r: ValueOrder | None) -> ValueOrder:
    order_r = order_r or query.order
    if order_r is None:
        raise InvalidQuery("no order on query results supplied")
    for v in query.domain:
        order_r.index(v)
    return order_r


def _monotone_violation(query: Query, order_d: PartialOrder, order_r: ValueOrder, antitone: bool):
    dom = query.domain
    le = [[order_r.le(u, v) for v in dom] for u in dom]
    codes = query.codes.tolist()
    for s in range(order_d.size):
        cs = codes[s]
        for t in iter_bits(order_d.up_set(s)):
            ok = le[codes[t]][cs] if antitone else le[cs][codes[t]]
            if not ok:
                return s, t
    return None


def is_monotone_query(query: Query, order_d: PartialOrder, order_r: ValueOrder | None = None) -> bool:
    return _monotone_violation(query, order_d, _result_order(query, order_r), False) is None


def is_antitone_query(query: Query, order_d: PartialOrder, order_r: ValueOrder | None = None) -> bool:
    return _monotone_violation(query, order_d, _result_order(query, order_r), True) is None


# --- threshold queries --------------------------------------------------------

def threshold_query(order_d: PartialOrder, antichain: Antichain | list[int]) -> Query:
    """Boolean query, true exactly at or above some member of the antichain."""
    if not isinstance(antichain, Antichain):
        antichain = Antichain(tuple(antichain), order_d)
    above = order_d.upward_closure(antichain.elements)
    return Query([bool(above >> s & 1) for s in range(order_d.size)], BOOL_ORDER)


def ft_of_threshold(graph: TransitionGraph, order_d: PartialOrder, antichain: Antichain | list[int]) -> frozenset[int]:
    """States at or above the threshold line; all of them are FT (with value true).

    Cross-checked against ``all_ft_states``: the true-valued FT states must
    be exactly this set. False-valued states that cannot climb above the
    line are FT as well and are not part of the returned set.
    """
    if not is_inflationary(graph, order_d):
        raise PreconditionError("transition graph is not inflationary w.r.t. the supplied order")
    if not isinstance(antichain, Antichain):
        antichain = Antichain(tuple(antichain), order_d)
    closure = frozenset(iter_bits(order_d.upward_closure(antichain.elements)))
    query = threshold_query(order_d, antichain)
    verdict = all_ft_states(graph, query)
    true_ft = frozenset(s for s in verdict.ft_states if query.values[s])
    if true_ft != closure:
        raise PropositionViolated(
            f"upward closure {sorted(closure)} differs from true-valued FT states {sorted(true_ft)}"
        )
    return closure


def minimal_ft_states(graph: TransitionGraph, verdict: FtVerdict) -> list[int]:
    """FT states with no FT predecessor (other than themselves), ascending.

    On acyclic graphs these are the minimal FT states under reachability:
    FT sets are closed under reachability, so an FT state above ``s`` would
    force an FT immediate predecessor of ``s``.
    """
    ft = verdict.per_state
    return [s for s in verdict.ft_states if not any(ft[p] for p in graph.predecessors(s) if p != s)]


def extract_antichain(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None) -> Antichain:
    """Minimal FT states under the natural order; everything above one of them shares its value."""
    order = natural_order(graph)
    verdict = verdict or all_ft_states(graph, query)
    if not verdict.ft_states:
        raise PreconditionError("query has no free termination states, so there is no threshold antichain")
    chain = Antichain(tuple(minimal_ft_states(graph, verdict)), order)
    for c in chain:
        for s in iter_bits(order.up_set(c)):
            if query.values[s] != query.values[c]:
                raise PropositionViolated(f"state {s} above threshold state {c} has a different value")
    return chain


# --- join-semilattices ----------------------------------------------------------

def least_upper_bound(order: PartialOrder, a: int, b: int) -> int | None:
    common = order.up_set(a) & order.up_set(b)
    for u in iter_bits(common):
        if order.up_set(u) & common == common:
            return u
    return None


def is_join_semilattice(order: PartialOrder) -> tuple[bool, list[list[int]] | None]:
    """Pairwise least upper bounds; returns the join table when they all exist.

    Binary joins suffice on a finite order: the join of a finite set is
    obtained by folding the binary join.
    """
    n = order.size
    table = [[-1] * n for _ in range(n)]
    for a in range(n):
        table[a][a] = a
        for b in range(a + 1, n):
            j = least_upper_bound(order, a, b)
            if j is None:
                return False, None
            table[a][b] = table[b][a] = j
    return True, table


def _natural_semilattice(graph: TransitionGraph) -> PartialOrder:
    if not is_acyclic(graph):
        raise PreconditionError("transition graph is cyclic, so it has no natural order")
    order = natural_order(graph)
    if not is_join_semilattice(order)[0]:
        raise PreconditionError("natural order is not a join-semilattice")
    return order


def semilattice_same_value(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None) -> PropVerdict:
    name = "semilattice-ft-same-value"
    try:
        _natural_semilattice(graph)
    except PreconditionError as exc:
        return PropVerdict.not_applicable(name, str(exc))
    verdict = verdict or all_ft_states(graph, query)
    ft = verdict.ft_states
    for s in ft[1:]:
        if query.values[s] != query.values[ft[0]]:
            return PropVerdict(name, True, False, {"states": [ft[0], s]},
                               "two free termination states disagree")
    shared = query.values[ft[0]] if ft else None
    return PropVerdict(name, True, True, None, "all free termination states share one value" if ft
                       else "no free termination states (vacuous)", {"value": shared})


def semilattice_fts_reachable(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None) -> PropVerdict:
    name = "fts-reachable"
    try:
        _natural_semilattice(graph)
    except PreconditionError as exc:
        return PropVerdict.not_applicable(name, str(exc))
    verdict = verdict or all_ft_states(graph, query)
    return _every_state_reaches_ft(name, graph, verdict)


def _every_state_reaches_ft(name: str, graph: TransitionGraph, verdict: FtVerdict) -> PropVerdict:
    ft = verdict.ft_states
    if not ft:
        return PropVerdict.not_applicable(name, "no free termination states")
    reaching = graph.reverse_depths(ft)
    stuck = np.flatnonzero(reaching < 0)
    if stuck.size:
        return PropVerdict(name, True, False, {"state": int(stuck[0])}, "state cannot reach any FT state")
    return PropVerdict(name, True, True, None, "every state reaches a free termination state")


def check_semilattice_ft_props(graph: TransitionGraph, query: Query) -> PropVerdict:
    """Both join-semilattice consequences: one shared FT value, FT always reachable."""
    _natural_semilattice(graph)
    verdict = all_ft_states(graph, query)
    same = semilattice_same_value(graph, query, verdict)
    reach = semilattice_fts_reachable(graph, query, verdict)
    failed = [v for v in (same, reach) if not v.passed]
    if failed:
        return PropVerdict("semilattice-ft", True, False, failed[0].counterexample, failed[0].detail)
    return PropVerdict("semilattice-ft", True, True, None, f"{same.detail}; {reach.detail}",
                       {"value": same.extra.get("value")})


# --- identity and invertibility ---------------------------------------------------

def identity_states(graph: TransitionGraph) -> frozenset[int]:
    """States reaching every state.

    Only a source SCC can reach everything, and it does iff it is the only
    source of the condensation.
    """
    has_incoming = np.zeros(graph.num_sccs, dtype=bool)
    has_incoming[graph.cond_indices] = True
    sources = np.flatnonzero(~has_incoming)
    if len(sources) != 1:
        return frozenset()
    return frozenset(graph.scc_members(int(sources[0])))


def all_invertible(graph: TransitionGraph) -> bool:
    """Every state reaches an identity state, i.e. the graph is strongly connected."""
    return graph.num_sccs == 1


def check_inverse_curse(graph: TransitionGraph, query: Query) -> PropVerdict:
    name = "inverse-curse"
    if query.is_constant:
        return PropVerdict.not_applicable(name, "query is constant")
    if not all_invertible(graph):
        return PropVerdict.not_applicable(name, "not every state is invertible")
    ft = all_ft_states(graph, query).ft_states
    if ft:
        return PropVerdict(name, True, False, {"state": ft[0]}, "invertible system has a free termination state")
    return PropVerdict(name, True, True, None, "every state invertible and no free termination states")


# --- maximal elements and monotone queries ------------------------------------------

def check_extremal_states_ft(graph: TransitionGraph, order: PartialOrder, query: Query) -> PropVerdict:
    """Inflationary: maximal elements are FT. Deflationary: minimal elements are FT."""
    name = "inflationary-monotone-implies-ft"
    infl, defl = is_inflationary(graph, order), is_deflationary(graph, order)
    if not (infl or defl):
        return PropVerdict.not_applicable(name, "neither inflationary nor deflationary")
    verdict = all_ft_states(graph, query)
    extremal = set()
    if infl:
        extremal |= set(order.maximal_elements())
    if defl:
        extremal |= set(order.minimal_elements())
    bad = sorted(s for s in extremal if not verdict.per_state[s])
    if bad:
        return PropVerdict(name, True, False, {"state": bad[0]}, "extremal state is not FT")
    return PropVerdict(name, True, True, None, f"{len(extremal)} extremal state(s) are all FT")


def check_extremal_value_ft(graph: TransitionGraph, order_d: PartialOrder, query: Query,
                            order_r: ValueOrder | None = None) -> PropVerdict:
    """Inflationary + monotone: states with a maximal value are FT (antitone: minimal value)."""
    name = "top-in-r-free-terminates"
    if not is_inflationary(graph, order_d):
        return PropVerdict.not_applicable(name, "not inflationary")
    try:
        order_r = _result_order(query, order_r)
    except InvalidQuery as exc:
        return PropVerdict.not_applicable(name, str(exc))
    mono = _monotone_violation(query, order_d, order_r, False) is None
    anti = _monotone_violation(query, order_d, order_r, True) is None
    if not (mono or anti):
        return PropVerdict.not_applicable(name, "query neither monotone nor antitone")
    verdict = all_ft_states(graph, query)
    candidates = [
        s for s in range(graph.num_states)
        if (mono and order_r.is_maximal(query.values[s])) or (anti and order_r.is_minimal(query.values[s]))
    ]
    bad = [s for s in candidates if not verdict.per_state[s]]
    if bad:
        return PropVerdict(name, True, False, {"state": bad[0]}, "state with extremal value is not FT")
    return PropVerdict(name, True, True, None, f"{len(candidates)} state(s) with extremal value are all FT")


def check_threshold_ft(graph: TransitionGraph, order_d: PartialOrder, antichain) -> PropVerdict:
    name = "inflationary-threshold-ft"
    if not is_inflationary(graph, order_d):
        return PropVerdict.not_applicable(name, "not inflationary")
    try:
        closure = ft_of_threshold(graph, order_d, antichain)
    except PropositionViolated as exc:
        return PropVerdict(name, True, False, None, str(exc))
    return PropVerdict(name, True, True, None, f"{len(closure)} state(s) at or above the threshold are FT")


def check_acyclic_threshold(graph: TransitionGraph, query: Query) -> PropVerdict:
    name = "acyclic-implies-threshold"
    if not is_acyclic(graph):
        return PropVerdict.not_applicable(name, "transition graph is cyclic")
    verdict = all_ft_states(graph, query)
    if not verdict.ft_states:
        return PropVerdict.not_applicable(name, "no free termination states")
    try:
        chain = extract_antichain(graph, query, verdict)
    except PropositionViolated as exc:
        return PropVerdict(name, True, False, None, str(exc))
    return PropVerdict(name, True, True, None, "values are constant above the threshold antichain",
                       {"antichain": list(chain.elements)})


def monotone_as_threshold(graph: TransitionGraph, query: Query) -> Antichain:
    """Threshold line of a monotone Boolean query: its minimal true states."""
    order = natural_order(graph)
    trues = [s for s in range(graph.num_states) if query.values[s] is True]
    if not trues:
        raise PreconditionError("constant-false query has no threshold line")
    return Antichain(tuple(order.minimal(trues)), order)


# --- commutativity -------------------------------------------------------------

def update_commutativity_violation(automaton: Semiautomaton):
    """First ``(state, a, b)`` with ``s.a.b != s.b.a``, or None.

    Single labels suffice: commuting letters commute as sequences.
    """
    d = automaton.delta
    for a in range(automaton.num_labels):
        ab = d[d[:, a], :]          # s.a.b for every b
        ba = d[d, a]                # s.b.a for every b
        diff = np.argwhere(ab != ba)
        if diff.size:
            s, b = diff[0]
            return int(s), a, int(b)
    return None


def is_commutative_update(automaton: Semiautomaton) -> bool:
    return update_commutativity_violation(automaton) is None


def _sequence_maps(automaton: Semiautomaton, bound: int):
    d = automaton.delta
    n = automaton.num_states
    seqs, maps = [], []
    level = [((), np.arange(n, dtype=np.intp))]
    for _ in range(bound):
        nxt = []
        for seq, m in level:
            for a in range(automaton.num_labels):
                nxt.append((seq + (a,), d[m, a]))
        seqs += [s for s, _ in nxt]
        maps += [m for _, m in nxt]
        level = nxt
    return seqs, maps


def query_commutativity_violation(automaton: Semiautomaton, query: Query,
                                  bound: int = QUERY_COMMUTATIVITY_BOUND, budget: int = COMMUTATIVITY_BUDGET):
    """First ``(state, seq_a, seq_b)`` with differing query after both orders, or None.

    Checks every pair of non-empty label sequences of length <= ``bound``.
    """
    nl, n = automaton.num_labels, automaton.num_states
    count = sum(nl**k for k in range(1, bound + 1))
    if count * count * n > budget:
        raise SizeCapExceeded(f"query commutativity at bound {bound} needs {count}^2 x {n} evaluations",
                              estimate=count * count * n)
    if count == 0:
        return None
    seqs, maps = _sequence_maps(automaton, bound)
    stacked = np.stack(maps)          # (count, n): stacked[i, s] = s . seq_i
    codes = query.codes
    for i, ma in enumerate(maps):
        ab = codes[stacked[:, ma]]    # Q(s . a . b)
        ba = codes[ma[stacked]]       # Q(s . b . a)
        diff = np.argwhere(ab != ba)
        if diff.size:
            j, s = diff[0]
            return int(s), seqs[i], seqs[int(j)]
    return None


def is_commutative_query(automaton: Semiautomaton, query: Query, bound: int = QUERY_COMMUTATIVITY_BOUND) -> bool:
    return query_commutativity_violation(automaton, query, bound) is None


def _shortest_words(automaton: Semiautomaton) -> list[tuple[int, ...] | None]:
    words: list = [None] * automaton.num_states
    words[automaton.start] = ()
    todo = deque([automaton.start])
    delta = automaton.delta.tolist()
    while todo:
        s = todo.popleft()
        for a, t in enumerate(delta[s]):
            if words[t] is None:
                words[t] = words[s] + (a,)
                todo.append(t)
    return words


def _run(delta, s, word):
    for a in word:
        s = delta[s][a]
    return s


def check_commutativity_ft_props(automaton: Semiautomaton, query: Query,
                                 bound: int = QUERY_COMMUTATIVITY_BOUND) -> tuple[PropVerdict, PropVerdict]:
    """Commutative query: FT values agree. Commutative update: FT always reachable.

    Query commutativity is only checked up to ``bound`` (lowered when the
    label alphabet makes that bound too expensive); the words from the
    start state to each pair of FT states (the ones the argument composes)
    are checked as well, and a failure there refutes the precondition.
    """
    if automaton.start is None:
        raise PreconditionError("commutativity propositions need a start state")
    words = _shortest_words(automaton)
    if any(w is None for w in words):
        raise PreconditionError("start state does not reach every state")
    graph = build_graph(automaton)
    verdict = all_ft_states(graph, query)
    ft = verdict.ft_states
    delta = automaton.delta.tolist()

    name = "commutative-same-ft-value"
    while True:
        try:
            violation = query_commutativity_violation(automaton, query, bound)
            break
        except SizeCapExceeded:
            if bound == 1:
                raise
            bound -= 1
    if violation is not None:
        same = PropVerdict.not_applicable(name, f"query not commutative: {violation}")
    else:
        refuted = None
        for s1, s2 in itertools.combinations(ft, 2):
            w1, w2 = words[s1], words[s2]
            x = _run(delta, automaton.start, w1 + w2)
            y = _run(delta, automaton.start, w2 + w1)
            if query.values[x] != query.values[y]:
                refuted = (automaton.start, w1, w2)
                break
        if refuted is not None:
            same = PropVerdict.not_applicable(name, f"query not commutative beyond bound {bound}: {refuted}")
        else:
            bad = [s for s in ft if query.values[s] != query.values[ft[0]]]
            if bad:
                same = PropVerdict(name, True, False, {"states": [ft[0], bad[0]]}, "FT states disagree")
            else:
                same = PropVerdict(name, True, True, None, "FT states share one value" if ft else "vacuous: no FT states",
                                   {"query_commutativity_bound": bound})

    name = "commutative-always-reachable"
    violation = update_commutativity_violation(automaton)
    if violation is not None:
        reach = PropVerdict.not_applicable(name, f"update not commutative: {violation}")
    else:
        reach = _every_state_reaches_ft(name, graph, verdict)
    return same, reach


# --- report ------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraReport:
    acyclic: bool
    inflationary_wrt: dict
    identity_states: tuple[int, ...]
    all_invertible: bool
    is_join_semilattice: bool | None
    commutative_update: bool
    commutative_query: bool | None
    query_commutativity_bound: int
    monotone: bool | None
    antitone: bool | None
    antichain: tuple[int, ...] | None

    def to_dict(self, name=str) -> dict:
        return {
            "acyclic": self.acyclic,
            "inflationary_wrt": self.inflationary_wrt,
            "identity_states": [name(s) for s in self.identity_states],
            "all_invertible": self.all_invertible,
            "is_join_semilattice": self.is_join_semilattice,
            "commutative_update": self.commutative_update,
            "commutative_update_note": "single-label commutation implies commutation of all sequences",
            "commutative_query": self.commutative_query,
            "query_commutativity_bound": self.query_commutativity_bound,
            "monotone": self.monotone,
            "antitone": self.antitone,
            "antichain": None if self.antichain is None else [name(s) for s in self.antichain],
        }


def algebra_report(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None,
                   bound: int = QUERY_COMMUTATIVITY_BOUND) -> AlgebraReport:
    automaton = graph.automaton
    verdict = verdict or all_ft_states(graph, query)
    acyclic = is_acyclic(graph)
    inflationary = {}
    semilattice = monotone = antitone = None
    antichain = None
    if acyclic:
        order = natural_order(graph)
        inflationary["natural"] = is_inflationary(graph, order)
        if graph.num_states <= 512:
            semilattice = is_join_semilattice(order)[0]
        if query.order is not None:
            monotone = is_monotone_query(query, order)
            antitone = is_antitone_query(query, order)
        if verdict.ft_states:
            antichain = extract_antichain(graph, query, verdict).elements
    inflationary["discrete"] = is_inflationary(graph, PartialOrder.discrete(graph.num_states))
    try:
        commutative_query = is_commutative_query(automaton, query, bound)
    except SizeCapExceeded:
        commutative_query = None
    ids = identity_states(graph)
    return AlgebraReport(
        acyclic=acyclic,
        inflationary_wrt=inflationary,
        identity_states=tuple(sorted(ids)),
        all_invertible=all_invertible(graph),
        is_join_semilattice=semilattice,
        commutative_update=is_commutative_update(automaton),
        commutative_query=commutative_query,
        query_commutativity_bound=bound,
        monotone=monotone,
        antitone=antitone,
        antichain=antichain,
    )
