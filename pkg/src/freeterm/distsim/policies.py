"""Bounded instance automata and ready policies derived from their FT states."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from ..automaton import Query, Semiautomaton, build_graph
from ..errors import PreconditionError, SizeCapExceeded
from ..facts import DistQuery, Fact, membership_query, sorted_facts
from ..ft import all_ft_states

ALL = Fact("All")
MAX_FACTS = 20
MAX_SIGNED_FACTS = 12


class FactIndex:
    """Bit positions of the facts of a finite universe."""

    def __init__(self, universe: Iterable[Fact]):
        facts = sorted_facts({f.positive_form() for f in universe})
        if ALL in facts:
            raise PreconditionError("the relation name 'All' is reserved for the metadata fact")
        self.facts: tuple[Fact, ...] = tuple(facts)
        self.index = {f: i for i, f in enumerate(self.facts)}

    def __len__(self):
        return len(self.facts)

    def mask(self, facts: Iterable[Fact]) -> int:
        m = 0
        for f in facts:
            if f == ALL or not f.positive:
                continue
            try:
                m |= 1 << self.index[f]
            except KeyError:
                raise PreconditionError(f"fact {f} lies outside the analysed universe; enlarge the universe") from None
        return m

    def subset(self, mask: int) -> frozenset[Fact]:
        return frozenset(f for i, f in enumerate(self.facts) if mask >> i & 1)


def _values(index: FactIndex, query: DistQuery) -> list:
    return [query.evaluate(index.subset(m)) for m in range(1 << len(index))]


def union_automaton(index: FactIndex, query: DistQuery, with_all: bool = False) -> tuple[Semiautomaton, Query]:
    """Insert-only instance automaton over the universe, optionally with the ``All()`` flag.

    With the flag the state space doubles; states carrying it have only
    self-loops, and their query value is the value on their fact set.
    """
    k = len(index)
    if k > MAX_FACTS:
        raise SizeCapExceeded(f"{k} facts exceed the cap of {MAX_FACTS} for the bounded instance system",
                              estimate=2**k)
    n = 1 << k
    states = np.arange(n, dtype=np.intp)
    cols = [states | (1 << j) for j in range(k)]
    labels = [str(f) for f in index.facts]
    values = _values(index, query)
    if with_all:
        flag = n
        cols = [np.concatenate([c, states + flag]) for c in cols]
        cols.append(np.concatenate([states + flag, states + flag]))
        labels.append(str(ALL))
        values = values + values
        n *= 2
    delta = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.intp)
    return Semiautomaton(delta, labels, start=0, check_reachable=False), Query(values)


def signed_automaton(index: FactIndex, query: DistQuery) -> tuple[Semiautomaton, Query]:
    """States ``(I+, I-)`` with disjoint parts, one trit per fact; query on ``I+``.

    Adding a fact already recorded with the other sign is a self-loop; sound
    policy inferences never produce that case.
    """
    k = len(index)
    if k > MAX_SIGNED_FACTS:
        raise SizeCapExceeded(f"{k} facts exceed the cap of {MAX_SIGNED_FACTS} for the signed system",
                              estimate=3**k)
    n = 3**k
    codes = np.arange(n, dtype=np.intp)
    cols, labels = [], []
    for j in range(k):
        p = 3**j
        absent = (codes // p) % 3 == 0
        cols.append(np.where(absent, codes + p, codes))
        cols.append(np.where(absent, codes + 2 * p, codes))
        labels += [str(index.facts[j]), "-" + str(index.facts[j])]
    pos_mask = np.zeros(n, dtype=np.int64)
    for j in range(k):
        pos_mask += ((codes // 3**j) % 3 == 1).astype(np.int64) << j
    by_mask = _values(index, query)
    values = [by_mask[m] for m in pos_mask.tolist()]
    delta = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.intp)
    return Semiautomaton(delta, labels, start=0, check_reachable=False), Query(values)


def signed_code(index: FactIndex, facts: Iterable[Fact]) -> int:
    code = 0
    for f in facts:
        if f == ALL:
            continue
        j = index.index.get(f.positive_form())
        if j is None:
            raise PreconditionError(f"fact {f} lies outside the analysed universe; enlarge the universe")
        code += (1 if f.positive else 2) * 3**j
    return code


class ReadyPolicy:
    """Decides from a node's local state which ready flags may be set.

    ``keys`` lists the flags; Boolean queries use the single key ``None``.
    """

    keys: tuple = (None,)

    def fires(self, local: frozenset[Fact]) -> set:
        raise NotImplementedError

    def output(self, key, local: frozenset[Fact]):
        raise NotImplementedError


class FtReadyPolicy(ReadyPolicy):
    """Ready exactly when the local instance is an FT state of the bounded system."""

    def __init__(self, query: DistQuery, universe: Sequence[Fact] | None, with_all: bool = False):
        if universe is None:
            raise PreconditionError("the FT ready policy needs a finite fact universe (a domain bound)")
        self.query = query
        self.index = FactIndex(universe)
        self.with_all = with_all
        automaton, q = union_automaton(self.index, query, with_all)
        self.ft = np.array(all_ft_states(build_graph(automaton), q).per_state, dtype=bool)

    def state_code(self, local) -> int:
        code = self.index.mask(local)
        if self.with_all and ALL in local:
            code += 1 << len(self.index)
        return code

    def is_ft(self, local) -> bool:
        return bool(self.ft[self.state_code(local)])

    def fires(self, local):
        return {None} if self.is_ft(local) else set()

    def output(self, key, local):
        return self.query.evaluate(f for f in local if f != ALL)


def ft_ready_policy(query: DistQuery, universe: Sequence[Fact] | None) -> FtReadyPolicy:
    return FtReadyPolicy(query, universe)


class PerTuplePolicy(ReadyPolicy):
    """One flag per candidate output tuple ``t``, set when "t in Q" is FT locally."""

    def __init__(self, query: DistQuery, universe: Sequence[Fact], outputs: Iterable[tuple]):
        self.query = query
        self.keys = tuple(sorted({tuple(t) for t in outputs}, key=lambda t: tuple(map(str, t))))
        self.members = {t: FtReadyPolicy(membership_query(query, t), universe) for t in self.keys}

    def fires(self, local):
        return {t for t, pol in self.members.items() if pol.is_ft(local)}

    def output(self, key, local):
        return self.members[key].output(None, local)


class SignedReadyPolicy(ReadyPolicy):
    """Ready when the local pair ``(I+, I-)`` is FT in the signed system."""

    def __init__(self, query: DistQuery, universe: Sequence[Fact]):
        self.query = query
        self.index = FactIndex(universe)
        automaton, q = signed_automaton(self.index, query)
        self.ft = np.array(all_ft_states(build_graph(automaton), q).per_state, dtype=bool)

    def is_ft(self, local) -> bool:
        return bool(self.ft[signed_code(self.index, local)])

    def fires(self, local):
        return {None} if self.is_ft(local) else set()

    def output(self, key, local):
        return self.query.evaluate(local)
