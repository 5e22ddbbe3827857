"""Query-preserving collapsing, Moore-machine minimization and equivalence."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .automaton import Query, Semiautomaton, build_graph
from .errors import InvalidAutomaton, PreconditionError
from .ft import all_ft_states
from .verdict import PropVerdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CollapseMap:
    old_to_new: tuple[int, ...]
    automaton: Semiautomaton
    query: Query

    def then(self, other: CollapseMap) -> CollapseMap:
        """Compose with a collapse applied to this map's output."""
        return CollapseMap(tuple(other.old_to_new[t] for t in self.old_to_new), other.automaton, other.query)

    def to_dict(self, source: Semiautomaton) -> dict:
        return {
            "old_to_new": {source.state_name(s): self.automaton.state_name(t) for s, t in enumerate(self.old_to_new)},
            "states_before": source.num_states,
            "states_after": self.automaton.num_states,
        }


def _require_start(automaton: Semiautomaton) -> None:
    if automaton.start is None:
        raise PreconditionError("operation needs a start state")


def _quotient(automaton: Semiautomaton, query: Query, block: np.ndarray, names: list[str]) -> tuple[Semiautomaton, Query]:
    """Automaton on blocks, taking transitions and values from each block's first member."""
    nb = len(names)
    rep = np.full(nb, -1, dtype=np.intp)
    for s in range(automaton.num_states - 1, -1, -1):
        rep[block[s]] = s
    delta = block[automaton.delta[rep]]
    start = None if automaton.start is None else int(block[automaton.start])
    values = [query.values[r] for r in rep.tolist()]
    quot = Semiautomaton(delta, automaton.labels, start, names, automaton.meta, check_reachable=False)
    return quot, Query(values, query.order)


def collapse_closure(automaton: Semiautomaton, query: Query, s: int) -> tuple[Semiautomaton, Query, CollapseMap]:
    """Merge the closure of the FT state ``s`` into one self-looping state.

    The merged state takes the position of the lowest-index closure member
    and the name of ``s``; all other states keep their relative order.
    """
    _require_start(automaton)
    graph = build_graph(automaton)
    s = automaton.state_id(s)
    verdict = all_ft_states(graph, query)
    if not verdict.per_state[s]:
        w = verdict.witness[s]
        raise PreconditionError(
            f"state {automaton.state_name(s)} is not a free termination state "
            f"(reaches {automaton.state_name(w)} with a different value)"
        )
    closure = graph.depths([s]) >= 0
    anchor = int(np.flatnonzero(closure)[0])
    keep = ~closure
    keep[anchor] = True
    block = np.cumsum(keep) - 1
    block[closure] = block[anchor]
    block = block.astype(np.intp)
    names = [automaton.state_name(t) for t in np.flatnonzero(keep).tolist()]
    names[block[anchor]] = automaton.state_name(s)
    merged, mquery = _quotient(automaton, query, block, names)
    delta = np.array(merged.delta)
    delta[block[anchor], :] = block[anchor]
    merged = Semiautomaton(delta, merged.labels, merged.start, merged.state_names, merged.meta, check_reachable=False)
    return merged, mquery, CollapseMap(tuple(block.tolist()), merged, mquery)


def collapse_fixpoint(automaton: Semiautomaton, query: Query, with_map: bool = False):
    """Collapse FT closures until every FT state has only self-loops.

    Collapsing preserves equivalence, so FT status of the surviving states
    does not change and is computed only once.
    """
    _require_start(automaton)
    cmap = CollapseMap(tuple(range(automaton.num_states)), automaton, query)
    ft = list(all_ft_states(build_graph(automaton), query).per_state)
    current, cquery = automaton, query
    while True:
        delta = current.delta
        loops = np.all(delta == np.arange(current.num_states)[:, None], axis=1)
        todo = [t for t in range(current.num_states) if ft[t] and not loops[t]]
        if not todo:
            break
        current, cquery, step = collapse_closure(current, cquery, todo[0])
        new_ft = [False] * current.num_states
        for old, new in enumerate(step.old_to_new):
            new_ft[new] = ft[old]
        ft = new_ft
        cmap = cmap.then(step)
    return (current, cquery, cmap) if with_map else (current, cquery)


def reachable_part(automaton: Semiautomaton, query: Query) -> tuple[Semiautomaton, Query, np.ndarray]:
    """Restrict to states reachable from the start; third item maps old ids (-1 if dropped)."""
    _require_start(automaton)
    reached = build_graph(automaton).depths([automaton.start]) >= 0
    if reached.all():
        return automaton, query, np.arange(automaton.num_states, dtype=np.intp)
    logger.warning("dropping %d state(s) unreachable from the start state", int(np.count_nonzero(~reached)))
    keep = np.flatnonzero(reached)
    new_id = np.full(automaton.num_states, -1, dtype=np.intp)
    new_id[keep] = np.arange(keep.size)
    delta = new_id[automaton.delta[keep]]
    names = [automaton.state_name(s) for s in keep.tolist()]
    values = [query.values[s] for s in keep.tolist()]
    sub = Semiautomaton(delta, automaton.labels, int(new_id[automaton.start]), names, automaton.meta)
    return sub, Query(values, query.order), new_id


def _hopcroft(delta: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Coarsest partition compatible with ``codes`` and stable under ``delta``."""
    n, nl = delta.shape
    inverse = []
    for a in range(nl):
        order = np.argsort(delta[:, a], kind="stable")
        counts = np.bincount(delta[:, a], minlength=n)
        ptr = np.concatenate(([0], np.cumsum(counts)))
        inverse.append((ptr.tolist(), order.tolist()))

    block_of = np.unique(codes, return_inverse=True)[1].astype(np.intp).tolist()
    blocks: list[set[int]] = [set() for _ in range(max(block_of) + 1)]
    for s, b in enumerate(block_of):
        blocks[b].add(s)
    largest = max(range(len(blocks)), key=lambda b: len(blocks[b]))
    work = set(range(len(blocks))) - {largest}

    while work:
        splitter = blocks[work.pop()]
        for ptr, order in inverse:
            pre = set()
            for t in splitter:
                pre.update(order[ptr[t]:ptr[t + 1]])
            touched: dict[int, set[int]] = {}
            for s in pre:
                touched.setdefault(block_of[s], set()).add(s)
            for b, inside in touched.items():
                if len(inside) == len(blocks[b]):
                    continue
                outside = blocks[b] - inside
                small, big = (inside, outside) if len(inside) <= len(outside) else (outside, inside)
                nb = len(blocks)
                blocks[b] = big
                blocks.append(small)
                for s in small:
                    block_of[s] = nb
                # b stays queued if it was; otherwise the smaller half suffices
                work.add(nb)
    return np.array(block_of, dtype=np.intp)


def _canonical_blocks(delta: np.ndarray, start: int, block: np.ndarray) -> np.ndarray:
    """Renumber blocks in BFS order from the start block, labels in order."""
    nb = int(block.max()) + 1
    rep = np.empty(nb, dtype=np.intp)
    rep[block[::-1]] = np.arange(len(block) - 1, -1, -1)
    bdelta = block[delta[rep]].tolist()
    new = [-1] * nb
    new[block[start]] = 0
    count = 1
    todo = deque([int(block[start])])
    while todo:
        b = todo.popleft()
        for c in bdelta[b]:
            if new[c] < 0:
                new[c] = count
                count += 1
                todo.append(c)
    return np.array(new, dtype=np.intp)[block]


def minimize_moore(automaton: Semiautomaton, query: Query) -> tuple[Semiautomaton, Query]:
    """Minimal equivalent machine, with states numbered canonically (BFS from start).

    Unreachable states are dropped first; two minimal machines for the same
    behaviour come out identical up to state names.
    """
    sub, squery, _ = reachable_part(automaton, query)
    block = _hopcroft(sub.delta, squery.codes)
    block = _canonical_blocks(sub.delta, sub.start, block)
    nb = int(block.max()) + 1
    names = [""] * nb
    for s in range(sub.num_states - 1, -1, -1):
        names[block[s]] = sub.state_name(s)
    return _quotient(sub, squery, block, names)


def check_equivalence(a1: Semiautomaton, q1: Query, a2: Semiautomaton, q2: Query) -> tuple[bool, list[str] | None]:
    """Product BFS from both start states; on failure the shortest distinguishing label sequence."""
    _require_start(a1)
    _require_start(a2)
    if set(a1.labels) != set(a2.labels):
        raise InvalidAutomaton(f"label sets differ: {sorted(a1.labels)} vs {sorted(a2.labels)}")
    remap = [a2.label_id(x) for x in a1.labels]
    d1 = a1.delta.tolist()
    d2 = a2.delta[:, remap].tolist()
    start = (a1.start, a2.start)
    parent = {start: None}
    todo = deque([start])
    while todo:
        pair = todo.popleft()
        x, y = pair
        if q1.values[x] != q2.values[y]:
            seq = []
            while parent[pair] is not None:
                pair, label = parent[pair]
                seq.append(a1.labels[label])
            return False, seq[::-1]
        for label in range(a1.num_labels):
            nxt = (d1[x][label], d2[y][label])
            if nxt not in parent:
                parent[nxt] = (pair, label)
                todo.append(nxt)
    return True, None


def _cycle_through(graph, s: int) -> list[int]:
    """A shortest cycle through ``s`` that is not a self-loop."""
    parent = {}
    todo = deque()
    for t in sorted(graph.successors(s)):
        if t != s and t not in parent:
            parent[t] = s
            todo.append(t)
    while todo:
        v = todo.popleft()
        if v == s:
            break
        for t in sorted(graph.successors(v)):
            if t not in parent and t != v:
                parent[t] = v
                todo.append(t)
    path = [s]
    v = parent[s]
    while v != s:
        path.append(v)
        v = parent[v]
    path.append(s)
    return path[::-1]


def check_minimal_ft_acyclicity(automaton: Semiautomaton, query: Query) -> PropVerdict:
    """No FT state may lie on a cycle other than a self-loop (meaningful on minimal machines)."""
    name = "minimal-ft-acyclic"
    graph = build_graph(automaton)
    verdict = all_ft_states(graph, query)
    sizes = np.bincount(graph.scc_id, minlength=graph.num_sccs)
    minimal = None
    if automaton.start is not None:
        minimal = minimize_moore(automaton, query)[0].num_states == automaton.num_states
    for s in verdict.ft_states:
        if sizes[graph.scc_id[s]] > 1:
            cycle = [automaton.state_name(t) for t in _cycle_through(graph, s)]
            return PropVerdict(name, True, False, {"cycle": cycle},
                               f"FT state {automaton.state_name(s)} lies on a cycle", {"minimal": minimal})
    return PropVerdict(name, True, True, None, "no FT state lies on a cycle", {"minimal": minimal})


def check_collapsed(automaton: Semiautomaton, query: Query) -> PropVerdict:
    """A state is FT exactly when all its transitions are self-loops."""
    name = "collapsed-fixpoint"
    verdict = all_ft_states(build_graph(automaton), query)
    loops = np.all(automaton.delta == np.arange(automaton.num_states)[:, None], axis=1)
    for s in range(automaton.num_states):
        if verdict.per_state[s] != bool(loops[s]):
            kind = "FT state with a non-self transition" if verdict.per_state[s] else "non-FT fixpoint"
            return PropVerdict(name, True, False, {"state": automaton.state_name(s)}, kind)
    return PropVerdict(name, True, True, None, "FT states are exactly the fixpoints")
