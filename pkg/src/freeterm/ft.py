"""Deciding free-termination states.

``all_ft_states`` is the linear-time SCC algorithm; ``ft_oracle`` re-checks
the definition state by state and exists to test it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .automaton import Query, TransitionGraph, _check_state
from .errors import SizeCapExceeded

ORACLE_CAP = 4096


@dataclass(frozen=True)
class FtVerdict:
    per_state: tuple[bool, ...]
    witness: dict[int, int] = field(default_factory=dict)

    @property
    def ft_states(self) -> list[int]:
        return [s for s, ok in enumerate(self.per_state) if ok]

    def __contains__(self, s: int) -> bool:
        return self.per_state[s]

    def __len__(self):
        return len(self.per_state)


def is_ft_state(graph: TransitionGraph, query: Query, s: int) -> tuple[bool, int | None]:
    """Whether ``s`` is FT; on failure also the lowest-index reachable state with another value."""
    s = _check_state(graph.num_states, s)
    query.check_against(graph.automaton)
    reached = np.flatnonzero(graph.depths([s]) >= 0)
    differs = reached[query.codes[reached] != query.codes[s]]
    if differs.size:
        return False, int(differs[0])
    return True, None


def all_ft_states(graph: TransitionGraph, query: Query) -> FtVerdict:
    query.check_against(graph.automaton)
    is_ft, witness = kernels.ft_sweep(
        graph.num_states, graph.indptr, graph.indices, graph.rindptr, graph.rindices,
        graph.scc_id, graph.num_sccs, np.ascontiguousarray(query.codes, dtype=np.intp),
    )
    per_state = tuple(bool(x) for x in np.asarray(is_ft).tolist())
    wit = {s: int(w) for s, w in enumerate(np.asarray(witness).tolist()) if w >= 0}
    return FtVerdict(per_state, wit)


def ft_oracle(graph: TransitionGraph, query: Query, cap: int = ORACLE_CAP) -> FtVerdict:
    """Definitional check: BFS from every state, compare every reached value.

    Independent of the SCC machinery on purpose. Witnesses are the
    lowest-index differing state, which need not match ``all_ft_states``.
    """
    n = graph.num_states
    if n > cap:
        raise SizeCapExceeded(f"oracle limited to {cap} states, got {n}", estimate=n)
    query.check_against(graph.automaton)
    delta = graph.automaton.delta.tolist()
    values = query.values
    per_state = []
    witness = {}
    for s in range(n):
        seen = {s}
        todo = deque([s])
        while todo:
            v = todo.popleft()
            for w in delta[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        bad = sorted(t for t in seen if values[t] != values[s])
        per_state.append(not bad)
        if bad:
            witness[s] = bad[0]
    return FtVerdict(tuple(per_state), witness)


def verify_witnesses(graph: TransitionGraph, query: Query, verdict: FtVerdict) -> bool:
    """Re-check every stored witness: reachable and of a different value."""
    for s, w in verdict.witness.items():
        if verdict.per_state[s]:
            return False
        if query.values[w] == query.values[s] or graph.depths([s])[w] < 0:
            return False
    return all(s in verdict.witness for s, ok in enumerate(verdict.per_state) if not ok)


def classify_figure1_category(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None) -> int:
    """One of four free-termination scenarios.

    1: every state reaches an FT state and all FT states agree on the value;
    2: every state reaches an FT state but FT values differ;
    3: there is no FT state;
    4: some states cannot reach any FT state.
    """
    verdict = verdict or all_ft_states(graph, query)
    ft = verdict.ft_states
    if not ft:
        return 3
    reaching = graph.reverse_depths(ft)
    if np.any(reaching < 0):
        return 4
    return 1 if len({query.values[s] for s in ft}) == 1 else 2


def ft_report(graph: TransitionGraph, query: Query, verdict: FtVerdict | None = None) -> dict:
    """The ``analyze`` report core: FT states, category, witnesses (by state name)."""
    verdict = verdict or all_ft_states(graph, query)
    name = graph.automaton.state_name
    return {
        "ft_states": [name(s) for s in verdict.ft_states],
        "category": classify_figure1_category(graph, query, verdict),
        "witnesses": {name(s): name(w) for s, w in sorted(verdict.witness.items())},
    }
