"""Coordination-freeness experiments built on the run engine."""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from ..errors import InvalidQuery, PreconditionError, SizeCapExceeded
from ..facts import DistQuery, Fact, adom, default_universe, sorted_facts
from .engine import RunSchedule, RunTrace, policy_deriver, random_partitioning, run
from .network import Network
from .policies import FactIndex, FtReadyPolicy, PerTuplePolicy, SignedReadyPolicy

PAIR_BUDGET = 4**12


def resolve_universe(query: DistQuery, instance, universe, extra=()) -> list[Fact]:
    instance = set(instance)
    if universe is None:
        return default_universe(query, instance, extra)
    universe = sorted_facts(set(universe))
    missing = instance - set(universe)
    if missing:
        raise PreconditionError(f"universe lacks instance facts: {', '.join(map(str, sorted_facts(missing)))}")
    return universe


def _normalize(value):
    return frozenset(value) if isinstance(value, set | frozenset) else value


@dataclass
class TrialOutcome:
    seed: int
    all_ready: bool
    any_ready: bool
    outputs_correct: bool
    final_is_instance: bool
    agrees: bool


@dataclass
class CfVerdict:
    """Predicted FT status of the instance against what the simulations did."""

    predicted_ft: bool
    value: object
    trials: list[TrialOutcome] = field(default_factory=list)

    @property
    def discrepancies(self) -> list[int]:
        return [t.seed for t in self.trials if not t.agrees]

    @property
    def agree(self) -> bool:
        return not self.discrepancies

    def to_dict(self) -> dict:
        return {
            "predicted_ft": self.predicted_ft,
            "value": sorted(self.value, key=str) if isinstance(self.value, frozenset) else self.value,
            "trials": len(self.trials),
            "all_ready_runs": sum(t.all_ready for t in self.trials),
            "runs_with_any_ready": sum(t.any_ready for t in self.trials),
            "discrepancies": self.discrepancies,
            "agree": self.agree,
        }


def _outputs_correct(trace: RunTrace, expected) -> bool:
    return all(_normalize(x) == expected for out in trace.outputs.values() for x in out.values())


def _final_is(trace: RunTrace, facts: Iterable[Fact]) -> bool:
    want = [str(f) for f in sorted_facts(facts)]
    return all(s == want for s in trace.final_states.values())


def check_cf_correct(network: Network, query: DistQuery, instance: Iterable[Fact],
                     universe: Sequence[Fact] | None = None, trials: int = 50, seed: int = 0,
                     max_steps: int = 200) -> CfVerdict:
    """FT status of the instance in the bounded insert-only system versus seeded runs.

    FT predicts that every run ends with all nodes ready and the right
    output; non-FT predicts that no node ever becomes ready.
    """
    instance = set(instance)
    universe = resolve_universe(query, instance, universe)
    policy = FtReadyPolicy(query, universe)
    predicted = policy.is_ft(instance)
    expected = _normalize(query.evaluate(instance))
    verdict = CfVerdict(predicted, expected)
    for i in range(trials):
        s = seed + i
        parts = random_partitioning(network, instance, random.Random(s))
        trace = run(network, parts, policy, RunSchedule(seed=s, max_steps=max_steps), instance)
        correct = _outputs_correct(trace, expected)
        final = _final_is(trace, instance)
        agrees = (trace.all_ready() and correct) if predicted else not trace.any_ready()
        verdict.trials.append(TrialOutcome(s, trace.all_ready(), trace.any_ready(), correct, final, agrees and final))
    return verdict


@dataclass
class TupleVerdict:
    tuple: tuple
    predicted_ft: bool
    truth: bool
    ready_nodes: list[int]
    membership: bool | None
    correct: bool

    def to_dict(self) -> dict:
        return {"tuple": list(self.tuple), "predicted_ft": self.predicted_ft, "truth": self.truth,
                "ready_nodes": self.ready_nodes, "membership": self.membership, "correct": self.correct}


def candidate_outputs(query: DistQuery, instance: Iterable[Fact], width: int) -> list[tuple]:
    consts = sorted(adom(instance) | query.constants, key=lambda a: (isinstance(a, str), str(a)))
    return list(itertools.product(consts, repeat=width))


def per_tuple_ready_run(network: Network, query: DistQuery, instance: Iterable[Fact],
                        universe: Sequence[Fact] | None = None, outputs: Iterable[tuple] | None = None,
                        schedule: RunSchedule = RunSchedule(), partitioning=None) -> tuple[RunTrace, list[TupleVerdict]]:
    """One run with a ready flag per candidate output tuple.

    A flag ``(v, t)`` is correct when, wherever it fired, membership of
    ``t`` at firing time equals membership in ``Q(I)``.
    """
    if query.boolean:
        raise InvalidQuery("per-tuple ready needs a set-valued (select) query")
    instance = set(instance)
    width = len(query.fn.vars)
    outputs = list(outputs) if outputs is not None else candidate_outputs(query, instance, width)
    extra = {c for t in outputs for c in t}
    universe = resolve_universe(query, instance, universe, extra)
    policy = PerTuplePolicy(query, universe, outputs)
    if partitioning is None:
        partitioning = random_partitioning(network, instance, random.Random(schedule.seed))
    trace = run(network, partitioning, policy, schedule, instance)
    truth_set = query.evaluate(instance)
    verdicts = []
    for t in policy.keys:
        key = "(" + ",".join(str(x) for x in t) + ")"
        nodes = trace.ready_nodes(t)
        seen = {trace.outputs[v][key] for v in nodes}
        membership = seen.pop() if len(seen) == 1 else None
        truth = t in truth_set
        correct = all(trace.outputs[v][key] == truth for v in nodes)
        verdicts.append(TupleVerdict(t, policy.members[t].is_ft(instance), truth, nodes, membership, correct))
    return trace, verdicts


def run_with_all_metadata(network: Network, query: DistQuery, instance: Iterable[Fact],
                          schedule: RunSchedule = RunSchedule(), universe: Sequence[Fact] | None = None,
                          partitioning=None) -> RunTrace:
    """A run in the system extended with the ``All()`` flag, injected by a coordinator."""
    instance = set(instance)
    universe = resolve_universe(query, instance, universe)
    policy = FtReadyPolicy(query, universe, with_all=True)
    if partitioning is None:
        partitioning = random_partitioning(network, instance, random.Random(schedule.seed))
    return run(network, partitioning, policy, schedule, instance, coordinator=True)


def load_policy(obj, universe: Sequence[Fact], network: Network) -> dict[Fact, frozenset[int]]:
    """``"all"`` or a mapping from fact text to node lists; must cover the universe."""
    if obj == "all" or obj is None:
        return {f: frozenset(network.nodes) for f in universe}
    out = {}
    for key, nodes in dict(obj).items():
        f = Fact.parse(key) if isinstance(key, str) else key
        out[f] = frozenset(int(v) for v in nodes)
    missing = [f for f in universe if f not in out]
    if missing:
        raise PreconditionError(f"policy does not cover {', '.join(map(str, missing))}")
    for f, nodes in out.items():
        if not nodes or not nodes <= set(network.nodes):
            raise PreconditionError(f"policy for {f} must name existing nodes")
    return out


def negative_complement(instance: Iterable[Fact], universe: Iterable[Fact]) -> set[Fact]:
    """Universe facts over the active domain of ``instance`` that are absent, negated."""
    instance = set(instance)
    dom = adom(instance)
    return {f.negated() for f in universe if f not in instance and set(f.args) <= dom}


def run_policy_aware(network: Network, query: DistQuery, instance: Iterable[Fact], policy="all",
                     schedule: RunSchedule = RunSchedule(), universe: Sequence[Fact] | None = None,
                     partitioning=None) -> RunTrace:
    """A run of the signed system where nodes infer absent facts from a distribution policy."""
    instance = set(instance)
    universe = resolve_universe(query, instance, universe)
    pol = load_policy(policy, universe, network)
    derived = [{t for t in instance if v in pol[t]} for v in network.nodes]
    if partitioning is not None:
        given = [set(partitioning[v]) for v in network.nodes]
        if given != derived:
            raise PreconditionError("partitioning does not match the distribution policy")
    ready = SignedReadyPolicy(query, universe)
    return run(network, derived, ready, schedule, instance, deriver=policy_deriver(pol, universe))


def check_domain_distinct_monotone(query: DistQuery, universe: Sequence[Fact],
                                   budget: int = PAIR_BUDGET) -> tuple[bool, tuple | None]:
    """``Q(I)`` contained in ``Q(I | J)`` whenever every fact of ``J`` uses a constant outside ``adom(I)``.

    Boolean queries read ``true`` as the non-empty answer. Returns the first
    violating ``(I, J)`` as sorted fact lists.
    """
    index = FactIndex(universe)
    k = len(index)
    if 4**k > budget:
        raise SizeCapExceeded(f"{k} facts give {4**k} instance pairs, over the budget of {budget}", estimate=4**k)
    values = [query.evaluate(index.subset(m)) for m in range(1 << k)]

    def contained(a, b) -> bool:
        if isinstance(a, bool):
            return (not a) or b
        return set(a) <= set(b)

    args = [set(f.args) for f in index.facts]
    for i_mask in range(1 << k):
        dom = adom(index.subset(i_mask))
        distinct = sum(1 << j for j in range(k) if not args[j] <= dom)
        j_mask = distinct
        while True:
            if not contained(values[i_mask], values[i_mask | j_mask]):
                return False, ([str(f) for f in index.subset(i_mask)], [str(f) for f in index.subset(j_mask)])
            if j_mask == 0:
                break
            j_mask = (j_mask - 1) & distinct
    return True, None
