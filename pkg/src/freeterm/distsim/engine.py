"""Seeded, single-threaded execution of flooding runs.

A run is a random interleaving of produce, consume and ready transitions
followed by a drain phase that floods every held fact to every neighbour
and empties every buffer, so each finished trace is a prefix of a fair and
complete run that already contains its quiescence point.
"""

from __future__ import annotations

import json
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from ..errors import PreconditionError
from ..facts import Fact, adom, sorted_facts
from .network import Network
from .policies import ALL, ReadyPolicy

MAX_RESENDS = 2


@dataclass(frozen=True)
class RunSchedule:
    seed: int = 0
    max_steps: int = 200
    fair: bool = True
    complete: bool = True

    def __post_init__(self):
        if self.max_steps < 0:
            raise PreconditionError("max_steps must be non-negative")


@dataclass
class Configuration:
    """Per-node ``state``, ``buf`` (a multiset kept as a list) and ready flags."""

    state: list[set[Fact]]
    buf: list[list[Fact]]
    ready: list[dict]

    @classmethod
    def initial(cls, partitioning: Sequence[Iterable[Fact]], keys: Sequence) -> Configuration:
        return cls(
            [set(p) for p in partitioning],
            [[] for _ in partitioning],
            [{k: False for k in keys} for _ in partitioning],
        )


def _key_str(key) -> str:
    if key is None:
        return "ready"
    return "(" + ",".join(str(x) for x in key) + ")"


@dataclass
class RunTrace:
    seed: int
    events: list[dict] = field(default_factory=list)
    quiescence_step: int = 0
    final_states: dict[int, list[str]] = field(default_factory=dict)
    ready: dict[int, dict[str, bool]] = field(default_factory=dict)
    outputs: dict[int, dict[str, object]] = field(default_factory=dict)
    coordination: bool = False
    drained: bool = True

    def all_ready(self) -> bool:
        return all(all(flags.values()) for flags in self.ready.values())

    def any_ready(self) -> bool:
        return any(e["kind"] == "ready" for e in self.events)

    def ready_nodes(self, key=None) -> list[int]:
        ks = _key_str(key)
        return sorted(v for v, flags in self.ready.items() if flags.get(ks))

    def first_event(self, kind: str) -> int | None:
        return next((e["step"] for e in self.events if e["kind"] == kind), None)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "events": self.events,
            "quiescence_step": self.quiescence_step,
            "final_states": {str(v): s for v, s in self.final_states.items()},
            "ready": {str(v): r for v, r in self.ready.items()},
            "outputs": {str(v): {k: _jsonable(x) for k, x in o.items()} for v, o in self.outputs.items()},
            "coordination": self.coordination,
            "drained": self.drained,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _jsonable(value):
    if isinstance(value, frozenset | set):
        return sorted((_jsonable(v) for v in value), key=str)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


class _Runner:
    def __init__(self, network: Network, partitioning, policy: ReadyPolicy, schedule: RunSchedule,
                 deriver: Callable[[int, frozenset], Iterable[Fact]] | None = None):
        self.net = network
        self.policy = policy
        self.schedule = schedule
        self.deriver = deriver
        self.rng = random.Random(schedule.seed)
        self.conf = Configuration.initial(partitioning, policy.keys)
        self.sent: dict[tuple[int, int, Fact], int] = {}
        self.derived: set[tuple[int, Fact]] = set()
        self.trace = RunTrace(schedule.seed)
        self.step = 0
        self.outputs: list[dict] = [{} for _ in network.nodes]

    def log(self, node: int, kind: str, **extra):
        self.step += 1
        event = {"step": self.step, "node": node, "kind": kind}
        event.update(extra)
        self.trace.events.append(event)

    # transitions
    def produce(self, v: int, f: Fact, w: int):
        self.conf.buf[w].append(f)
        self.sent[(v, w, f)] = self.sent.get((v, w, f), 0) + 1
        self.log(v, "produce", fact=str(f), to=w)

    def consume(self, v: int, i: int):
        f = self.conf.buf[v].pop(i)
        new = f not in self.conf.state[v]
        self.conf.state[v].add(f)
        self.log(v, "consume", fact=str(f))
        if new:
            self.trace.quiescence_step = self.step

    def derive(self, v: int, f: Fact):
        self.derived.add((v, f))
        self.conf.buf[v].append(f)
        self.log(v, "derive", fact=str(f))

    def fire_ready(self, v: int, keys: set):
        local = frozenset(self.conf.state[v])
        flips = sorted(keys, key=_key_str)
        for k in flips:
            self.conf.ready[v][k] = True
            self.outputs[v][_key_str(k)] = self.policy.output(k, local)
        self.log(v, "ready", keys=[_key_str(k) for k in flips],
                 outputs=[_jsonable(self.outputs[v][_key_str(k)]) for k in flips])

    # option enumeration
    def produce_options(self, v: int, limit: int):
        return [(f, w) for f in sorted_facts(self.conf.state[v]) for w in self.net.neighbors(v)
                if self.sent.get((v, w, f), 0) < limit]

    def derive_options(self, v: int):
        if self.deriver is None:
            return []
        return [f for f in self.deriver(v, frozenset(self.conf.state[v])) if (v, f) not in self.derived]

    def ready_options(self, v: int) -> set:
        pending = {k for k, on in self.conf.ready[v].items() if not on}
        if not pending:
            return set()
        return self.policy.fires(frozenset(self.conf.state[v])) & pending

    def random_phase(self):
        nodes = list(self.net.nodes)
        for _ in range(self.schedule.max_steps):
            v = self.rng.choice(nodes)
            choices = []
            prod = self.produce_options(v, MAX_RESENDS)
            if prod:
                choices.append("produce")
            if self.conf.buf[v]:
                choices.append("consume")
            der = self.derive_options(v)
            if der:
                choices.append("derive")
            rdy = self.ready_options(v)
            if rdy:
                choices.append("ready")
            if not choices:
                continue
            kind = self.rng.choice(choices)
            if kind == "produce":
                self.produce(v, *self.rng.choice(prod))
            elif kind == "consume":
                self.consume(v, self.rng.randrange(len(self.conf.buf[v])))
            elif kind == "derive":
                self.derive(v, self.rng.choice(der))
            else:
                self.fire_ready(v, rdy)

    def drain(self):
        """Flood every held fact once per edge, empty every buffer, take enabled ready steps."""
        while True:
            before = self.step
            for v in self.net.nodes:
                for f in self.derive_options(v):
                    self.derive(v, f)
                if self.schedule.complete:
                    for f, w in self.produce_options(v, 1):
                        self.produce(v, f, w)
                if self.schedule.fair:
                    while self.conf.buf[v]:
                        self.consume(v, self.rng.randrange(len(self.conf.buf[v])))
                rdy = self.ready_options(v)
                if rdy:
                    self.fire_ready(v, rdy)
            if self.step == before:
                return

    def finish(self) -> RunTrace:
        tr = self.trace
        tr.drained = self.schedule.fair and self.schedule.complete
        tr.final_states = {v: [str(f) for f in sorted_facts(s)] for v, s in enumerate(self.conf.state)}
        tr.ready = {v: {_key_str(k): on for k, on in flags.items()} for v, flags in enumerate(self.conf.ready)}
        tr.outputs = {v: o for v, o in enumerate(self.outputs)}
        return tr


def _check_partitioning(network: Network, partitioning) -> list[set[Fact]]:
    if isinstance(partitioning, Mapping):
        parts = [set(partitioning.get(v, ())) for v in network.nodes]
    else:
        parts = [set(p) for p in partitioning]
    if len(parts) != network.num_nodes:
        raise PreconditionError(f"partitioning covers {len(parts)} nodes, network has {network.num_nodes}")
    return parts


def run(network: Network, partitioning, policy: ReadyPolicy, schedule: RunSchedule = RunSchedule(),
        instance: Iterable[Fact] | None = None, coordinator: bool = False,
        deriver: Callable[[int, frozenset], Iterable[Fact]] | None = None) -> RunTrace:
    """Execute one run; ``instance`` (when given) must equal the union of the partitioning.

    With ``coordinator`` an out-of-band oracle injects ``All()`` into every
    node once the data facts are quiescent; the trace is then marked as
    using coordination.
    """
    parts = _check_partitioning(network, partitioning)
    if instance is not None:
        union = set().union(*parts)
        if union != set(instance):
            raise PreconditionError("partitioning does not cover the instance exactly")
    runner = _Runner(network, parts, policy, schedule, deriver)
    runner.random_phase()
    if schedule.fair and schedule.complete:
        runner.drain()
        if coordinator:
            runner.trace.coordination = True
            for v in network.nodes:
                runner.conf.buf[v].append(ALL)
                runner.log(v, "coordinator", fact=str(ALL))
            runner.drain()
    return runner.finish()


def random_partitioning(network: Network, instance: Iterable[Fact], rng: random.Random,
                        copy_prob: float = 0.25) -> list[set[Fact]]:
    """Each fact goes to one random node, and to each other node with ``copy_prob``."""
    parts = [set() for _ in network.nodes]
    for f in sorted_facts(instance):
        home = rng.randrange(network.num_nodes)
        parts[home].add(f)
        for v in network.nodes:
            if v != home and rng.random() < copy_prob:
                parts[v].add(f)
    return parts


def policy_deriver(policy: Mapping[Fact, frozenset[int]], universe: Sequence[Fact]):
    """Negative facts a node may infer: it is responsible for ``t`` yet does not hold it.

    Candidates are the universe facts over the node's local active domain.
    """

    def derive(v: int, local: frozenset) -> list[Fact]:
        positives = {f for f in local if f.positive and f != ALL}
        dom = adom(positives)
        out = []
        for t in universe:
            if v in policy[t] and t not in positives and set(t.args) <= dom and t.negated() not in local:
                out.append(t.negated())
        return out

    return derive
