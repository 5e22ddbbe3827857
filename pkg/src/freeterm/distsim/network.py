"""Connected undirected networks of nodes ``0 .. n-1``."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..errors import InvalidAutomaton


class InvalidNetwork(InvalidAutomaton):
    pass


@dataclass(frozen=True)
class Network:
    num_nodes: int
    edges: tuple[tuple[int, int], ...] = ()
    _adj: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise InvalidNetwork("a network needs at least one node")
        adj = [set() for _ in range(self.num_nodes)]
        canon = set()
        for u, v in self.edges:
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise InvalidNetwork(f"edge ({u},{v}) mentions an unknown node")
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        seen = {0}
        todo = deque([0])
        while todo:
            for w in self._adj[todo.popleft()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        if len(seen) != self.num_nodes:
            missing = min(set(range(self.num_nodes)) - seen)
            raise InvalidNetwork(f"network is not connected (node {missing} unreachable from node 0)")

    @property
    def nodes(self) -> range:
        return range(self.num_nodes)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    @classmethod
    def line(cls, n: int) -> Network:
        return cls(n, tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def ring(cls, n: int) -> Network:
        return cls(n, tuple((i, (i + 1) % n) for i in range(n)) if n > 2 else tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> Network:
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def from_json(cls, obj: dict) -> Network:
        try:
            nodes = int(obj["nodes"])
            edges = tuple((int(u), int(v)) for u, v in obj.get("edges", ()))
        except (KeyError, TypeError, ValueError):
            raise InvalidNetwork('network must look like {"nodes": N, "edges": [[u, v], ...]}') from None
        return cls(nodes, edges)

    def to_json(self) -> dict:
        return {"nodes": self.num_nodes, "edges": [list(e) for e in self.edges]}
