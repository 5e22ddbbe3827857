"""Finite partial orders stored as up-set bitsets.

Element ``a`` has an up-set ``up[a]``, a Python int whose bit ``b`` is set
iff ``a <= b``. Comparisons are a shift and a mask, which keeps the
quadratic monotonicity checks cheap.
"""

from collections.abc import Hashable, Iterable, Sequence

from .errors import InvalidQuery, PreconditionError


def iter_bits(mask):
    """Yield the indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_of(elements):
    mask = 0
    for e in elements:
        mask |= 1 << e
    return mask


class PartialOrder:
    """A partial order over ``0 .. size-1``."""

    def __init__(self, size: int, up: Sequence[int]):
        if len(up) != size:
            raise ValueError("one up-set per element required")
        self.size = size
        self._up = list(up)

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[tuple[int, int]]) -> "PartialOrder":
        """Reflexive-transitive closure of ``pairs``; rejects cycles."""
        succ = [[] for _ in range(size)]
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise ValueError(f"pair ({a}, {b}) outside the domain")
            succ[a].append(b)
        up = []
        for a in range(size):
            seen = 1 << a
            todo = [a]
            while todo:
                v = todo.pop()
                for w in succ[v]:
                    if not seen >> w & 1:
                        seen |= 1 << w
                        todo.append(w)
            up.append(seen)
        order = cls(size, up)
        for a in range(size):
            for b in iter_bits(up[a]):
                if b != a and up[b] >> a & 1:
                    raise PreconditionError(f"relation is not antisymmetric: {a} and {b} are mutually related")
        return order

    @classmethod
    def discrete(cls, size: int) -> "PartialOrder":
        return cls(size, [1 << a for a in range(size)])

    def up_set(self, a: int) -> int:
        return self._up[a]

    def le(self, a: int, b: int) -> bool:
        return bool(self.up_set(a) >> b & 1)

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.le(a, b)

    def comparable(self, a: int, b: int) -> bool:
        return self.le(a, b) or self.le(b, a)

    def above(self, a: int) -> list[int]:
        return list(iter_bits(self.up_set(a)))

    def is_valid(self) -> bool:
        """Exhaustive reflexivity, antisymmetry and transitivity check."""
        for a in range(self.size):
            ua = self.up_set(a)
            if not ua >> a & 1:
                return False
            for b in iter_bits(ua):
                ub = self.up_set(b)
                if b != a and ub >> a & 1:
                    return False
                if ub & ~ua:
                    return False
        return True

    def is_antichain(self, elements: Iterable[int]) -> bool:
        elems = sorted(set(elements))
        for i, a in enumerate(elems):
            for b in elems[i + 1:]:
                if self.comparable(a, b):
                    return False
        return True

    def minimal(self, elements: Iterable[int]) -> list[int]:
        """Minimal members of ``elements``, ascending."""
        elems = sorted(set(elements))
        mask = bits_of(elems)
        out = []
        for a in elems:
            # a is minimal iff no other member lies strictly below it
            if not any(b != a and self.le(b, a) for b in iter_bits(mask)):
                out.append(a)
        return out

    def maximal_elements(self) -> list[int]:
        return [a for a in range(self.size) if self.up_set(a) == 1 << a]

    def minimal_elements(self) -> list[int]:
        return [b for b in range(self.size) if not any(a != b and self.le(a, b) for a in range(self.size))]

    def upward_closure(self, elements: Iterable[int]) -> int:
        mask = 0
        for a in elements:
            mask |= self.up_set(a)
        return mask


class ValueOrder:
    """A partial order over arbitrary hashable query results."""

    def __init__(self, values: Iterable[Hashable], pairs: Iterable[tuple[Hashable, Hashable]] = ()):
        self.values = tuple(dict.fromkeys(values))
        self._index = {v: i for i, v in enumerate(self.values)}
        self.order = PartialOrder.from_pairs(
            len(self.values), [(self.index(u), self.index(v)) for u, v in pairs]
        )

    def index(self, value) -> int:
        try:
            return self._index[value]
        except (KeyError, TypeError):
            raise InvalidQuery(f"value {value!r} is not in the result order") from None

    def __contains__(self, value) -> bool:
        try:
            return value in self._index
        except TypeError:
            return False

    def le(self, u, v) -> bool:
        return self.order.le(self.index(u), self.index(v))

    def is_maximal(self, u) -> bool:
        i = self.index(u)
        return self.order.up_set(i) == 1 << i

    def is_minimal(self, u) -> bool:
        i = self.index(u)
        return not any(j != i and self.order.le(j, i) for j in range(self.order.size))

    def reversed(self) -> "ValueOrder":
        return ValueOrder(
            self.values,
            [(v, u) for u in self.values for v in self.values if u != v and self.le(u, v)],
        )

    def pairs(self) -> list[tuple]:
        """Every strict pair ``(u, v)`` with ``u < v``."""
        return [(u, v) for u in self.values for v in self.values if u != v and self.le(u, v)]


BOOL_ORDER = ValueOrder([False, True], [(False, True)])
