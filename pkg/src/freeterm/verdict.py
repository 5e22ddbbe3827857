from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class PropVerdict:
    """Outcome of checking one property on one automaton.

    ``applicable`` is False when the property's preconditions do not hold;
    such a verdict counts as passing.
    """

    name: str
    applicable: bool
    holds: bool
    counterexample: Any = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.applicable or self.holds

    @classmethod
    def not_applicable(cls, name: str, detail: str) -> PropVerdict:
        return cls(name, False, True, None, detail)

    def to_dict(self) -> dict:
        out = {
            "property": self.name,
            "status": "not applicable" if not self.applicable else ("pass" if self.holds else "fail"),
            "detail": self.detail,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        out.update(self.extra)
        return out
