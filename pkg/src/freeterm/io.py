"""JSON automaton files and DOT export."""

from __future__ import annotations

import json
from pathlib import Path

from .automaton import Query, Semiautomaton
from .errors import InvalidAutomaton, InvalidQuery


def _thaw(value):
    if isinstance(value, frozenset):
        return sorted((_thaw(v) for v in value), key=lambda x: json.dumps(x, sort_keys=True))
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


def to_document(automaton: Semiautomaton, query: Query) -> dict:
    doc = {
        "states": automaton.num_states,
        "labels": list(automaton.labels),
        "start": automaton.start,
        "delta": automaton.delta.tolist(),
        "query": {
            "values": [_thaw(v) for v in query.values],
            "order": None if query.order is None else [[_thaw(u), _thaw(v)] for u, v in query.order.pairs()],
        },
    }
    if automaton.state_names is not None:
        doc["state_names"] = list(automaton.state_names)
    if automaton.meta:
        doc["meta"] = automaton.meta
    return doc


def dumps(automaton: Semiautomaton, query: Query) -> str:
    """Canonical serialization: one line, sorted keys, trailing newline."""
    return json.dumps(to_document(automaton, query), sort_keys=True) + "\n"


def save(path, automaton: Semiautomaton, query: Query) -> None:
    Path(path).write_text(dumps(automaton, query), encoding="utf-8")


def _field(doc: dict, key: str, kind, where: str = ""):
    if key not in doc:
        raise InvalidAutomaton(f"missing field {where}{key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InvalidAutomaton(f"field {where}{key!r} has the wrong type ({type(value).__name__})")
    return value


def from_document(doc: dict, check_reachable: bool = True) -> tuple[Semiautomaton, Query]:
    if not isinstance(doc, dict):
        raise InvalidAutomaton("automaton file must hold a JSON object")
    n = _field(doc, "states", int)
    labels = _field(doc, "labels", list)
    delta = _field(doc, "delta", list)
    start = doc.get("start")
    if start is not None and not isinstance(start, int):
        raise InvalidAutomaton("field 'start' must be an integer or null")
    if len(delta) != n:
        raise InvalidAutomaton(f"field 'delta' has {len(delta)} rows for {n} states")
    for s, row in enumerate(delta):
        if not isinstance(row, list) or len(row) != len(labels):
            raise InvalidAutomaton(f"delta[{s}] must list one target per label ({len(labels)}); the table is not total")
        for lab, t in enumerate(row):
            if not isinstance(t, int) or isinstance(t, bool):
                raise InvalidAutomaton(f"delta[{s}][{lab}] is not a state index")
    automaton = Semiautomaton(delta, labels, start, doc.get("state_names"), doc.get("meta"),
                              check_reachable=check_reachable)
    qdoc = _field(doc, "query", dict)
    values = _field(qdoc, "values", list, "query.")
    if len(values) != n:
        raise InvalidQuery(f"field 'query.values' has {len(values)} entries for {n} states")
    order = qdoc.get("order")
    if order is not None:
        if not all(isinstance(p, list) and len(p) == 2 for p in order):
            raise InvalidQuery("field 'query.order' must be a list of [u, v] pairs")
        order = [tuple(p) for p in order]
    return automaton, Query(values, order)


def loads(text: str, check_reachable: bool = True) -> tuple[Semiautomaton, Query]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidAutomaton(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_document(doc, check_reachable)


def load(path, check_reachable: bool = True) -> tuple[Semiautomaton, Query]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidAutomaton(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, check_reachable)


def _quote(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _default_accept(query: Query):
    if query.order is not None and all(isinstance(v, bool) for v in query.domain):
        return True
    if set(query.domain) <= {True, False}:
        return True
    return None


def to_dot(automaton: Semiautomaton, query: Query, accept=..., highlight=(), name: str = "automaton") -> str:
    """Graphviz source: one node per state, parallel edge labels merged with commas.

    States whose value equals ``accept`` (by default ``True`` for Boolean
    queries) get a double border; ``highlight`` states are filled.
    """
    if accept is ...:
        accept = _default_accept(query)
    highlight = set(highlight)
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    if automaton.start is not None:
        lines.append('  __start [shape=point, label=""];')
    for s in range(automaton.num_states):
        value = query.values[s]
        label = automaton.state_name(s)
        if not isinstance(value, bool):
            label = f"{label}\\n{_thaw(value)}"
        attrs = [f"label={_quote(label)}"]
        if accept is not None and type(value) is type(accept) and value == accept:
            attrs.append("shape=doublecircle")
        if s in highlight:
            attrs.append('style=filled, fillcolor="lightgrey"')
        lines.append(f"  n{s} [{', '.join(attrs)}];")
    if automaton.start is not None:
        lines.append(f"  __start -> n{automaton.start};")
    merged: dict[tuple[int, int], list[str]] = {}
    for s, row in enumerate(automaton.delta.tolist()):
        for lab, t in enumerate(row):
            merged.setdefault((s, t), []).append(automaton.labels[lab])
    for (s, t), labs in merged.items():
        lines.append(f"  n{s} -> n{t} [label={_quote(','.join(labs))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
