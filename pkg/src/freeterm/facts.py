"""Relational facts and a small prefix query language over sets of facts.

Grammar (whitespace separated, parenthesised prefix forms)::

    expr := true | false | ATOM
          | (and expr ...) | (or expr ...) | (not expr)
          | (exists REL) | (exists VAR expr) | (forall VAR expr)
          | (count-ge K) | (count-ge K REL)
          | (above SET ...)                 threshold: some listed set is contained
          | (gt TERM TERM) | (lt TERM TERM) | (eq TERM TERM)
          | (select VAR ... expr)           set-valued: bindings that satisfy expr
    ATOM  := R(t1,...,tk) or a bare name (nullary fact)
    SET   := {ATOM,ATOM,...}

Quantifiers range over the active domain of the instance. Terms that are
integers compare numerically. Named shortcuts: ``exists_R`` for
``(exists R)`` and ``not_exists_R`` for its negation.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Callable, Iterable
from dataclasses import dataclass

from .errors import InvalidQuery, SizeCapExceeded

FRESH = "_new"


def _const(text: str):
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    return text


@dataclass(frozen=True, order=True)
class Fact:
    rel: str
    args: tuple = ()
    positive: bool = True

    @classmethod
    def parse(cls, text: str) -> Fact:
        text = text.strip()
        negative = text.startswith("-") and not re.fullmatch(r"-?\d+", text)
        if negative:
            text = text[1:].strip()
        m = re.fullmatch(r"([A-Za-z_][\w]*)\s*(?:\((.*)\))?", text)
        if not m:
            raise InvalidQuery(f"cannot parse fact {text!r}")
        rel, body = m.group(1), m.group(2)
        args = () if not body or not body.strip() else tuple(_const(a) for a in body.split(","))
        return cls(rel, args, not negative)

    @classmethod
    def from_json(cls, obj) -> Fact:
        if isinstance(obj, str):
            return cls.parse(obj)
        try:
            return cls(str(obj["rel"]), tuple(_const(str(a)) if isinstance(a, str) else a for a in obj.get("tuple", ())),
                       bool(obj.get("positive", True)))
        except (KeyError, TypeError, AttributeError):
            raise InvalidQuery(f"fact must look like {{'rel': 'R', 'tuple': [...]}}, got {obj!r}") from None

    def to_json(self) -> dict:
        out = {"rel": self.rel, "tuple": list(self.args)}
        if not self.positive:
            out["positive"] = False
        return out

    def positive_form(self) -> Fact:
        return Fact(self.rel, self.args) if not self.positive else self

    def negated(self) -> Fact:
        return Fact(self.rel, self.args, not self.positive)

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self):
        sign = "" if self.positive else "-"
        if not self.args:
            return sign + self.rel
        return f"{sign}{self.rel}({','.join(str(a) for a in self.args)})"

    def sort_key(self):
        return (self.rel, tuple((isinstance(a, str), str(a)) for a in self.args), self.positive)


def sorted_facts(facts: Iterable[Fact]) -> list[Fact]:
    return sorted(facts, key=Fact.sort_key)


def adom(facts: Iterable[Fact]) -> frozenset:
    return frozenset(a for f in facts for a in f.args)


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_facts(text: str) -> list[Fact]:
    return [Fact.parse(p) for p in split_top_level(text)]


# --- query expressions ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(\{[^{}]*\}|[A-Za-z_][\w]*\([^()]*\)|\(|\)|[^\s()]+)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InvalidQuery(f"unexpected character at offset {pos} in {text!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _read(tokens: list[str], i: int):
    if i >= len(tokens):
        raise InvalidQuery("unexpected end of query expression")
    tok = tokens[i]
    if tok == ")":
        raise InvalidQuery("unbalanced ')' in query expression")
    if tok != "(":
        return tok, i + 1
    items, i = [], i + 1
    while i < len(tokens) and tokens[i] != ")":
        item, i = _read(tokens, i)
        items.append(item)
    if i >= len(tokens):
        raise InvalidQuery("missing ')' in query expression")
    return items, i + 1


@dataclass(frozen=True)
class DistQuery:
    """A compiled query: ``evaluate(facts)`` returns a bool, or a frozenset of tuples for ``select``."""

    text: str
    fn: Callable
    relations: dict
    constants: frozenset
    boolean: bool

    def __call__(self, facts: Iterable[Fact]):
        return self.evaluate(facts)

    def evaluate(self, facts: Iterable[Fact]):
        facts = frozenset(f for f in facts if f.positive)
        return self.fn(facts, {})

    def __str__(self):
        return self.text


class _Compiler:
    def __init__(self):
        self.relations: dict[str, int | None] = {}
        self.constants: set = set()

    def note_rel(self, rel: str, arity: int | None):
        known = self.relations.get(rel)
        if arity is not None and known is not None and known != arity:
            raise InvalidQuery(f"relation {rel} used with arities {known} and {arity}")
        if known is None:
            self.relations[rel] = arity

    def term(self, tok: str, bound: set):
        if tok in bound:
            return lambda env: env[tok]
        value = _const(tok)
        self.constants.add(value)
        return lambda env: value

    def atom(self, tok: str, bound: set):
        fact = Fact.parse(tok)
        self.note_rel(fact.rel, fact.arity)
        terms = [self.term(str(a), bound) for a in fact.args]
        rel = fact.rel
        return lambda facts, env: Fact(rel, tuple(t(env) for t in terms)) in facts

    def compile(self, node, bound: set):
        if isinstance(node, str):
            if node == "true":
                return lambda facts, env: True
            if node == "false":
                return lambda facts, env: False
            m = re.fullmatch(r"(not_)?exists_([A-Za-z_]\w*)", node)
            if m:
                inner = self.compile(["exists", m.group(2)], bound)
                return (lambda facts, env: not inner(facts, env)) if m.group(1) else inner
            return self.atom(node, bound)
        if not node:
            raise InvalidQuery("empty form in query expression")
        op, args = node[0], node[1:]
        if not isinstance(op, str):
            raise InvalidQuery(f"operator expected, got {op!r}")
        if op in ("and", "or"):
            parts = [self.compile(a, bound) for a in args]
            if op == "and":
                return lambda facts, env: all(p(facts, env) for p in parts)
            return lambda facts, env: any(p(facts, env) for p in parts)
        if op == "not":
            if len(args) != 1:
                raise InvalidQuery("'not' takes exactly one argument")
            inner = self.compile(args[0], bound)
            return lambda facts, env: not inner(facts, env)
        if op == "exists" and len(args) == 1:
            rel = args[0]
            if not isinstance(rel, str) or not re.fullmatch(r"[A-Za-z_]\w*", rel):
                raise InvalidQuery("(exists REL) expects a relation name")
            self.note_rel(rel, None)
            return lambda facts, env: any(f.rel == rel for f in facts)
        if op in ("exists", "forall"):
            if len(args) != 2 or not isinstance(args[0], str):
                raise InvalidQuery(f"({op} VAR expr) expected")
            var = args[0]
            body = self.compile(args[1], bound | {var})
            quant = any if op == "exists" else all
            return lambda facts, env: quant(body(facts, {**env, var: c}) for c in adom(facts))
        if op == "count-ge":
            if not args or not isinstance(args[0], str) or not args[0].isdigit() or len(args) > 2:
                raise InvalidQuery("(count-ge K [REL]) expected")
            k = int(args[0])
            if len(args) == 2:
                rel = args[1]
                self.note_rel(rel, None)
                return lambda facts, env: sum(1 for f in facts if f.rel == rel) >= k
            return lambda facts, env: len(facts) >= k
        if op == "above":
            sets = []
            for a in args:
                if not isinstance(a, str) or not (a.startswith("{") and a.endswith("}")):
                    raise InvalidQuery("(above {..} ...) expects brace-delimited fact sets")
                fs = frozenset(parse_facts(a[1:-1]))
                for f in fs:
                    self.note_rel(f.rel, f.arity)
                    self.constants.update(f.args)
                sets.append(fs)
            return lambda facts, env: any(s <= facts for s in sets)
        if op in ("gt", "lt", "eq"):
            if len(args) != 2:
                raise InvalidQuery(f"({op} a b) expected")
            x, y = (self.term(a, bound) for a in args)
            return lambda facts, env: _compare(op, x(env), y(env))
        if op == "select":
            if len(args) < 2 or not all(isinstance(v, str) for v in args[:-1]):
                raise InvalidQuery("(select VAR ... expr) expected")
            vars_ = list(args[:-1])
            body = self.compile(args[-1], bound | set(vars_))
            return _Select(vars_, body)
        raise InvalidQuery(f"unknown operator {op!r}")


class _Select:
    def __init__(self, vars_, body):
        self.vars, self.body = vars_, body

    def __call__(self, facts, env):
        dom = sorted(adom(facts), key=lambda a: (isinstance(a, str), str(a)))
        out = set()
        for combo in itertools.product(dom, repeat=len(self.vars)):
            if self.body(facts, {**env, **dict(zip(self.vars, combo))}):
                out.add(combo)
        return frozenset(out)

    def member(self, facts, tup) -> bool:
        return bool(self.body(facts, dict(zip(self.vars, tup))))


def _compare(op, a, b) -> bool:
    if op == "eq":
        return a == b
    if not (isinstance(a, int) and isinstance(b, int)):
        return False
    return a > b if op == "gt" else a < b


def parse_query(text: str) -> DistQuery:
    tokens = _tokenize(text)
    if not tokens:
        raise InvalidQuery("empty query expression")
    node, i = _read(tokens, 0)
    if i != len(tokens):
        raise InvalidQuery(f"trailing input after query expression: {' '.join(tokens[i:])}")
    comp = _Compiler()
    fn = comp.compile(node, set())
    return DistQuery(text, fn, dict(comp.relations), frozenset(comp.constants), not isinstance(fn, _Select))


def membership_query(query: DistQuery, tup: tuple) -> DistQuery:
    """Boolean query "``tup`` is in the output of ``query``"."""
    if query.boolean:
        raise InvalidQuery("membership queries need a set-valued (select) query")
    sel: _Select = query.fn
    tup = tuple(tup)
    return DistQuery(f"{tup} in {query.text}", lambda facts, env: sel.member(facts, tup),
                     query.relations, query.constants | frozenset(tup), True)


def default_universe(query: DistQuery, instance: Iterable[Fact], extra_constants: Iterable = (),
                     cap: int = 20) -> list[Fact]:
    """Finite fact universe for bounded analyses.

    All facts over the query's and the instance's relations whose constants
    come from the instance, the query, ``extra_constants`` and one fresh
    constant. Raises when that exceeds ``cap`` facts.
    """
    instance = [f.positive_form() for f in instance]
    arity = {}
    for f in instance:
        arity.setdefault(f.rel, f.arity)
    for rel, k in query.relations.items():
        if k is not None:
            arity[rel] = k
        else:
            arity.setdefault(rel, 1)
    consts = set(adom(instance)) | set(query.constants) | set(extra_constants) | {FRESH}
    consts = sorted(consts, key=lambda a: (isinstance(a, str), str(a)))
    facts = set(instance)
    size = len(facts) + sum(len(consts) ** k for k in arity.values())
    if size > 4 * cap:
        raise SizeCapExceeded(f"default fact universe would hold about {size} facts; supply one explicitly",
                              estimate=size)
    for rel, k in arity.items():
        for combo in itertools.product(consts, repeat=k):
            facts.add(Fact(rel, combo))
    if len(facts) > cap:
        raise SizeCapExceeded(f"default fact universe has {len(facts)} facts (cap {cap}); supply one explicitly",
                              estimate=len(facts))
    return sorted_facts(facts)
