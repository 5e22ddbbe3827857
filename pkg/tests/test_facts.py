import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeterm.errors import InvalidQuery, SizeCapExceeded
from freeterm.facts import FRESH, Fact, adom, default_universe, membership_query, parse_facts, parse_query


def F(text):
    return Fact.parse(text)


def test_fact_parse_and_print():
    f = F("R(a, 1)")
    assert f == Fact("R", ("a", 1))
    assert str(f) == "R(a,1)"
    assert F("-S(c)") == Fact("S", ("c",), False)
    assert str(F("-S(c)")) == "-S(c)"
    assert F("Flag") == Fact("Flag")
    assert F("Flag").arity == 0
    with pytest.raises(InvalidQuery):
        F("1bad(x)")


def test_fact_json_roundtrip():
    for f in [F("R(a,1)"), F("-S(c)"), F("Z")]:
        assert Fact.from_json(f.to_json()) == f
    assert Fact.from_json("R(b)") == F("R(b)")
    with pytest.raises(InvalidQuery):
        Fact.from_json({"tuple": [1]})


def test_negation_helpers():
    f = F("R(a)")
    assert f.negated().negated() == f
    assert f.negated().positive_form() == f


def test_parse_facts_and_adom():
    facts = parse_facts("R(a,b), S(c), T")
    assert len(facts) == 3
    assert adom(facts) == {"a", "b", "c"}


@pytest.mark.parametrize("text,facts,expected", [
    ("exists_R", "R(1)", True),
    ("exists_R", "S(1)", False),
    ("not_exists_S", "R(1)", True),
    ("(and R(c) (not S(c)))", "R(c)", True),
    ("(and R(c) (not S(c)))", "R(c), S(c)", False),
    ("(exists x (and R(x) (not S(x))))", "R(a), S(a), R(b)", True),
    ("(forall x R(x))", "R(a), S(b)", False),
    ("(count-ge 2 R)", "R(a), R(b), S(a)", True),
    ("(count-ge 3)", "R(a), R(b)", False),
    ("(above {R(a),R(b)} {S(c)})", "R(a), S(c)", True),
    ("(above {R(a),R(b)} {S(c)})", "R(a)", False),
    ("(exists x (and Val(x) (gt x 10)))", "Val(3), Val(12)", True),
    ("(exists x (and Val(x) (gt x 10)))", "Val(3)", False),
    ("(or false (eq 1 1))", "", True),
])
def test_boolean_queries(text, facts, expected):
    q = parse_query(text)
    assert q.boolean
    assert q.evaluate(parse_facts(facts)) is expected


def test_negative_facts_are_ignored_by_queries():
    q = parse_query("not_exists_S")
    assert q.evaluate([F("-S(a)")]) is True


def test_select_and_membership():
    q = parse_query("(select x (and R(x) (not S(x))))")
    assert not q.boolean
    inst = parse_facts("R(a), R(b), S(b)")
    assert q.evaluate(inst) == {("a",)}
    m = membership_query(q, ("b",))
    assert m.boolean and m.evaluate(inst) is False
    assert membership_query(q, ("a",)).evaluate(inst) is True
    with pytest.raises(InvalidQuery):
        membership_query(parse_query("exists_R"), ("a",))


def test_query_metadata():
    q = parse_query("(and R(c,1) (exists S))")
    assert q.relations == {"R": 2, "S": None}
    assert q.constants == {"c", 1}


@pytest.mark.parametrize("bad", ["", "(and R(a)", ")", "(frob x)", "(not a b)", "(and R(a)) extra",
                                 "(and R(a) R(a,b))", "(count-ge x)", "(select (and))"])
def test_parse_errors(bad):
    with pytest.raises(InvalidQuery):
        parse_query(bad)


def test_default_universe():
    q = parse_query("(and R(c) (not S(c)))")
    u = default_universe(q, [F("R(c)")])
    assert set(u) == {F("R(c)"), F("S(c)"), F(f"R({FRESH})"), F(f"S({FRESH})")}
    with pytest.raises(SizeCapExceeded):
        default_universe(parse_query("(exists x E(x,x))"), parse_facts("E(a,b), E(b,c), E(c,d), E(d,e)"))


@given(st.lists(st.sampled_from(["R(a)", "R(b)", "S(a)", "S(b)", "T"]), max_size=5))
def test_and_or_not_semantics(items):
    inst = {F(x) for x in items}
    a = parse_query("R(a)").evaluate(inst)
    b = parse_query("S(b)").evaluate(inst)
    assert parse_query("(and R(a) S(b))").evaluate(inst) == (a and b)
    assert parse_query("(or R(a) S(b))").evaluate(inst) == (a or b)
    assert parse_query("(not (and R(a) S(b)))").evaluate(inst) == (not (a and b))
