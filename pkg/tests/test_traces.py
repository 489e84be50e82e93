from __future__ import annotations

import random

import pytest

from chp.oracle.evaluate import eval_term
from chp.oracle.generators import CHANNELS, G, Generator
from chp.oracle.satisfy import satisfies
from chp.oracle.state import Verdict
from chp.shared.errors import UnsupportedError
from chp.syntax.ast import (
    EPS,
    MU,
    TRUE,
    Add,
    ChanAt,
    ChanName,
    Cmp,
    Concat,
    Forall,
    Item,
    Len,
    Proj,
    Sort,
    Sub,
    Time,
    Val,
    Var,
    nat,
    real,
)
from chp.traces import (
    LinearNat,
    length_facts,
    linear_nat,
    normalize,
    normalize_term,
    prefix_decide,
    simplify_access,
    trace_algebra,
)

H = Var("h", Sort.TRACE)
N = Var("n", Sort.INT)
SENT = Item("c", real(5), MU)


class TestNormalize:
    def test_concatenation_is_right_associated_without_eps(self, t):
        assert normalize(t("(eps + h) + <c, 5, mu> + eps")) == Concat(H, SENT)

    def test_projection_distributes_and_cuts(self, t):
        term = t("(h + <c, 5, mu> + <d, 1, mu>)|{c}")
        assert normalize(term) == Concat(Proj(H, frozenset({"c"})), SENT)

    def test_nested_projections_intersect(self, t):
        assert normalize(t("(h|{c, d})|{d}")) == Proj(H, frozenset({"d"}))

    def test_empty_projection_is_eps(self):
        assert normalize(Proj(H, frozenset())) == EPS

    def test_only_traces(self, t):
        with pytest.raises(TypeError):
            normalize(t("len(h)"))


class TestLinearNat:
    def test_length_unrolls(self, t):
        assert linear_nat(t("len(h + <c, 5, mu>)")) == LinearNat.atom(Len(H)) + LinearNat((), 1)

    def test_constant_subtraction(self):
        assert linear_nat(Sub(nat(3), nat(1))) == LinearNat((), 2)

    def test_truncated_subtraction_stays_atomic(self):
        form = linear_nat(Sub(N, nat(1)))
        assert form.coefficients == ((Sub(N, nat(1)), 1),)

    def test_to_term(self):
        assert (LinearNat.atom(Len(H)) + LinearNat((), 1)).to_term() == Add(Len(H), nat(1))


class TestLengthFacts:
    def test_equal_and_greater(self, f):
        facts = length_facts([f("len(h) = n & len(g) > 0")])
        assert [(fact.relation, fact.index) for fact in facts] == [("=", N), (">", nat(0))]

    def test_reversed_comparison(self, f):
        (fact,) = length_facts([f("0 < len(h)")])
        assert (fact.trace, fact.relation) == (H, ">")

    def test_other_conjuncts_are_ignored(self, f):
        assert length_facts([f("x > 0 | len(h) = 0")]) == []


class TestAccess:
    def test_last_value_of_a_send(self, f):
        assert trace_algebra(f("val((h + <c, 5, mu>)|{c}) > 0")) == f("5 > 0")

    def test_last_time_of_a_send(self, f):
        assert trace_algebra(f("time(h + <c, 5, mu>) <= mu")) == f("mu <= mu")

    def test_length_of_a_send(self, f):
        assert trace_algebra(f("len(h + <c, 5, mu>) > 0")) == f("len(h) + 1 > 0")

    def test_inner_access_needs_a_length_fact(self, f):
        term = Val(Concat(H, SENT), N)
        assert simplify_access(term) == term
        facts = length_facts([f("len(h) > n")])
        assert simplify_access(term, facts) == Val(H, N)

    def test_equal_length_fact_selects_the_item(self, f):
        facts = length_facts([f("len(h) = n")])
        assert simplify_access(Val(Concat(H, SENT), N), facts) == real(5)

    def test_facts_do_not_cross_binders(self, f):
        facts = length_facts([f("len(h) = n")])
        body = Cmp(">", Val(Concat(H, SENT), N), real(0))
        assert trace_algebra(body, facts) == Cmp(">", real(5), real(0))
        assert trace_algebra(Forall(N, body), facts) == Forall(N, body)

    def test_items_on_other_channels_are_projected_away(self, f):
        assert trace_algebra(f("val((h + <d, 5, mu>)|{c}) > 0")) == f("val(h|{c}) > 0")


class TestPrefix:
    def test_ground_prefix(self, t):
        assert prefix_decide(t("<c, 1, 0>"), t("<c, 1, 0> + <d, 2, 1>"))
        assert not prefix_decide(t("<c, 1, 0> + <d, 2, 1>"), t("<c, 1, 0>"))
        assert prefix_decide(t("eps"), t("<c, 1, 0>"))

    def test_different_values_are_not_prefixes(self, t):
        assert not prefix_decide(t("<c, 1, 0>"), t("<c, 2, 0> + <c, 1, 0>"))

    def test_symbolic_traces_are_unsupported(self, t):
        with pytest.raises(UnsupportedError):
            prefix_decide(t("h"), t("h + <c, 1, 0>"))


def _access_base(kind):
    def build(gen):
        te, item, i = gen.trace_term(2), gen.item(), gen.int_term(1)
        expected = {Val: item.value, Time: item.stamp, ChanAt: ChanName(item.chan)}[kind]
        return kind(Concat(te, item), i), expected, Cmp("=", Len(te), i)
    return build


def _access_step(kind):
    def build(gen):
        te, item, i = gen.trace_term(2), gen.item(), gen.int_term(1)
        return kind(Concat(te, item), i), kind(te, i), Cmp(">", Len(te), i)
    return build


def _projection_of_item(inside):
    def build(gen):
        item = gen.item()
        chans = frozenset({item.chan}) if inside else frozenset(CHANNELS) - {item.chan}
        return Proj(item, chans), item if inside else EPS, TRUE
    return build


TRACE_LAWS = {
    "val of the appended item": _access_base(Val),
    "val before the appended item": _access_step(Val),
    "time of the appended item": _access_base(Time),
    "time before the appended item": _access_step(Time),
    "chan of the appended item": _access_base(ChanAt),
    "chan before the appended item": _access_step(ChanAt),
    "projection keeps a listed channel": _projection_of_item(True),
    "projection drops an unlisted channel": _projection_of_item(False),
    "projection of eps": lambda gen: (Proj(EPS, frozenset({"c"})), EPS, TRUE),
    "projection distributes": lambda gen: (
        lambda a, b, chans: (Proj(Concat(a, b), chans), Concat(Proj(a, chans), Proj(b, chans)), TRUE)
    )(gen.trace_term(2), gen.trace_term(2), frozenset({gen.choice(CHANNELS)})),
    "len of eps": lambda gen: (Len(EPS), nat(0), TRUE),
    "len of an item": lambda gen: (Len(gen.item()), nat(1), TRUE),
    "len of a concatenation": lambda gen: (
        lambda a, b: (Len(Concat(a, b)), Add(Len(a), Len(b)), TRUE)
    )(gen.trace_term(2), gen.trace_term(2)),
    "concatenation is associative": lambda gen: (
        lambda a, b, c: (Concat(Concat(a, b), c), Concat(a, Concat(b, c)), TRUE)
    )(gen.trace_term(1), gen.trace_term(1), gen.trace_term(1)),
    "eps is neutral": lambda gen: (
        lambda a: (Concat(EPS, Concat(a, EPS)), a, TRUE)
    )(gen.trace_term(2)),
}


class TestAgainstEvaluation:
    def test_normalize_preserves_values(self):
        gen = Generator(random.Random(21))
        for _ in range(1000):
            te, state = gen.trace_term(3), gen.state()
            assert eval_term(normalize(te), state) == eval_term(te, state), te

    def test_simplify_access_preserves_values(self):
        gen = Generator(random.Random(22))
        for _ in range(1000):
            term = gen.access_term(3) if gen.rng.random() < 0.7 else Len(gen.trace_term(3))
            state = gen.state()
            simplified = simplify_access(normalize_term(term), ())
            assert eval_term(simplified, state) == eval_term(term, state), term

    def test_simplify_access_under_a_true_length_fact(self):
        gen = Generator(random.Random(23))
        checked = 0
        for _ in range(1000):
            term, state = gen.access_term(3), gen.state()
            fact = Cmp(gen.choice(("=", ">")), Len(gen.choice((H, G))), gen.int_term(1))
            if satisfies(state, fact) is not Verdict.TRUE:
                continue
            checked += 1
            simplified = simplify_access(normalize_term(term), length_facts([fact]))
            assert eval_term(simplified, state) == eval_term(term, state), (term, fact)
        assert checked > 100

    @pytest.mark.parametrize("law", sorted(TRACE_LAWS))
    def test_law_holds(self, law):
        gen = Generator(random.Random(law))
        for _ in range(100):
            lhs, rhs, guard = TRACE_LAWS[law](gen)
            state = gen.state()
            if satisfies(state, guard) is not Verdict.TRUE:
                continue
            assert eval_term(lhs, state) == eval_term(rhs, state), (lhs, rhs)
            rewritten = simplify_access(normalize_term(lhs), length_facts([guard]))
            assert eval_term(rewritten, state) == eval_term(lhs, state), lhs
