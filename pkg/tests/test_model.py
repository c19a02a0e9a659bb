import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from icleak.errors import CapExceeded, ValidationError
from icleak.model import (AdversarySpec, Distribution, GuessBudget, Instance, LazyProduct, Layout, conditional,
                          load_instance, marginal, product_extend)


def dists(max_n=3, q_values=(2, 3)):
    @st.composite
    def build(draw):
        q = draw(st.sampled_from(q_values))
        n = draw(st.integers(1, max_n if q == 2 else 2))
        w = draw(st.lists(st.integers(1, 9), min_size=q**n, max_size=q**n))
        return Distribution(q, range(1, n + 1), w, sum(w))
    return build()


# load_instance

def test_load_three_message_document():
    inst, dist, adv, known = load_instance({"n": 3, "q": 2, "side_info": [[], [3], [2]], "distribution": "uniform"})
    assert (inst.n, inst.q) == (3, 2)
    assert inst.side_info == (frozenset(), frozenset({3}), frozenset({2}))
    assert dist.is_uniform and adv.P == () and adv.c(1) == 1 and known == {}


def test_zero_probability_rejected():
    doc = {"n": 2, "q": 2, "side_info": [[2], [1]],
           "distribution": {"joint": {"00": "0", "01": "1/2", "10": "1/4", "11": "1/4"}}}
    with pytest.raises(ValidationError, match="full support violated"):
        load_instance(doc)


def test_biased_product_document(four_message):
    inst, dist, adv, known = four_message
    assert inst.side_info == tuple(frozenset({j}) for j in (4, 3, 2, 1))
    assert marginal(dist, [1]).probs == (Fraction(1, 4), Fraction(3, 4))
    assert adv.P == (4,) and adv.Q == (1, 2, 3)
    assert known["R_Q"].expression == "3 - 0.75*log2(3)"


@pytest.mark.parametrize("doc, msg", [
    ({"n": 2, "q": 2, "side_info": [[1], []], "distribution": "uniform"}, "own message"),
    ({"n": 2, "q": 2, "side_info": [[3], []], "distribution": "uniform"}, "outside"),
    ({"n": 2, "q": 1, "side_info": [[], []], "distribution": "uniform"}, "q"),
    ({"n": 1, "q": 2, "side_info": [[]], "distribution": {"joint": {"0": "1/2", "1": "1/3"}}}, "sum"),
])
def test_malformed_documents(doc, msg):
    with pytest.raises(ValidationError, match=msg):
        load_instance(doc)


def test_missing_distribution_means_uniform():
    _, dist, _, _ = load_instance({"n": 1, "q": 3, "side_info": [[]]})
    assert dist.is_uniform and dist.size == 3


def test_malformed_json_text():
    with pytest.raises(ValidationError):
        load_instance("{not json")


def test_json_text_and_capability_table():
    text = json.dumps({"n": 2, "q": 2, "side_info": [[], []], "distribution": "uniform",
                       "adversary": {"known": [1], "capability": {"1": 1, "3": 2}}})
    _, _, adv, _ = load_instance(text)
    assert [adv.c(t) for t in (1, 2, 3, 7)] == [1, 1, 2, 2]


def test_guess_budget_must_not_decrease():
    with pytest.raises(ValidationError, match="non-decreasing"):
        GuessBudget.from_mapping({1: 3, 2: 1})


def test_adversary_needs_a_target():
    with pytest.raises(ValidationError):
        AdversarySpec(2, {1, 2})


# tuple index

@pytest.mark.parametrize("q, k, t", [(2, 3, 1), (2, 2, 3), (3, 2, 2), (2, 4, 4), (4, 2, 4)])
def test_index_round_trip_exhaustive(q, k, t):
    lay = Layout(q, tuple(range(1, k + 1)), t)
    assert lay.size <= 2**16
    seen = set()
    for x in range(lay.size):
        d = lay.digits(x)
        assert lay.index(d) == x
        assert lay.parse(lay.format(x)) == x
        seen.add(d)
    assert len(seen) == lay.size


def test_index_order_is_message_major():
    lay = Layout(2, (1, 2), 2)
    # message 1 = (0,1), message 2 = (1,0)
    assert lay.index((0, 1, 1, 0)) == 0b0110
    assert lay.blocks(0b0110) == (1, 2)


# product_extend

def test_product_extend_identity(correlated):
    assert product_extend(correlated, 1) is correlated


def test_product_extend_figure_entry(correlated):
    d2 = product_extend(correlated, 2)
    lay = d2.layout
    # x_1 = (0,1) and x_2 = (0,1): time 1 is (0,0), time 2 is (1,1)
    assert d2.prob(lay.index((0, 1, 0, 1))) == Fraction(1, 25)


def test_product_extend_uniform():
    d = product_extend(Distribution.uniform(2, (1, 2)), 3)
    assert set(d.probs) == {Fraction(1, 64)}


def test_product_extend_lazy_and_cap(correlated):
    lazy = product_extend(correlated, 6, cap=100)
    assert isinstance(lazy, LazyProduct)
    assert sum(p for _, p in lazy.items()) == 1
    with pytest.raises(CapExceeded):
        product_extend(correlated, 6, cap=100, lazy=False)
    assert lazy.materialize().probs == product_extend(correlated, 6).probs


@settings(max_examples=40, deadline=None)
@given(dists(max_n=2), st.integers(1, 2), st.integers(1, 2))
def test_product_extend_splits(dist, t1, t2):
    whole = product_extend(dist, t1 + t2)
    a, b = product_extend(dist, t1), product_extend(dist, t2)
    la, lb, lw = a.layout, b.layout, whole.layout
    for x in range(whole.size):
        blocks = lw.blocks(x)
        xa = la.from_blocks([blk // dist.q**t2 for blk in blocks])
        xb = lb.from_blocks([blk % dist.q**t2 for blk in blocks])
        assert whole.prob(x) == a.prob(xa) * b.prob(xb)


# marginal / conditional

def test_marginal_first_message(correlated):
    assert marginal(correlated, [1]).probs == (Fraction(3, 10), Fraction(7, 10))


def test_marginal_full_and_empty(correlated):
    assert marginal(correlated, (1, 2)) is correlated
    e = marginal(correlated, ())
    assert e.size == 1 and e.probs == (Fraction(1),)


def test_marginal_rejects_foreign_messages(correlated):
    with pytest.raises(ValidationError):
        marginal(correlated, [3])


def test_conditional_on_first_message(correlated):
    assert conditional(correlated, [1], (1,)).probs == (Fraction(3, 7), Fraction(4, 7))


def test_conditional_on_nothing_is_marginal(correlated):
    assert conditional(correlated, (), ()).probs == correlated.probs


def test_conditional_of_product_is_marginal():
    d = Distribution.product(3, [[Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)], [Fraction(1, 5), Fraction(2, 5), Fraction(2, 5)]])
    for a in range(3):
        assert conditional(d, [1], (a,)).probs == marginal(d, [2]).probs


@settings(max_examples=60, deadline=None)
@given(dists(), st.data())
def test_marginal_times_conditional_is_joint(dist, data):
    A = tuple(i for i in dist.scope if data.draw(st.booleans()))
    B = tuple(i for i in dist.scope if i not in A)
    mA = marginal(dist, A)
    la, lb = Layout(dist.q, A), Layout(dist.q, B)
    for a in range(la.size):
        cond = conditional(dist, A, a)
        for b in range(lb.size):
            digits = {}
            for i, v in zip(A, la.digits(a)):
                digits[i] = v
            for i, v in zip(B, lb.digits(b)):
                digits[i] = v
            x = dist.layout.index(tuple(digits[i] for i in dist.scope))
            assert mA.prob(a) * cond.prob(b) == dist.prob(x)


@settings(max_examples=40, deadline=None)
@given(dists())
def test_distributions_sum_to_one(dist):
    assert sum(dist.probs) == 1
    for k in range(len(dist.scope) + 1):
        assert sum(marginal(dist, dist.scope[:k]).probs) == 1


def test_instance_subproblem():
    inst = Instance.from_lists(2, [[4], [3], [2], [1]])
    assert inst.subproblem((1, 2, 3)) == {1: (), 2: (3,), 3: (2,)}
    assert inst.describe() == "(1|4), (2|3), (3|2), (4|1)"
