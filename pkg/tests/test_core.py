from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from _gen import dst_params
from dstchoice.core import (ChoiceData, DstParams, LinearOrder, LuceWeights, MenuWeights, ReferenceModel,
                            dst_prob, dst_prob_tie_aware, dst_rcf, reference_prob, replica_limit_prob,
                            sample_choices, subsets)
from dstchoice.exceptions import (AlternativeNotInMenu, DomainError, EmptyMenuCollection, InvalidReplicaCount,
                                  MenuOutsideUniverse, NormalizationError, UniverseMismatch)

EXAMPLE = DstParams(F(1, 5), "x>y>z>t", {"x": F(1, 10), "y": F(3, 10), "z": F(3, 10), "t": F(3, 10)})


def test_grand_set_probability():
    assert dst_prob(EXAMPLE, "xyzt", "x") == F(7, 25)


def test_tripleton_probabilities():
    assert dst_prob(EXAMPLE, "xyz", "x") == F(11, 35)
    assert dst_prob(EXAMPLE, "xyz", "y") == dst_prob(EXAMPLE, "xyz", "z") == F(12, 35)


def test_singletons_are_degenerate():
    rho = dst_rcf(EXAMPLE)
    assert rho.get("x", frozenset("x")) == 1


def test_weights_are_normalised():
    w = LuceWeights({"a": 2, "b": 6})
    assert w["a"] == pytest.approx(0.25)


@pytest.mark.parametrize("alpha", [0, 1, -0.1, 1.5])
def test_alpha_outside_unit_interval_rejected(alpha):
    with pytest.raises(DomainError):
        DstParams(alpha, "x>y", {"x": 1, "y": 1})


def test_universe_mismatch():
    with pytest.raises(UniverseMismatch):
        DstParams(0.5, "x>y", {"x": 1, "z": 1})


def test_query_outside_menu():
    with pytest.raises(AlternativeNotInMenu):
        dst_prob(EXAMPLE, "xy", "z")


def test_choice_data_validation():
    with pytest.raises(NormalizationError):
        ChoiceData("xy", {"xy": {"x": 0.5, "y": 0.6}})
    with pytest.raises(MenuOutsideUniverse):
        ChoiceData("xy", {"xz": {"x": 0.5, "z": 0.5}})
    with pytest.raises(AlternativeNotInMenu):
        ChoiceData("xyz", {"xy": {"x": 0.5, "z": 0.5}})


def test_reference_models():
    order, w = LinearOrder.parse("x>y"), {"x": 1, "y": 3}
    assert reference_prob(ReferenceModel.LUCE, order, w, "xy", "x") == pytest.approx(0.25)
    assert reference_prob(ReferenceModel.MAXIMIZER, order, w, "xy", "x") == 1


def test_red_bus_value():
    a = F(1, 4)
    w = {"t": F(1, 2), "r": F(1), "b": F(1)}
    assert dst_prob_tie_aware(a, [{"t"}, {"r", "b"}], w, "trb", "t") == F(2, 5)
    assert dst_prob_tie_aware(a, [{"t"}, {"r", "b"}], w, "rb", "r") == F(1, 2)


def test_replicas():
    p = DstParams(0.3, "x>y>z", {"x": 0.2, "y": 0.5, "z": 0.3})
    assert replica_limit_prob(p, "xyz", "y", 0, "x") == pytest.approx(dst_prob(p, "xyz", "x"))
    gaps = [abs(replica_limit_prob(p, "xyz", "y", n, "x") - 0.3) for n in (1, 10, 100, 1000)]
    assert gaps == sorted(gaps, reverse=True)
    assert replica_limit_prob(p, "xyz", "y", 10 ** 6, "y") < 1e-5
    with pytest.raises(InvalidReplicaCount):
        replica_limit_prob(p, "xyz", "y", -1, "x")


def test_sampler_is_reproducible():
    a = sample_choices(EXAMPLE, subsets("xyzt", 2), n=500, seed=11)
    b = sample_choices(EXAMPLE, subsets("xyzt", 2), n=500, seed=11)
    assert a.counts == b.counts
    assert sum(a.menu_counts.values()) == 500


def test_sampler_degenerate_sigma():
    S = frozenset("xy")
    res = sample_choices(EXAMPLE, [S], sigma=MenuWeights({S: 1}), n=50, seed=0)
    assert list(res.counts) == [S]


def test_sampler_close_to_model():
    p = DstParams(0.4, "x>y>z", {"x": 0.2, "y": 0.3, "z": 0.5})
    S = frozenset("xyz")
    res = sample_choices(p, [S], n=200000, seed=1)
    for x in S:
        q = float(dst_prob(p, S, x))
        se = (q * (1 - q) / 200000) ** 0.5
        assert abs(res.data.get(x, S) - q) < 4 * se


def test_sampler_needs_menus():
    with pytest.raises(EmptyMenuCollection):
        sample_choices(EXAMPLE, [], n=5)


@settings(max_examples=60, deadline=None)
@given(dst_params(3, 5))
def test_rows_sum_to_one_exactly(p):
    rho = dst_rcf(p)
    for S in rho.menus:
        assert sum(rho.row(S).values()) == 1


@settings(max_examples=60, deadline=None)
@given(dst_params(3, 5))
def test_strict_regularity(p):
    for S in subsets(p.universe, 2):
        for x in S:
            for y in S - {x}:
                assert dst_prob(p, S, x) < dst_prob(p, S - {y}, x)


@settings(max_examples=60, deadline=None)
@given(dst_params(3, 4), st.integers(1, 98))
def test_monotone_in_alpha(p, k):
    a2 = F(k, 100)
    q = DstParams(a2, p.order, p.weights)
    for S in subsets(p.universe, 2):
        best = p.order.best(S)
        for x in S:
            if a2 == p.alpha:
                continue
            up = (q.alpha > p.alpha) == (dst_prob(q, S, x) > dst_prob(p, S, x))
            assert up == (x == best)


@settings(max_examples=40, deadline=None)
@given(dst_params(3, 4))
def test_tie_aware_reduces_to_linear_order(p):
    classes = [{x} for x in p.order.ranking]
    for S in subsets(p.universe, 2):
        for x in S:
            assert dst_prob_tie_aware(p.alpha, classes, p.weights, S, x) == dst_prob(p, S, x)
