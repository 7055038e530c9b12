import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from _gen import dst_params, luce_rcf, random_params, random_rcf
from dstchoice.core import DstParams, dst_rcf, subsets
from dstchoice.exceptions import Ambiguous, MissingMenu, RationalityViolation
from dstchoice.identify import (classify_triple, identify, predict, recover_alpha, recover_weights,
                                relative_odds_difference, revealed_preference)

TRUTH = DstParams(F(1, 5), "x>y>z>t", {"x": F(1, 10), "y": F(3, 10), "z": F(3, 10), "t": F(3, 10)})
RHO = dst_rcf(TRUTH)


def test_odds_difference_value():
    assert relative_odds_difference(RHO, "x", "y", "z") == F(1, 4)


def test_odds_difference_vanishes_for_luce():
    rho = luce_rcf({"x": F(1), "y": F(2), "z": F(3)})
    assert relative_odds_difference(rho, "x", "y", "z") == 0


def test_odds_difference_needs_menus():
    rho = dst_rcf(TRUTH, subsets("xyzt", 2, 2))
    with pytest.raises(MissingMenu):
        relative_odds_difference(rho, "x", "y", "z")


def test_sign_pattern_maps_to_order():
    pat = classify_triple(RHO, "x", "y", "z")
    assert pat.signs == (1, -1, -1)
    assert pat.implied_order == ("x", "y", "z")


@pytest.mark.parametrize("order", ["x>y>z", "y>z>x", "z>x>y", "x>z>y", "z>y>x", "y>x>z"])
def test_all_six_patterns(order):
    p = DstParams(F(1, 3), order, {"x": F(1), "y": F(2), "z": F(4)})
    pat = classify_triple(dst_rcf(p), "x", "y", "z")
    assert "".join(pat.implied_order) == order.replace(">", "")


def test_worked_example():
    ident = identify(dst_rcf(TRUTH, subsets("xyzt", 2, 3)))
    assert ident.params.alpha == F(1, 5)
    assert str(ident.params.order) == "x>y>z>t"
    assert ident.params.weights["x"] == F(1, 10)
    assert ident.alpha.max_deviation == 0


def test_lowest_share_can_be_best():
    # x has the lowest probability in every observed menu yet is revealed best
    rho = dst_rcf(TRUTH, subsets("xyzt", 2, 3))
    for S in rho.menus:
        if len(S) >= 2 and "x" in S:
            row = rho.row(S)
            assert row["x"] == min(row.values())
    assert revealed_preference(rho).best("xyzt") == "x"


def test_prediction_in_and_out_of_sample():
    rho = dst_rcf(TRUTH, subsets("xyzt", 2, 3))
    assert predict(TRUTH, "xyz", rho).out_of_sample is False
    out = predict(TRUTH, "xyzt", rho)
    assert out.out_of_sample and out.distribution["x"] == F(7, 25)


def test_luce_data_are_ambiguous():
    with pytest.raises(Ambiguous):
        identify(luce_rcf({"x": F(1), "y": F(2), "z": F(3)}))


def test_random_data_rejected():
    with pytest.raises(RationalityViolation):
        identify(random_rcf(random.Random(1), 4))


def test_float_round_trip():
    rng = random.Random(0)
    for _ in range(30):
        p = random_params(rng, rng.randint(3, 6), exact=False)
        got = identify(dst_rcf(p)).params
        assert got.order == p.order
        assert abs(got.alpha - p.alpha) < 1e-9


@settings(max_examples=50, deadline=None)
@given(dst_params(3, 5))
def test_exact_round_trip(p):
    rho = dst_rcf(p)
    order = revealed_preference(rho)
    assert order == p.order
    alpha = recover_alpha(rho, order).value
    assert alpha == p.alpha
    w = recover_weights(rho, order, alpha)
    assert all(w[x] == p.weights[x] for x in p.universe)


@settings(max_examples=30, deadline=None)
@given(dst_params(3, 4))
def test_identified_model_reproduces_data(p):
    rho = dst_rcf(p)
    assert dst_rcf(identify(rho).params, rho.menus).max_abs_diff(rho) == 0
