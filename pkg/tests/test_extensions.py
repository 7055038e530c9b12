import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from _gen import dst_params, luce_rcf, names, random_params, random_rcf
from dstchoice.axioms import check_iia
from dstchoice.core import ChoiceData, DstParams, dst_rcf, subsets
from dstchoice.exceptions import (DomainError, IncompleteData, InconsistentRanking, NoRepresentation)
from dstchoice.extensions import (DDstParams, HDstParams, block_marschak, check_ddst_axioms, ddst_construct_3,
                                  ddst_identify_consistent, ddst_identify_known_best, ddst_rcf,
                                  ddst_representations_3, hdst_rcf, microfoundation_alpha, rum_approximate,
                                  rum_check, verify_foc)

T = frozenset("xyz")
CYCLIC = DDstParams({T: F(1, 4), frozenset("xy"): F(11, 16), frozenset("xz"): F(1, 16), frozenset("yz"): F(1, 2)},
                    "x>y>z", {"x": F(1, 9), "y": F(4, 9), "z": F(4, 9)})


def test_cyclic_example_data():
    rho = ddst_rcf(CYCLIC)
    assert rho.row(frozenset("xy"))["x"] == F(3, 4)
    assert rho.row(frozenset("yz"))["y"] == F(3, 4)
    assert rho.row(frozenset("xz"))["z"] == F(3, 4)
    assert rho.row(T) == {"x": F(1, 3), "y": F(1, 3), "z": F(1, 3)}


def test_cyclic_example_representations():
    rho = ddst_rcf(CYCLIC)
    reps = ddst_representations_3(rho)
    assert [str(r.order) for r in reps] == ["x>y>z", "y>z>x", "z>x>y"]
    for r in reps:
        assert ddst_rcf(r, rho.menus).max_abs_diff(rho) == 0


def test_construction_alpha_in_interval():
    rho = ddst_rcf(CYCLIC)
    q = ddst_construct_3(rho)
    lo, hi = q.diagnostics["alpha_grand_interval"]
    assert lo < q.alpha(T) < hi


def test_luce_has_no_menu_dependent_form():
    with pytest.raises(NoRepresentation):
        ddst_construct_3(luce_rcf({"x": F(1), "y": F(2), "z": F(3)}))


def test_construction_iff_iia_fails():
    rng = random.Random(21)
    for _ in range(40):
        rho = random_rcf(rng, 3)
        if check_iia(rho).passed:
            continue
        assert ddst_rcf(ddst_construct_3(rho), rho.menus).max_abs_diff(rho) < 1e-9


def _consistent_ddst(rng, n):
    U = names(n)
    w = dict(zip(U, sorted((F(rng.randint(1, 200)) for _ in U), reverse=True)))
    if len(set(w.values())) < n:
        return _consistent_ddst(rng, n)
    alpha = {S: F(rng.randint(1, 99), 100) for S in subsets(U, 2)}
    return DDstParams(alpha, ">".join(U), w), U


def test_consistent_identification():
    rng = random.Random(5)
    for _ in range(20):
        q, U = _consistent_ddst(rng, rng.randint(3, 5))
        rho = ddst_rcf(q)
        got = ddst_identify_consistent(rho)
        assert got.order.ranking == tuple(U)
        assert ddst_rcf(got, rho.menus).max_abs_diff(rho) == 0
        for S in subsets(U, 2):
            if U[0] not in S:
                assert got.alpha(S) == q.alpha(S)
        base = U[-1]
        for x in U[1:]:
            assert got.weights[x] / got.weights[base] == q.weights[x] / q.weights[base]
        # the best item's weight is only bounded; the truth and the chosen value both sit in the bounds
        lo, hi = got.diagnostics["best_weight_interval"]
        assert lo < got.weights[U[0]] < hi
        truth = q.weights[U[0]] / q.weights[base] * got.weights[base]
        assert lo <= truth <= hi


def test_known_best_identification():
    rng = random.Random(6)
    q, U = _consistent_ddst(rng, 4)
    res = ddst_identify_known_best(ddst_rcf(q), U[0])
    assert res.representable and res.order.ranking == tuple(U)


def test_inconsistent_weights_detected():
    q = DDstParams({S: F(1, 3) for S in subsets("xyz", 2)}, "x>y>z", {"x": F(1, 2), "y": F(1, 6), "z": F(1, 3)})
    with pytest.raises(InconsistentRanking):
        ddst_identify_consistent(ddst_rcf(q))


def test_ddst_axiom_reports():
    rng = random.Random(7)
    q, U = _consistent_ddst(rng, 4)
    reports = check_ddst_axioms(ddst_rcf(q), ">".join(U))
    assert all(r.passed for r in reports.values())


def test_block_marschak_needs_supersets():
    rho = dst_rcf(DstParams(0.3, "x>y>z", {"x": 1, "y": 2, "z": 3}), subsets("xyz", 2, 2))
    with pytest.raises(IncompleteData):
        block_marschak(rho, "x", "x")
    with pytest.raises(DomainError):
        block_marschak(rho, "x", "yz")


def test_mixture_strict_interior():
    h = HDstParams([(F(1, 2), DstParams(F(1, 3), "x>y>z", {"x": 1, "y": 2, "z": 3})),
                    (F(1, 2), DstParams(F(1, 4), "z>y>x", {"x": 3, "y": 2, "z": 1}))])
    rep = rum_check(hdst_rcf(h))
    assert rep.passed and rep.strict_interior and rep.min_value > 0


def test_rum_check_flags_violation():
    # regularity failure: x gains share when z is added
    rows = {frozenset("xy"): {"x": F(1, 2), "y": F(1, 2)}, frozenset("xz"): {"x": F(1, 2), "z": F(1, 2)},
            frozenset("yz"): {"y": F(1, 2), "z": F(1, 2)}, T: {"x": F(3, 5), "y": F(1, 5), "z": F(1, 5)}}
    assert not rum_check(ChoiceData("xyz", rows)).passed


def test_rum_approximation_bound():
    res = rum_approximate([(0.5, "x>y>z>t"), (0.5, "t>z>y>x")], 0.5, 30)
    assert res.sup_error < 1e-6
    assert res.sup_error <= res.bound + 1e-15
    small = rum_approximate([(0.5, "x>y>z"), (0.5, "z>y>x")], 0.5, 3)
    assert rum_check(hdst_rcf(small.params)).strict_interior
    with pytest.raises(DomainError):
        rum_approximate([(1.0, "x>y>z")], 0.5, 400)


def test_foc_fixed_case():
    w = {"x": F(1, 6), "y": F(1, 3), "z": F(1, 2)}
    res = verify_foc(w, "xyz", F(5, 24), "x")
    assert res.passed and res.alpha == F(1, 4)
    assert microfoundation_alpha(w, "xyz", F(5, 24), "x") == F(1, 4)
    assert verify_foc(w, "xyz", 0, "x").passed


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 100), min_size=2, max_size=5), st.integers(0, 99), st.data())
def test_foc_random(raw, k, data):
    U = names(len(raw))
    w = {x: F(v) for x, v in zip(U, raw)}
    best = data.draw(st.sampled_from(U))
    m = (1 - w[best] / sum(w.values())) * F(k, 100)
    res = verify_foc(w, U, m, best)
    assert res.passed
    assert all(v == 0 for v in res.residuals.values())


@settings(max_examples=25, deadline=None)
@given(st.lists(dst_params(3, 3), min_size=1, max_size=3), st.data())
def test_mixtures_are_strictly_interior(types, data):
    U = types[0].universe
    same = [t for t in types if t.universe == U]
    shares = data.draw(st.lists(st.integers(1, 9), min_size=len(same), max_size=len(same)))
    total = sum(shares)
    h = HDstParams([(F(s, total), t) for s, t in zip(shares, same)])
    assert rum_check(hdst_rcf(h)).strict_interior


def test_random_mixtures_float():
    rng = random.Random(8)
    for _ in range(10):
        types = [(0.5, random_params(rng, 4, exact=False)), (0.5, random_params(rng, 4, exact=False))]
        assert rum_check(hdst_rcf(HDstParams(types))).passed
