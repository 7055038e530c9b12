import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from _gen import dst_params
from dstchoice.availability import (AvailabilityDistribution, DstPaParams, associated_rcf,
                                    associated_rcf_discrepancy, check_block_marschak_default, check_mido,
                                    dstpa_rcf, identify_dstpa, point_odds_sum, point_odds_sum_pivot,
                                    recover_phi, recover_pi)
from dstchoice.core import ChoiceData, DstParams, dst_rcf, subsets
from dstchoice.exceptions import BlockMarschakViolation, DomainError, MidoViolation, NormalizationError

BASE = DstParams(F(1, 4), "x>y>z", {"x": F(1, 6), "y": F(1, 3), "z": F(1, 2)})
PHI = {"x": F(1, 2), "y": F(3, 5), "z": F(7, 10)}


def _pi(seed, U):
    rng = random.Random(seed)
    menus = subsets(U, 0)
    raw = [F(rng.randint(1, 30)) for _ in menus]
    t = sum(raw)
    return AvailabilityDistribution({S: v / t for S, v in zip(menus, raw)})


def test_rows_include_default():
    rho = dstpa_rcf(DstPaParams(BASE, AvailabilityDistribution.independent(PHI)))
    for S in rho.menus:
        assert sum(rho.row(S).values()) == 1
    assert rho.get(rho.default, frozenset()) == 1


def test_nothing_available():
    pi = {S: F(1, 10 ** 6) for S in subsets("xyz", 1)}
    pi[frozenset()] = 1 - sum(pi.values())
    rho = dstpa_rcf(DstPaParams(BASE, AvailabilityDistribution(pi)))
    assert rho.get(rho.default, frozenset("xyz")) > F(999, 1000)


def test_distribution_validation():
    with pytest.raises(NormalizationError):
        AvailabilityDistribution({frozenset(): F(1, 2), frozenset("x"): F(1, 3)})
    with pytest.raises(DomainError):
        AvailabilityDistribution({frozenset("x"): F(1)})


def test_independent_round_trip():
    rho = dstpa_rcf(DstPaParams(BASE, AvailabilityDistribution.independent(PHI)))
    assert check_mido(rho).passed
    assert recover_phi(rho) == PHI


def test_correlated_availability_fails_mido():
    pi = dict(AvailabilityDistribution.independent(PHI))
    pi[frozenset("xy")] += F(1, 50)
    pi[frozenset("x")] -= F(1, 100)
    pi[frozenset("y")] -= F(1, 100)
    rho = dstpa_rcf(DstPaParams(BASE, AvailabilityDistribution(pi)))
    assert not check_mido(rho).passed
    with pytest.raises(MidoViolation):
        recover_phi(rho)


def test_identification():
    pi = _pi(1, "xyz")
    rho = dstpa_rcf(DstPaParams(BASE, pi))
    ident = identify_dstpa(rho)
    assert ident.params.base.alpha == BASE.alpha
    assert str(ident.params.base.order) == "x>y>z"
    assert dict(ident.params.pi) == dict(pi)
    assert associated_rcf_discrepancy(rho) == 0


def test_point_odds_paths_agree():
    rho = dstpa_rcf(DstPaParams(BASE, _pi(2, "xyz")))
    S = frozenset("xyz")
    assert point_odds_sum(rho, "y", S) == point_odds_sum_pivot(rho, "y", S, "z")


def _violate(rho):
    rows = {S: dict(rho.row(S)) for S in rho.menus}
    xy = frozenset("xy")
    target = rows[frozenset("x")][rho.default]
    scale = (1 - target) / (1 - rows[xy][rho.default])
    rows[xy] = {k: (target if k == rho.default else v * scale) for k, v in rows[xy].items()}
    return ChoiceData(rho.universe, rows, default=rho.default)


def test_block_marschak_violation():
    bad = _violate(dstpa_rcf(DstPaParams(BASE, _pi(3, "xyz"))))
    rep = check_block_marschak_default(bad)
    assert not rep.passed
    with pytest.raises(BlockMarschakViolation):
        recover_pi(bad)


def test_plain_model_with_fake_default_rejected():
    rho = dst_rcf(BASE)
    rows = {frozenset(): {"o": F(1)}}
    for S in rho.menus:
        rows[S] = {**{x: v * F(9, 10) for x, v in rho.row(S).items()}, "o": F(1, 10)}
    fake = ChoiceData("xyz", rows, default="o")
    with pytest.raises(Exception) as err:
        identify_dstpa(fake)
    assert type(err.value).__name__ in {"BlockMarschakViolation", "NormalizationFailure", "AxiomViolation",
                                        "RationalityViolation", "Ambiguous", "InconsistentAlpha"}


@settings(max_examples=25, deadline=None)
@given(dst_params(3, 4), st.integers(0, 10 ** 6))
def test_mobius_round_trip(base, seed):
    pi = _pi(seed, base.universe)
    rho = dstpa_rcf(DstPaParams(base, pi))
    assert dict(recover_pi(rho)) == dict(pi)
    star = associated_rcf(rho)
    assert star.max_abs_diff(dst_rcf(base, star.menus)) == 0
