"""Dual-system choice when products are randomly unavailable.

A feasible set ``T`` is drawn from ``pi`` restricted to subsets of the menu;
the decision maker applies the dual-system rule on ``T`` and takes the outside
option (``__default__``) when ``T`` is empty. Probabilities of the outside
option determine ``pi`` by inclusion-exclusion, and the same alternating sums
undo the random availability to give the underlying choice function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .axioms import AxiomReport, _report
from .core import (
    DEFAULT_ID,
    EMPTY_MENU,
    ChoiceData,
    DstParams,
    menu_label,
    sorted_menus,
    subsets,
)
from .exceptions import (
    BlockMarschakViolation,
    DomainError,
    InputError,
    MenuTooLarge,
    MidoViolation,
    MissingMenu,
    ModelRejection,
    NormalizationFailure,
    NormalizationError,
    UniverseMismatch,
    ZeroProbability,
)
from .identify import identify
from .numeric import Number

MAX_MENU = 16
TOL = 1e-9


def _power_set(S) -> list[frozenset]:
    members = sorted(S)
    if len(members) > MAX_MENU:
        raise MenuTooLarge(f"menu with {len(members)} items exceeds {MAX_MENU}")
    out = []
    for mask in range(1 << len(members)):
        out.append(frozenset(m for i, m in enumerate(members) if mask >> i & 1))
    return out


class AvailabilityDistribution(Mapping):
    """Probability of each feasible set (the empty set included)."""

    def __init__(self, pi: Mapping, tol: float = TOL):
        out = {}
        for k, v in pi.items():
            S = frozenset(k)
            if not 0 < v <= 1:
                raise DomainError(f"availability of {menu_label(S)} must lie in (0,1], got {v}")
            out[S] = v
        if EMPTY_MENU not in out:
            raise DomainError("the empty feasible set needs positive probability")
        total = sum(out.values())
        if abs(total - 1) > tol:
            raise NormalizationError(f"availability probabilities sum to {float(total)}")
        self._pi = {S: out[S] for S in sorted_menus(out)}

    @classmethod
    def independent(cls, phi: Mapping[str, Number]) -> "AvailabilityDistribution":
        """Each product is available on its own with probability ``phi``."""
        universe = sorted(phi)
        pi = {}
        for T in _power_set(universe):
            p = 1
            for x in universe:
                p *= phi[x] if x in T else 1 - phi[x]
            pi[T] = p
        return cls(pi)

    def __getitem__(self, S):
        return self._pi[frozenset(S)]

    def get(self, S, default=0):
        return self._pi.get(frozenset(S), default)

    def __iter__(self):
        return iter(self._pi)

    def __len__(self):
        return len(self._pi)

    @property
    def universe(self) -> frozenset:
        return frozenset().union(*self._pi)

    def as_dict(self) -> dict:
        return dict(self._pi)


class DstPaParams:
    def __init__(self, base: DstParams, pi: AvailabilityDistribution, default_id: str = DEFAULT_ID):
        if not isinstance(pi, AvailabilityDistribution):
            pi = AvailabilityDistribution(pi)
        if default_id in base.order.universe:
            raise DomainError(f"default id {default_id!r} collides with an alternative")
        if pi.universe != base.order.universe:
            raise UniverseMismatch("availability and preferences cover different alternatives")
        self.base = base
        self.pi = pi
        self.default_id = default_id

    def __repr__(self):
        return f"DstPaParams(base={self.base!r}, pi={len(self.pi)} sets)"


def dstpa_prob_row(params: DstPaParams, S) -> dict:
    S = frozenset(S)
    base = params.base
    pi = params.pi
    subs = _power_set(S)
    Z = sum(pi.get(A, 0) for A in subs)
    if not Z > 0:
        raise DomainError(f"no feasible set of {menu_label(S)} has positive probability")
    row = {x: 0 for x in sorted(S)}
    for T in subs:
        p = pi.get(T, 0)
        if not T or not p:
            continue
        share = p / Z
        wT = base.weights.total(T)
        best = base.order.best(T)
        for x in T:
            v = (1 - base.alpha) * base.weights[x] / wT
            if x == best:
                v += base.alpha
            row[x] += share * v
    row[params.default_id] = pi[EMPTY_MENU] / Z
    return row


def dstpa_rcf(params: DstPaParams, menus=None) -> ChoiceData:
    """Choice probabilities including the outside option, on every menu and the empty menu."""
    if menus is None:
        menus = list(params.pi)
    menus = sorted_menus(frozenset(m) for m in menus)
    if EMPTY_MENU not in menus:
        menus = [EMPTY_MENU] + menus
    rows = {S: dstpa_prob_row(params, S) for S in menus}
    return ChoiceData(params.base.universe, rows, default=params.default_id)


def _require_default(rho: ChoiceData) -> str:
    if rho.default is None:
        raise InputError("data carry no outside option")
    if not rho.has(EMPTY_MENU):
        raise MissingMenu("the empty menu row (outside option only) is required")
    return rho.default


def _default_prob(rho: ChoiceData, A) -> Number:
    v = rho.get(rho.default, A)
    if not v > 0:
        raise ZeroProbability(f"outside option has zero probability in {menu_label(frozenset(A))}")
    return v


def mobius_ratio(rho: ChoiceData, S) -> Number:
    """Alternating sum over subsets A of S of 1 / P(outside option | A)."""
    _require_default(rho)
    S = frozenset(S)
    total = 0
    for A in _power_set(S):
        if not rho.has(A):
            raise MissingMenu(f"menu {menu_label(A)} is needed for the inversion")
        p = _default_prob(rho, A)
        # an integer cell (a certain outcome) must not turn an exact sum into a float
        total += (-1) ** (len(S) - len(A)) / (Fraction(p) if isinstance(p, int) else p)
    return total


def check_block_marschak_default(rho: ChoiceData) -> AxiomReport:
    """Every alternating sum of inverse outside-option probabilities is positive."""
    bad = []
    for S in rho.menus:
        if not S:
            continue
        v = mobius_ratio(rho, S)
        if not v > 0:
            bad.append({"menu": sorted(S), "value": float(v)})
    return _report("block_marschak_default", bad)


def recover_pi(rho: ChoiceData) -> AvailabilityDistribution:
    """Availability distribution implied by the outside-option probabilities."""
    _require_default(rho)
    ratios = {S: mobius_ratio(rho, S) for S in rho.menus}
    bad = {menu_label(S): float(v) for S, v in ratios.items() if not v > 0}
    if bad:
        raise BlockMarschakViolation("some recovered availability probabilities are not positive",
                                     axiom="block_marschak_default", menus=bad)
    p0 = 1 / sum(ratios.values())
    return AvailabilityDistribution({S: v * p0 for S, v in ratios.items()})


def _odds(rho: ChoiceData, x: str, T) -> Number:
    return rho.get(x, T) / _default_prob(rho, T)


def point_odds_sum(rho: ChoiceData, t: str, S) -> Number:
    """Alternating sum over subsets T of S containing t of P(t|T)/P(outside|T)."""
    S = frozenset(S)
    total = 0
    for T in _power_set(S):
        if t in T:
            total += (-1) ** (len(S) - len(T)) * _odds(rho, t, T)
    return total


def point_odds_sum_pivot(rho: ChoiceData, t: str, S, pivot: str) -> Number:
    """Same quantity, summed only over sets holding both t and ``pivot``."""
    S = frozenset(S)
    if pivot == t or pivot not in S:
        raise DomainError("pivot must be another member of the menu")
    total = 0
    for T in _power_set(S):
        if t in T and pivot in T:
            total += (-1) ** (len(S) - len(T)) * (_odds(rho, t, T) - _odds(rho, t, T - {pivot}))
    return total


def associated_rcf(rho: ChoiceData, tol: float = TOL) -> ChoiceData:
    """The choice function with random availability stripped out."""
    _require_default(rho)
    rows = {}
    for S in rho.menus:
        if not S:
            continue
        denom = mobius_ratio(rho, S)
        if not denom > 0:
            raise BlockMarschakViolation(f"alternating sum for {menu_label(S)} is not positive",
                                         axiom="block_marschak_default", menu=sorted(S), value=float(denom))
        row = {x: point_odds_sum(rho, x, S) / denom for x in sorted(S)}
        total = sum(row.values())
        negative = {x: float(v) for x, v in row.items() if v < -tol}
        if negative or abs(total - 1) > tol:
            raise NormalizationFailure(f"stripped probabilities in {menu_label(S)} are not a distribution",
                                       menu=sorted(S), row={x: float(v) for x, v in row.items()})
        rows[S] = {x: (v if v > 0 else 0 * v) for x, v in row.items()}
    return ChoiceData(rho.universe, rows)


def associated_rcf_discrepancy(rho: ChoiceData) -> float:
    """Largest gap between the two summation paths of the stripped odds."""
    gap = 0.0
    for S in rho.menus:
        if len(S) < 2:
            continue
        for t in sorted(S):
            pivot = next(y for y in sorted(S) if y != t)
            gap = max(gap, abs(float(point_odds_sum(rho, t, S) - point_odds_sum_pivot(rho, t, S, pivot))))
    return gap


@dataclass
class DstPaIdentification:
    params: DstPaParams
    associated: ChoiceData
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, exact: bool = False) -> dict:
        from .numeric import json_number
        from .io import menu_id_for
        base = self.params.base
        return {
            "alpha": json_number(base.alpha, exact),
            "order": list(base.order.ranking),
            "weights": {k: json_number(v, exact) for k, v in base.weights.items()},
            "pi": {menu_id_for(S): json_number(v, exact) for S, v in self.params.pi.items()},
            "diagnostics": self.diagnostics,
        }


def identify_dstpa(rho: ChoiceData, **identify_kw) -> DstPaIdentification:
    """Recover preferences, weights and the availability distribution."""
    report = check_block_marschak_default(rho)
    if not report.passed:
        raise BlockMarschakViolation("outside-option probabilities fail the alternating-sum positivity",
                                     axiom="block_marschak_default", witnesses=report.witnesses[:5])
    try:
        star = associated_rcf(rho)
        ident = identify(star, **identify_kw)
    except ModelRejection as e:
        e.details["clause"] = "associated_rcf_dst"
        raise
    pi = recover_pi(rho)
    params = DstPaParams(ident.params, pi, rho.default)
    diag = {"path_discrepancy": associated_rcf_discrepancy(rho)}
    return DstPaIdentification(params, star, diag)


def _mido_ratios(rho: ChoiceData) -> dict:
    out: dict = {}
    for S in rho.menus:
        for x in sorted(S):
            R = S - {x}
            if rho.has(R):
                out.setdefault(x, []).append((S, _default_prob(rho, S) / _default_prob(rho, R)))
    return out


def check_mido(rho: ChoiceData, tol: float = TOL) -> AxiomReport:
    """Removing an item scales the outside-option probability by a menu-free factor."""
    _require_default(rho)
    bad, dev = [], 0.0
    for x, vals in sorted(_mido_ratios(rho).items()):
        ref_menu, ref = vals[0]
        for S, r in vals[1:]:
            d = abs(r - ref) / max(1, abs(ref))
            dev = max(dev, float(d))
            if d > tol:
                bad.append({"alternative": x, "menus": [sorted(ref_menu), sorted(S)],
                            "ratios": [float(ref), float(r)]})
    report = _report("mido", bad, dev)
    if report.passed:
        phi = {x: 1 - _default_prob(rho, frozenset([x])) for x in rho.universe if rho.has(frozenset([x]))}
        report.notes["phi"] = dict(phi)
    return report


def recover_phi(rho: ChoiceData, tol: float = TOL) -> dict:
    """Per-product availability probabilities under independent availability."""
    report = check_mido(rho, tol)
    if not report.passed:
        raise MidoViolation("outside-option ratios depend on the menu", axiom="mido",
                            witnesses=report.witnesses[:5])
    phi = {x: 1 - _default_prob(rho, frozenset([x])) for x in rho.universe}
    pi = recover_pi(rho)
    for S in rho.menus:
        Z = sum(pi.get(A, 0) for A in _power_set(S))
        for T in _power_set(S):
            lhs = pi.get(T, 0) / Z
            rhs = math.prod(phi[x] for x in T) * math.prod(1 - phi[y] for y in S - T)
            if abs(lhs - rhs) > tol:
                raise MidoViolation("availability is not a product of independent draws",
                                    axiom="mido", menu=sorted(S), subset=sorted(T),
                                    lhs=float(lhs), rhs=float(rhs))
    return phi


__all__ = [
    "AvailabilityDistribution", "DstPaParams", "dstpa_prob_row", "dstpa_rcf", "mobius_ratio",
    "check_block_marschak_default", "recover_pi", "point_odds_sum", "point_odds_sum_pivot",
    "associated_rcf", "associated_rcf_discrepancy", "DstPaIdentification", "identify_dstpa",
    "check_mido", "recover_phi", "subsets",
]
