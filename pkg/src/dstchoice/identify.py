"""Exact recovery of (alpha, order, weights) from population choice probabilities.

The order is read off the sign pattern of odds differences on three-element
menus. The cognitive weight and the Luce weights then follow in closed form
from binary and three-element menus.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .core import ChoiceData, DstParams, LinearOrder, LuceWeights, dst_prob, menu_label, subsets
from .exceptions import (
    Ambiguous,
    DomainError,
    InconsistentAlpha,
    MenuOutsideUniverse,
    MissingMenu,
    ModelRejection,
    NonPositiveWeight,
    RationalityViolation,
    ZeroProbability,
)
from .numeric import Number, sign

EPS_SIGN = 1e-7
TOL_ALPHA = 1e-6

# sign pattern of (D_ab.c, D_bc.a, D_ca.b) -> ranking as positions into (a, b, c)
_PATTERNS = {
    (1, -1, -1): (0, 1, 2),
    (-1, 1, -1): (1, 2, 0),
    (-1, -1, 1): (2, 0, 1),
    (1, 1, -1): (0, 2, 1),
    (-1, 1, 1): (1, 0, 2),
    (1, -1, 1): (2, 1, 0),
}


def _positive(rho: ChoiceData, x: str, S) -> Number:
    v = rho.get(x, S)
    if not v > 0:
        raise ZeroProbability(f"rho({x}, {menu_label(frozenset(S))}) is zero", alternative=x, menu=sorted(S))
    return v


def relative_odds_difference(rho: ChoiceData, x: str, y: str, z: str) -> Number:
    """Odds of x over y in {x,y,z} minus the same odds in {x,y}."""
    if len({x, y, z}) != 3:
        raise DomainError("the three alternatives must be distinct")
    T = frozenset((x, y, z))
    B = frozenset((x, y))
    for S in (T, B):
        if not rho.has(S):
            raise MissingMenu(f"menu {menu_label(S)} is not in the data", menu=sorted(S))
    return _positive(rho, x, T) / _positive(rho, y, T) - _positive(rho, x, B) / _positive(rho, y, B)


@dataclass(frozen=True)
class TripleSignPattern:
    triple: tuple
    d_xy_z: Number
    d_yz_x: Number
    d_zx_y: Number
    signs: tuple
    implied_order: tuple | None
    status: str  # "ordered" | "cyclic" | "ambiguous"

    def to_dict(self) -> dict:
        sym = {1: "+", -1: "-", 0: "0"}
        return {
            "triple": list(self.triple),
            "signs": "".join(sym[s] for s in self.signs),
            "values": [float(self.d_xy_z), float(self.d_yz_x), float(self.d_zx_y)],
            "implied_order": list(self.implied_order) if self.implied_order else None,
            "status": self.status,
        }


def classify_triple(rho: ChoiceData, x: str, y: str, z: str, eps_sign: float = EPS_SIGN) -> TripleSignPattern:
    d1 = relative_odds_difference(rho, x, y, z)
    d2 = relative_odds_difference(rho, y, z, x)
    d3 = relative_odds_difference(rho, z, x, y)
    signs = (sign(d1, eps_sign), sign(d2, eps_sign), sign(d3, eps_sign))
    labels = (x, y, z)
    if signs in _PATTERNS:
        order = tuple(labels[i] for i in _PATTERNS[signs])
        status = "ordered"
    else:
        order = None
        status = "cyclic" if signs in {(1, 1, 1), (-1, -1, -1)} else "ambiguous"
    return TripleSignPattern((x, y, z), d1, d2, d3, signs, order, status)


def _triples(universe) -> list[tuple]:
    return list(itertools.combinations(sorted(universe), 3))


@dataclass(frozen=True)
class RevealedPreference:
    order: LinearOrder
    patterns: tuple


def _observed_triples(rho: ChoiceData) -> list[tuple]:
    out = []
    for t in _triples(rho.universe):
        if rho.has(frozenset(t)) and all(rho.has(frozenset(p)) for p in itertools.combinations(t, 2)):
            out.append(t)
    return out


def revealed_preference_with_patterns(rho: ChoiceData, eps_sign: float = EPS_SIGN) -> RevealedPreference:
    universe = rho.universe
    triples = _observed_triples(rho)
    if len(universe) < 3 or not triples:
        raise MissingMenu("revealed preference needs observed three-element menus and their pairs")
    patterns = [classify_triple(rho, *t, eps_sign=eps_sign) for t in triples]
    cyclic = [p for p in patterns if p.status == "cyclic"]
    if cyclic:
        raise RationalityViolation("cyclic sign pattern in some three-element menus",
                                   triples=[p.to_dict() for p in cyclic])
    ambiguous = [p for p in patterns if p.status == "ambiguous"]
    if ambiguous:
        raise Ambiguous("odds differences vanish: no strict revealed preference (data look Luce-like)",
                        triples=[p.to_dict() for p in ambiguous])
    better: dict = {}
    conflicts = []
    for p in patterns:
        o = p.implied_order
        for i in range(3):
            for j in range(i + 1, 3):
                key = tuple(sorted((o[i], o[j])))
                if key in better and better[key][0] != o[i]:
                    conflicts.append({"pair": list(key), "triples": [list(better[key][1]), list(p.triple)]})
                else:
                    better.setdefault(key, (o[i], p.triple))
    if conflicts:
        raise RationalityViolation("three-element menus disagree on a pairwise ranking", conflicts=conflicts)
    # transitive closure of the directly revealed pairs
    above = {a: set() for a in universe}
    for (a, b), (winner, _) in better.items():
        above[winner].add(b if winner == a else a)
    changed = True
    while changed:
        changed = False
        for a in universe:
            extra = set().union(*(above[b] for b in above[a])) - above[a] if above[a] else set()
            if extra:
                above[a] |= extra
                changed = True
    cycle = [a for a in universe if a in above[a]]
    if cycle:
        raise RationalityViolation("revealed preference is not transitive", cycle=sorted(cycle))
    unranked = [[a, b] for a, b in itertools.combinations(universe, 2) if b not in above[a] and a not in above[b]]
    if unranked:
        raise Ambiguous("observed menus do not rank every pair", unranked=unranked)
    ranking = sorted(universe, key=lambda a: (-len(above[a]), a))
    return RevealedPreference(LinearOrder(tuple(ranking)), tuple(patterns))


def revealed_preference(rho: ChoiceData, eps_sign: float = EPS_SIGN) -> LinearOrder:
    """The linear order revealed by the odds-difference signs of all triples."""
    return revealed_preference_with_patterns(rho, eps_sign).order


@dataclass(frozen=True)
class AlphaEstimate:
    value: Number
    max_deviation: Number
    per_triple: dict
    boundary: bool

    def __float__(self):
        return float(self.value)


def alpha_from_triple(rho: ChoiceData, order: LinearOrder, triple: Iterable[str]) -> Number:
    x, y, z = order.sort(triple)
    T = frozenset((x, y, z))
    rz_T = _positive(rho, z, T)
    return 1 - _positive(rho, z, frozenset((y, z))) * (rz_T + rho.get(y, T)) / rz_T


def recover_alpha(rho: ChoiceData, order, tol_alpha: float = TOL_ALPHA) -> AlphaEstimate:
    """Cognitive weight implied by every triple; mean returned with its spread."""
    order = LinearOrder.coerce(order)
    per = {}
    for t in _observed_triples(rho):
        per[t] = alpha_from_triple(rho, order, t)
    if not per:
        raise MissingMenu("no three-element menu is observed")
    values = list(per.values())
    mean = sum(values) / len(values)
    dev = max(abs(v - mean) for v in values)
    if dev > tol_alpha * max(1, abs(mean)):
        raise InconsistentAlpha("triples imply different cognitive weights",
                                per_triple={"".join(k): float(v) for k, v in per.items()},
                                max_deviation=float(dev))
    boundary = not (tol_alpha < mean < 1 - tol_alpha)
    return AlphaEstimate(mean, dev, per, boundary)


def recover_weights(rho: ChoiceData, order, alpha: Number) -> LuceWeights:
    """Luce weights from binary menus that contain the worst alternative."""
    order = LinearOrder.coerce(order)
    universe = order.ranking
    z = order.worst(universe)
    others = [y for y in sorted(universe) if y != z]
    ratio = {y: (1 - alpha) / _positive(rho, z, frozenset((y, z))) for y in others}
    inv = sum(ratio.values()) - len(universe) + 2
    if not inv > 0:
        raise NonPositiveWeight(f"weight of the worst alternative {z!r} is not positive", alternative=z)
    wz = 1 / inv
    w = {z: wz}
    for y in others:
        w[y] = wz * (ratio[y] - 1)
    bad = {k: float(v) for k, v in w.items() if not v > 0}
    if bad:
        raise NonPositiveWeight("recovered weights are not all positive (strict regularity fails)", weights=bad)
    return LuceWeights(w)


@dataclass
class Identification:
    params: DstParams
    alpha: AlphaEstimate
    patterns: tuple
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, exact: bool = False) -> dict:
        from .numeric import json_number
        return {
            "alpha": json_number(self.params.alpha, exact),
            "order": list(self.params.order.ranking),
            "weights": {k: json_number(v, exact) for k, v in self.params.weights.items()},
            "diagnostics": {
                "per_triple_alpha": {"".join(k): json_number(v, exact) for k, v in self.alpha.per_triple.items()},
                "alpha_max_deviation": json_number(self.alpha.max_deviation, exact),
                "sign_table": [p.to_dict() for p in self.patterns],
                **self.diagnostics,
            },
        }


def _wrap(axiom: str, exc: ModelRejection) -> ModelRejection:
    exc.details.setdefault("axiom", axiom)
    return exc


def identify(rho: ChoiceData, eps_sign: float = EPS_SIGN, tol_alpha: float = TOL_ALPHA) -> Identification:
    """Recover the unique (alpha, order, weights) behind a rich, positive dataset."""
    issues = rho.menu_collection.richness_violations()
    zeros = rho.zero_cells()
    if zeros:
        raise _wrap("positivity", ZeroProbability(
            "some choice probabilities are zero",
            cells=[[sorted(S), x] for S, x in zeros[:100]]))
    try:
        rp = revealed_preference_with_patterns(rho, eps_sign)
    except ModelRejection as e:
        raise _wrap("rationality", e)
    try:
        est = recover_alpha(rho, rp.order, tol_alpha)
    except ModelRejection as e:
        raise _wrap("constant_gain", e)
    if not 0 < est.value < 1:
        raise _wrap("constant_gain", InconsistentAlpha(
            f"implied cognitive weight {float(est.value)} is outside (0,1)", alpha=float(est.value)))
    try:
        w = recover_weights(rho, rp.order, est.value)
    except ModelRejection as e:
        raise _wrap("strict_regularity", e)
    params = DstParams(est.value, rp.order, w)
    return Identification(params, est, rp.patterns,
                          {"boundary_alpha": est.boundary, "richness_issues": issues})


@dataclass(frozen=True)
class Prediction:
    menu: frozenset
    distribution: dict
    out_of_sample: bool

    def to_dict(self) -> dict:
        return {"menu": sorted(self.menu), "distribution": {k: float(v) for k, v in self.distribution.items()},
                "out_of_sample": self.out_of_sample}


def predict(params: DstParams, menu, observed: ChoiceData | None = None) -> Prediction:
    """Model distribution on ``menu``; flagged as extrapolation if the menu was not observed."""
    S = frozenset(menu)
    if not S or not S <= params.order.universe:
        raise MenuOutsideUniverse(f"menu {menu_label(S)} leaves the universe", menu=sorted(S))
    dist = {x: dst_prob(params, S, x) for x in sorted(S)}
    oos = True if observed is None else not (observed.has(S) or len(S) == 1)
    return Prediction(S, dist, oos)


__all__ = [
    "relative_odds_difference", "TripleSignPattern", "classify_triple", "revealed_preference",
    "revealed_preference_with_patterns", "AlphaEstimate", "alpha_from_triple", "recover_alpha",
    "recover_weights", "Identification", "identify", "Prediction", "predict", "subsets",
]
