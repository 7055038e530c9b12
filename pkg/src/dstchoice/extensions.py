"""Generalisations of the dual-system model.

* menu-dependent cognitive weights (one alpha per menu),
* heterogeneous populations (mixtures of dual-system types) and their place
  inside the random-utility polytope,
* the cost-minimisation problem whose solution is the dual-system rule.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .axioms import _report
from .core import (
    ChoiceData,
    DstParams,
    LinearOrder,
    LuceWeights,
    _menu_list,
    dst_rcf,
    menu_label,
    subsets,
)
from .exceptions import (
    Ambiguous,
    AxiomViolation,
    DomainError,
    IncompleteData,
    InconsistentRanking,
    MissingMenu,
    NoRepresentation,
    NormalizationError,
    NotPositive,
    UniverseMismatch,
    WrongUniverseSize,
)
from .numeric import Number

TOL = 1e-9


def _slack(rho: ChoiceData) -> float:
    return 0 if rho.is_exact else 1e-12


def _require_positive(rho: ChoiceData) -> None:
    zeros = rho.zero_cells()
    if zeros:
        S, x = zeros[0]
        raise NotPositive(f"rho({x}, {menu_label(S)}) is zero", alternative=x, menu=sorted(S))


def _need(rho: ChoiceData, S) -> frozenset:
    S = frozenset(S)
    if len(S) > 1 and not rho.has(S):
        raise IncompleteData(f"menu {menu_label(S)} is required but not observed", menu=sorted(S))
    return S


# menu-dependent cognitive weights

class DDstParams:
    """A cognitive weight for every non-singleton menu, one order, one set of Luce weights."""

    def __init__(self, alpha_by_menu: Mapping, order, weights, diagnostics: dict | None = None):
        self.order = LinearOrder.coerce(order)
        self.weights = weights if isinstance(weights, LuceWeights) else LuceWeights(weights)
        if self.order.universe != self.weights.universe:
            raise UniverseMismatch("order and weights cover different alternatives")
        alphas = {}
        for S, a in alpha_by_menu.items():
            S = frozenset(S)
            if len(S) < 2:
                continue
            if not S <= self.order.universe:
                raise DomainError(f"menu {menu_label(S)} leaves the universe")
            if not 0 < a < 1:
                raise DomainError(f"alpha for {menu_label(S)} must lie in (0,1), got {a}")
            alphas[S] = a
        self.alpha_by_menu = alphas
        self.diagnostics = diagnostics or {}

    @property
    def universe(self) -> tuple:
        return tuple(sorted(self.order.universe))

    def alpha(self, S) -> Number:
        S = frozenset(S)
        try:
            return self.alpha_by_menu[S]
        except KeyError:
            raise MissingMenu(f"no cognitive weight for {menu_label(S)}") from None

    def prob(self, S, x: str) -> Number:
        S = frozenset(S)
        if len(S) == 1:
            return 1 if x in S else 0
        a = self.alpha(S)
        v = (1 - a) * self.weights[x] / self.weights.total(S)
        return v + a if self.order.best(S) == x else v

    def to_dict(self) -> dict:
        return {
            "order": list(self.order.ranking),
            "weights": self.weights.as_dict(),
            "alpha_by_menu": {menu_label(S): a for S, a in sorted(self.alpha_by_menu.items(),
                                                                     key=lambda kv: (len(kv[0]), sorted(kv[0])))},
            "diagnostics": self.diagnostics,
        }

    def __repr__(self):
        return f"DDstParams(order={str(self.order)!r}, menus={len(self.alpha_by_menu)})"


def ddst_rcf(params: DDstParams, menus=None) -> ChoiceData:
    """Choice probabilities with menu-specific cognitive weights (defaults to the menus that have one)."""
    if menus is None:
        menus = list(params.alpha_by_menu)
    rows = {S: {x: params.prob(S, x) for x in sorted(S)} for S in _menu_list(menus, params.universe)}
    return ChoiceData(params.universe, rows)


def _iia_directions(rho: ChoiceData, T: frozenset) -> list[tuple]:
    """Ordered pairs (y, z) whose odds move toward z when the third item joins."""
    out = []
    slack = _slack(rho)
    for y, z in itertools.permutations(sorted(T), 2):
        pair = frozenset((y, z))
        lhs = rho.get(z, T) / rho.get(y, T)
        rhs = rho.get(z, pair) / rho.get(y, pair)
        if lhs - rhs > slack * max(1, abs(rhs)):
            out.append((y, z))
    return out


def _construct_for(rho: ChoiceData, T: frozenset, y: str, z: str) -> DDstParams:
    (x,) = T - {y, z}
    px, py, pz = (rho.get(a, T) for a in (x, y, z))
    odds = min(rho.get(x, frozenset((x, y))) / rho.get(y, frozenset((x, y))),
               rho.get(x, frozenset((x, z))) / rho.get(z, frozenset((x, z))))
    lower = max(0, px - odds * min(py, pz))
    upper = px
    a_top = (lower + upper) / 2
    w = {y: py / (1 - a_top), z: pz / (1 - a_top)}
    w[x] = 1 - w[y] - w[z]
    alphas = {T: a_top}
    for a, b in ((x, y), (x, z), (y, z)):
        pair = frozenset((a, b))
        alphas[pair] = 1 - rho.get(b, pair) * (w[a] + w[b]) / w[b]
    diag = {"alpha_grand_interval": [lower, upper], "non_unique": True}
    return DDstParams(alphas, LinearOrder((x, y, z)), w, diag)


def _three_alternatives(rho: ChoiceData) -> frozenset:
    if len(rho.universe) != 3:
        raise WrongUniverseSize(f"construction needs exactly three alternatives, got {len(rho.universe)}")
    T = frozenset(rho.universe)
    for S in subsets(T, 2):
        _need(rho, S)
    _require_positive(rho)
    return T


def ddst_representations_3(rho: ChoiceData) -> list[DDstParams]:
    """One menu-dependent representation for every direction in which odds independence fails."""
    T = _three_alternatives(rho)
    reps = [_construct_for(rho, T, y, z) for y, z in _iia_directions(rho, T)]
    return sorted(reps, key=lambda r: r.order.ranking)


def ddst_construct_3(rho: ChoiceData) -> DDstParams:
    """A menu-dependent representation of positive three-alternative data that violates IIA.

    The grand-menu weight is free inside an open interval; the midpoint is used.
    When several orders work, the lexicographically first is returned and
    ``diagnostics["orders"]`` lists them all.
    """
    reps = ddst_representations_3(rho)
    if not reps:
        raise NoRepresentation("odds are menu independent, so only a Luce rule fits these data")
    first = reps[0]
    first.diagnostics["orders"] = [list(r.order.ranking) for r in reps]
    first.diagnostics["non_unique"] = True
    return first


def _consistent_order(rho: ChoiceData) -> LinearOrder:
    wins = {x: set() for x in rho.universe}
    for x, y in itertools.combinations(rho.universe, 2):
        signs = set()
        for S in rho.menus:
            if x in S and y in S:
                d = rho.get(x, S) - rho.get(y, S)
                signs.add(0 if d == 0 else (1 if d > 0 else -1))
        if not signs:
            raise Ambiguous(f"{x} and {y} never appear together", pair=[x, y])
        if 0 in signs:
            raise Ambiguous(f"{x} and {y} tie within a menu", pair=[x, y])
        if len(signs) > 1:
            raise InconsistentRanking(f"menus disagree on {x} versus {y}", pair=[x, y])
        (s,) = signs
        (wins[x] if s > 0 else wins[y]).add(y if s > 0 else x)
    ranking = sorted(rho.universe, key=lambda a: (-len(wins[a]), a))
    for i, a in enumerate(ranking):
        if len(wins[a]) != len(ranking) - 1 - i:
            raise InconsistentRanking("within-menu rankings form a cycle")
    return LinearOrder(ranking)


def _known_best_order(rho: ChoiceData, x_star: str) -> LinearOrder:
    if x_star not in rho.universe:
        raise DomainError(f"{x_star!r} is not an alternative")
    rest = [a for a in rho.universe if a != x_star]
    beats = {a: set() for a in rest}
    for y, z in itertools.combinations(rest, 2):
        pair, trip = _need(rho, (y, z)), _need(rho, (x_star, y, z))
        d = rho.get(y, pair) / rho.get(z, pair) - rho.get(y, trip) / rho.get(z, trip)
        if d == 0 or abs(d) <= _slack(rho):
            raise AxiomViolation(f"removing {x_star} leaves the odds of {y} and {z} unchanged",
                                 axiom="revealed_order", pair=[y, z])
        (beats[y] if d > 0 else beats[z]).add(z if d > 0 else y)
    ranking = sorted(rest, key=lambda a: (-len(beats[a]), a))
    for i, a in enumerate(ranking):
        if len(beats[a]) != len(ranking) - 1 - i:
            raise AxiomViolation("revealed order is cyclic", axiom="revealed_order")
    return LinearOrder([x_star, *ranking])


def check_ddst_axioms(rho: ChoiceData, order, consistent: bool = True) -> dict:
    """Predicates characterising menu-dependent representations for a given order.

    ``best_gain``: the best item of a menu has higher odds there than in a menu
    with a different best item. ``best_gain_same_best`` (consistent case only):
    the best item's odds against y exceed any other item's odds against y in a
    menu with the same best item. ``transitive_iia``: odds among non-best items
    are menu independent and multiply along chains; checked through pairwise
    log-odds, which covers every triple of menus.
    """
    order = LinearOrder.coerce(order)
    slack = _slack(rho)
    menus = [S for S in rho.menus if len(S) >= 2]
    gain, same = [], []
    for S, S2 in itertools.permutations(menus, 2):
        bS, bS2 = order.best(S), order.best(S2)
        common = S & S2
        if bS in common and bS != bS2:
            for y in sorted(common - {bS}):
                lhs = rho.get(bS, S) / rho.get(y, S)
                rhs = rho.get(bS, S2) / rho.get(y, S2)
                if not lhs - rhs > slack:
                    gain.append({"best": bS, "other": y, "menus": [sorted(S), sorted(S2)],
                                 "odds": [float(lhs), float(rhs)]})
        if consistent and bS == bS2:
            for y in sorted(common - {bS}):
                for z in sorted(S2 - {bS, y}):
                    lhs = rho.get(bS, S) / rho.get(y, S)
                    rhs = rho.get(z, S2) / rho.get(y, S2)
                    if not lhs - rhs > slack:
                        same.append({"best": bS, "other": y, "third": z, "menus": [sorted(S), sorted(S2)],
                                     "odds": [float(lhs), float(rhs)]})
    pair_odds: dict = {}
    iia, dev = [], 0.0
    for S in menus:
        b = order.best(S)
        for y, z in itertools.combinations(sorted(S - {b}), 2):
            r = math.log(rho.get(y, S)) - math.log(rho.get(z, S))
            if (y, z) in pair_odds:
                ref, S0 = pair_odds[(y, z)]
                d = abs(r - ref)
                dev = max(dev, d)
                if d > TOL:
                    iia.append({"pair": [y, z], "menus": [sorted(S0), sorted(S)], "log_odds": [ref, r]})
            else:
                pair_odds[(y, z)] = (r, S)
    items = sorted({a for p in pair_odds for a in p})

    def lo(a, b):
        if (a, b) in pair_odds:
            return pair_odds[(a, b)][0]
        if (b, a) in pair_odds:
            return -pair_odds[(b, a)][0]
        return None

    for a, b, c in itertools.combinations(items, 3):
        ab, bc, ac = lo(a, b), lo(b, c), lo(a, c)
        if None not in (ab, bc, ac):
            d = abs(ab + bc - ac)
            dev = max(dev, d)
            if d > TOL:
                iia.append({"chain": [a, b, c], "gap": d})
    reports = {
        "best_gain": _report("best_gain", gain),
        "transitive_iia": _report("transitive_iia", iia, dev, notes={"menus": len(menus)}),
    }
    if consistent:
        reports["best_gain_same_best"] = _report("best_gain_same_best", same)
    return reports


def _build(rho: ChoiceData, order: LinearOrder, consistent: bool) -> DDstParams:
    ranking = order.ranking
    x_star, z_star = ranking[0], ranking[-1]
    w = {z_star: Fraction(1) if rho.is_exact else 1.0}
    for y in ranking[1:-1]:
        trip = _need(rho, (x_star, y, z_star))
        w[y] = rho.get(y, trip) / rho.get(z_star, trip)
    upper = None
    for S in rho.menus:
        if x_star in S and len(S) >= 2:
            for z in S - {x_star}:
                bound = rho.get(x_star, S) / rho.get(z, S) * w[z]
                upper = bound if upper is None or bound < upper else upper
    lower = max(w.values()) if consistent else 0
    if upper is None:
        upper = lower + 1 if consistent else 1
    if not upper > lower:
        raise AxiomViolation("no admissible weight for the best alternative",
                             axiom="best_gain_same_best" if consistent else "best_gain",
                             interval=[float(lower), float(upper)])
    w[x_star] = (lower + upper) / 2
    weights = LuceWeights(w)
    alphas = {}
    for S in rho.menus:
        if len(S) < 2:
            continue
        worst = order.worst(S)
        a = 1 - rho.get(worst, S) * weights.total(S) / weights[worst]
        if not 0 < a < 1:
            raise AxiomViolation(f"implied cognitive weight {float(a):.6g} for {menu_label(S)} is outside (0,1)",
                                 axiom="best_gain", menu=sorted(S), alpha=float(a))
        alphas[S] = a
    total = sum(w.values())
    diag = {"best_weight_interval": [lower / total, upper / total], "non_unique": True,
            "weight_scale": "worst alternative fixed, best at interval midpoint"}
    params = DDstParams(alphas, order, weights, diag)
    err = ddst_rcf(params, [S for S in rho.menus if len(S) >= 2]).max_abs_diff(rho)
    params.diagnostics["max_abs_error"] = float(err)
    if err > TOL:
        raise AxiomViolation("the constructed representation does not reproduce the data",
                             axiom="transitive_iia", max_abs_error=float(err))
    return params


def ddst_identify_consistent(rho: ChoiceData) -> DDstParams:
    """Menu-dependent representation in which the intuitive system agrees with the preference.

    The order is read off within-menu probability rankings. Weights of all but
    the best item are pinned by tripleton odds against the worst item; the best
    item's weight is only bounded, and the midpoint of its interval is used.
    """
    _require_positive(rho)
    order = _consistent_order(rho)
    reports = check_ddst_axioms(rho, order, consistent=True)
    for r in reports.values():
        if not r.passed:
            raise AxiomViolation(f"{r.axiom} fails", axiom=r.axiom, witnesses=r.witnesses[:5])
    params = _build(rho, order, consistent=True)
    params.diagnostics["axioms"] = {k: r.passed for k, r in reports.items()}
    return params


@dataclass
class KnownBestResult:
    order: LinearOrder
    representable: bool
    params: DDstParams | None
    reports: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "order": list(self.order.ranking),
            "representable": self.representable,
            "params": self.params.to_dict() if self.params else None,
            "axioms": {k: r.to_dict() for k, r in self.reports.items()},
            "reason": self.reason,
        }


def ddst_identify_known_best(rho: ChoiceData, x_star: str) -> KnownBestResult:
    """Order below a known best item from how its removal shifts pairwise odds."""
    _require_positive(rho)
    order = _known_best_order(rho, x_star)
    reports = check_ddst_axioms(rho, order, consistent=False)
    failed = [r.axiom for r in reports.values() if not r.passed]
    if failed:
        return KnownBestResult(order, False, None, reports, "failed: " + ", ".join(failed))
    try:
        params = _build(rho, order, consistent=False)
    except AxiomViolation as e:
        return KnownBestResult(order, False, None, reports, str(e))
    return KnownBestResult(order, True, params, reports)


# heterogeneous populations

class HDstParams:
    """Population shares over dual-system types that share one universe."""

    def __init__(self, types: Sequence):
        ts = []
        for t in types:
            eta, p = (t["share"], t["params"]) if isinstance(t, Mapping) else t
            if not isinstance(p, DstParams):
                p = DstParams.from_dict(p)
            if not 0 < eta <= 1:
                raise DomainError(f"type share must lie in (0,1], got {eta}")
            ts.append((eta, p))
        if not ts:
            raise DomainError("at least one type is required")
        if abs(sum(e for e, _ in ts) - 1) > 1e-9:
            raise NormalizationError("type shares must sum to one")
        uni = ts[0][1].universe
        if any(p.universe != uni for _, p in ts):
            raise UniverseMismatch("all types must share one universe")
        self.types = ts

    @property
    def universe(self) -> tuple:
        return self.types[0][1].universe

    def to_dict(self) -> dict:
        return {"types": [{"share": e, "params": p.to_dict()} for e, p in self.types]}


def hdst_rcf(params: HDstParams, menus=None) -> ChoiceData:
    """Population choice probabilities: the share-weighted mixture of each type's."""
    menus = _menu_list(menus, params.universe)
    parts = [(e, dst_rcf(p, menus)) for e, p in params.types]
    rows = {S: {x: sum(e * r.get(x, S) for e, r in parts) for x in sorted(S)} for S in menus}
    return ChoiceData(params.universe, rows)


def block_marschak(rho: ChoiceData, x: str, S_star) -> Number:
    """Alternating sum of rho(x, S') over all supersets S' of ``S_star``."""
    S_star = frozenset(S_star)
    if x not in S_star:
        raise DomainError(f"{x!r} is not in {menu_label(S_star)}")
    rest = sorted(set(rho.universe) - S_star)
    total = 0
    for k in range(len(rest) + 1):
        for C in itertools.combinations(rest, k):
            S = _need(rho, S_star | set(C))
            total += (-1) ** k * rho.get(x, S)
    return total


@dataclass
class RumReport:
    passed: bool
    strict_interior: bool
    min_value: float
    violations: list
    values: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, "strict_interior": self.strict_interior, "min_value": self.min_value,
                "violations": self.violations[:100], "n_violations": len(self.violations)}


def rum_check(rho: ChoiceData, tol: float = 1e-12) -> RumReport:
    """Every Block-Marschak sum non-negative (a random-utility model exists)."""
    values = {}
    for S in subsets(rho.universe):
        for x in sorted(S):
            values[(x, S)] = block_marschak(rho, x, S)
    bad = [{"alternative": x, "menu": sorted(S), "value": float(v)}
           for (x, S), v in values.items() if v < -tol]
    low = min(values.values())
    return RumReport(not bad, bool(low > tol), float(low), bad, values)


@dataclass
class RumApproximation:
    params: HDstParams
    sup_error: float
    bound: float
    target: ChoiceData

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "sup_error": self.sup_error, "bound": self.bound}


def rum_approximate(rum_types: Sequence, alpha: float, lam: float) -> RumApproximation:
    """Mixture of dual-system types whose Luce weights exp(-lam * rank) mimic each order."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    types = [(eta, LinearOrder.coerce(o)) for eta, o in rum_types]
    uni = sorted(types[0][1].universe)
    n = len(uni)
    if lam * (n - 1) > 700:
        raise DomainError("lambda is too large: weights underflow")
    built = []
    for eta, o in types:
        w = {x: math.exp(-lam * o.rank(x)) for x in uni}
        built.append((eta, DstParams(alpha, o, w)))
    params = HDstParams(built)
    approx = hdst_rcf(params)
    rows = {S: {x: sum(eta for eta, o in types if o.best(S) == x) for x in sorted(S)} for S in subsets(uni)}
    target = ChoiceData(uni, rows)
    err = approx.max_abs_diff(target)
    return RumApproximation(params, float(err), (1 - alpha) * (n - 1) * math.exp(-lam), target)


# micro-foundation

def microfoundation_alpha(weights, menu, m_S: Number, best: str) -> Number:
    """Cognitive weight implied by a required improvement ``m_S`` on the best item's share."""
    weights = weights if isinstance(weights, LuceWeights) else LuceWeights(weights)
    S = frozenset(menu)
    if best not in S or len(S) < 2:
        raise DomainError("menu needs at least two items including the best one")
    share = weights[best] / weights.total(S)
    if not 0 <= m_S < 1 - share:
        raise DomainError(f"required improvement must lie in [0, {float(1 - share):.6g})", m_S=float(m_S))
    return m_S / (1 - share)


@dataclass
class FocResult:
    passed: bool
    alpha: Number
    solution: dict
    dst: dict
    lambda1: Number
    lambda2: Number
    binding: bool
    residuals: dict

    def to_dict(self) -> dict:
        return {
            "passed": self.passed, "alpha": self.alpha, "binding": self.binding,
            "solution": dict(self.solution), "dst": dict(self.dst),
            "lambda1": self.lambda1, "lambda2": self.lambda2,
            "residuals": dict(self.residuals),
        }


def verify_foc(weights, menu, m_S: Number, best: str, tol: float = 1e-12) -> FocResult:
    """Solve min sum rho^2/w subject to the best item's share floor and compare with the dual-system rule.

    The programme is a convex quadratic, so the KKT point below is its unique
    optimum: shares proportional to w, except that the best item is lifted to
    its floor when the floor binds.
    """
    weights = weights if isinstance(weights, LuceWeights) else LuceWeights(weights)
    S = frozenset(menu)
    alpha = microfoundation_alpha(weights, S, m_S, best)
    W = weights.total(S)
    wb = weights[best]
    floor = wb / W + m_S
    binding = m_S > 0
    top = floor if binding else wb / W
    sol = {x: (1 - top) * weights[x] / (W - wb) for x in sorted(S) if x != best}
    sol[best] = top
    lam1 = 2 * (1 - top) / (W - wb)
    lam2 = 2 * top / wb - lam1
    dst = {x: (1 - alpha) * weights[x] / W + (alpha if x == best else 0) for x in sorted(S)}
    residuals = {
        "stationarity": max(abs(2 * sol[x] / weights[x] - lam1 - (lam2 if x == best else 0)) for x in S),
        "feasibility": max(0, floor - sol[best]),
        "slackness": abs(lam2 * (sol[best] - floor)),
        "adding_up": abs(sum(sol.values()) - 1),
        "dst_gap": max(abs(sol[x] - dst[x]) for x in S),
    }
    ok = all(v <= tol for v in residuals.values()) and lam2 >= -tol
    return FocResult(ok, alpha, sol, dst, lam1, lam2, binding, residuals)


__all__ = [
    "DDstParams", "ddst_rcf", "ddst_representations_3", "ddst_construct_3", "check_ddst_axioms",
    "ddst_identify_consistent", "KnownBestResult", "ddst_identify_known_best", "HDstParams", "hdst_rcf",
    "block_marschak", "RumReport", "rum_check", "RumApproximation", "rum_approximate",
    "microfoundation_alpha", "FocResult", "verify_foc",
]
