"""How rational is a random choice function?

Two indices are provided. The swaps index is the smallest expected number of
better items passed over, minimised over linear orders. The lambda index is
the measure of selectivity levels at which "keep everything within a factor
lambda of the mode" is rationalisable by a weak order. Dominance predicates
(first-order stochastic dominance, likelihood-ratio ordering, single
crossing) support comparative statics.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core import ChoiceData, LinearOrder, LuceWeights, MenuWeights, menu_label
from .exceptions import DomainError, MissingMenu, UniverseTooLarge
from .numeric import Number

FOSD_TOL = 1e-12
TIE_TOL = 1e-12


def swaps_cost(rho: ChoiceData, sigma: MenuWeights, order) -> Number:
    """Expected number of strictly better items in the menu than the chosen one."""
    order = LinearOrder.coerce(order)
    total = 0
    for S in sigma:
        ranked = order.sort(S)
        total += sigma[S] * sum(k * rho.get(x, S) for k, x in enumerate(ranked))
    return total


@dataclass
class SwapsResult:
    index: Number
    minimizers: list
    per_order_cost: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "index": float(self.index),
            "minimizers": [list(o.ranking) for o in self.minimizers],
            "per_order_cost": {k: float(v) for k, v in self.per_order_cost.items()},
        }


def swaps_index(rho: ChoiceData, sigma: MenuWeights | None = None, max_universe: int = 8,
                tol: float = 1e-12) -> SwapsResult:
    """Global minimum of the swaps cost over every linear order, with all minimisers."""
    if len(rho.universe) > max_universe:
        raise UniverseTooLarge(f"{len(rho.universe)} alternatives exceed the limit of {max_universe}")
    if sigma is None:
        sigma = MenuWeights.uniform([S for S in rho.menus if S], exact=rho.is_exact)
    for S in sigma:
        if not rho.has(S) and len(S) > 1:
            raise MissingMenu(f"menu {menu_label(S)} has a weight but no data")
    costs = {}
    orders = list(LinearOrder.all_orders(rho.universe))
    for o in orders:
        costs[str(o)] = swaps_cost(rho, sigma, o)
    best = min(costs.values())
    exact = all(isinstance(v, (int, Fraction)) for v in costs.values())
    slack = 0 if exact else tol
    mins = [o for o in orders if costs[str(o)] - best <= slack]
    return SwapsResult(best, mins, costs)


@dataclass(frozen=True)
class FosdResult:
    dominates: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.dominates


def fosd(rho1: ChoiceData, rho2: ChoiceData, order, tol: float = FOSD_TOL) -> FosdResult:
    """Does rho1 put at least as much mass as rho2 on every upper set of ``order``?"""
    order = LinearOrder.coerce(order)
    common = [S for S in rho1.menus if rho2.has(S) and len(S) >= 2]
    for S in common:
        c1 = c2 = 0
        for x in order.sort(S):
            c1 += rho1.get(x, S)
            c2 += rho2.get(x, S)
            if c1 < c2 - tol:
                return FosdResult(False, (x, tuple(sorted(S)), float(c1), float(c2)))
    return FosdResult(True)


def mlr_check(w1, w2, order, tol: float = 1e-12) -> bool:
    """Weight ratio w1/w2 weakly decreases along the order."""
    order = LinearOrder.coerce(order)
    w1, w2 = LuceWeights(w1), LuceWeights(w2)
    ratios = [w1[x] / w2[x] for x in order.ranking]
    return all(a >= b - tol * max(1, abs(b)) for a, b in zip(ratios, ratios[1:]))


def single_crossing(order_prime, order, benchmark) -> bool:
    """Whenever the benchmark and ``order_prime`` agree that x beats y, so does ``order``."""
    op, o, b = (LinearOrder.coerce(v) for v in (order_prime, order, benchmark))
    for x, y in itertools.permutations(b.ranking, 2):
        if b.prefers(x, y) and op.prefers(x, y) and not o.prefers(x, y):
            return False
    return True


def lambda_correspondence(rho: ChoiceData, lam: Number, tie_tol: float | None = None) -> dict:
    """Items whose probability is at least ``lam`` times the menu's largest."""
    if not 0 < lam <= 1:
        raise DomainError(f"lambda must lie in (0,1], got {lam}")
    if tie_tol is None:
        tie_tol = 0 if rho.is_exact else TIE_TOL
    out = {}
    for S in rho.menus:
        if not S:
            continue
        row = {x: rho.get(x, S) for x in sorted(S)}
        top = max(row.values())
        out[S] = frozenset(x for x, v in row.items() if v >= lam * top - tie_tol)
    return out


@lru_cache(maxsize=16)
def ordered_partitions(universe: tuple) -> tuple:
    """All weak orders on ``universe`` as rank maps (0 = top class)."""
    items = list(universe)
    n = len(items)
    out = []
    for labels in itertools.product(range(n), repeat=n):
        used = sorted(set(labels))
        if used != list(range(len(used))):
            continue
        out.append(dict(zip(items, labels)))
    return tuple(out)


def is_rationalizable(correspondence: dict, universe) -> bool:
    """Is there a weak order whose top class in each menu is the chosen set?"""
    for rank in ordered_partitions(tuple(sorted(universe))):
        ok = True
        for S, chosen in correspondence.items():
            top = min(rank[x] for x in S)
            if chosen != frozenset(x for x in S if rank[x] == top):
                ok = False
                break
        if ok:
            return True
    return False


def rationality_index(rho: ChoiceData, max_universe: int = 5, details: bool = False):
    """Length of the set of lambda in (0,1] with a rationalisable lambda-correspondence."""
    if len(rho.universe) > max_universe:
        raise UniverseTooLarge(f"{len(rho.universe)} alternatives exceed the limit of {max_universe}")
    exact = rho.is_exact
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    points = {zero, one}
    for S in rho.menus:
        if not S:
            continue
        row = [rho.get(x, S) for x in S]
        top = max(row)
        for v in row:
            r = v / top
            if 0 < r < 1:
                points.add(r)
    pts = sorted(points)
    total = zero
    intervals = []
    for lo, hi in zip(pts, pts[1:]):
        if hi - lo <= 0:
            continue
        mid = (lo + hi) / 2
        ok = is_rationalizable(lambda_correspondence(rho, mid), rho.universe)
        intervals.append((lo, hi, ok))
        if ok:
            total += hi - lo
    if details:
        return total, intervals
    return total


__all__ = [
    "swaps_cost", "SwapsResult", "swaps_index", "FosdResult", "fosd", "mlr_check", "single_crossing",
    "lambda_correspondence", "ordered_partitions", "is_rationalizable", "rationality_index",
]
