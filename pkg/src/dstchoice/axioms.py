"""Behavioural predicates that characterise the dual-system model.

Each check returns an :class:`AxiomReport`. Reports are exact predicates up to
a float tolerance and carry raw deviations so callers can re-threshold.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ChoiceData, LinearOrder, menu_label
from .exceptions import (
    AxiomViolation,
    MissingMenu,
    ModelRejection,
    NoAdmissibleTriple,
    ZeroDenominator,
)
from .identify import EPS_SIGN, revealed_preference
from .numeric import Number

TOL = 1e-7
MAX_WITNESSES = 100
MAX_BRUTE_FORCE = 8


@dataclass
class AxiomReport:
    axiom: str
    passed: bool
    witnesses: list = field(default_factory=list)
    n_violations: int = 0
    max_deviation: float = 0.0
    gamma_estimate: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "axiom": self.axiom,
            "passed": self.passed,
            "n_violations": self.n_violations,
            "max_deviation": self.max_deviation,
            "witnesses": self.witnesses,
        }
        if self.gamma_estimate is not None:
            d["gamma_estimate"] = self.gamma_estimate
        if self.notes:
            d["notes"] = self.notes
        return d


def _report(axiom: str, violations: list, max_dev: float = 0.0, **kw) -> AxiomReport:
    violations = sorted(violations, key=lambda v: repr(sorted(v.items())))
    return AxiomReport(axiom, not violations, violations[:MAX_WITNESSES], len(violations), float(max_dev), **kw)


def _menus(rho: ChoiceData, min_size: int = 1) -> list[frozenset]:
    return [S for S in rho.menus if len(S) >= min_size]


def _observed(rho: ChoiceData, S: frozenset) -> bool:
    return rho.has(S) or len(S) == 1


def substitution_rate(rho: ChoiceData, x: str, y: str, S) -> Number:
    """Relative gain in the choice probability of ``x`` when ``y`` leaves ``S``."""
    S = frozenset(S)
    if x == y or x not in S or y not in S:
        raise MissingMenu("substitution rate needs distinct x, y inside the menu")
    reduced = S - {y}
    base = rho.get(x, reduced)
    if base == 0:
        raise ZeroDenominator(f"rho({x}, {menu_label(reduced)}) is zero")
    return (base - rho.get(x, S)) / base


def check_positivity(rho: ChoiceData) -> AxiomReport:
    bad = [{"alternative": x, "menu": sorted(S), "value": float(rho.get(x, S))} for S, x in rho.zero_cells()]
    return _report("positivity", bad)


def check_rationality(rho: ChoiceData, eps_sign: float = EPS_SIGN) -> AxiomReport:
    try:
        order = revealed_preference(rho, eps_sign)
    except ModelRejection as e:
        return AxiomReport("rationality", False, [{"error": type(e).__name__, "message": str(e), **e.details}], 1)
    return AxiomReport("rationality", True, notes={"order": list(order.ranking)})


def check_strict_regularity(rho: ChoiceData) -> AxiomReport:
    bad = []
    for S in _menus(rho, 2):
        for y in sorted(S):
            T = S - {y}
            if not _observed(rho, T):
                continue
            for x in sorted(T):
                big, small = rho.get(x, S), rho.get(x, T)
                if not big < small:
                    bad.append({"alternative": x, "removed": y, "menu": sorted(S),
                                "with": float(big), "without": float(small)})
    return _report("strict_regularity", bad)


def _admissible_gain_cells(rho: ChoiceData, order: LinearOrder):
    for S in _menus(rho, 3):
        best = order.best(S)
        for x, y in itertools.permutations(sorted(S), 2):
            if best in (x, y) or not _observed(rho, S - {y}):
                continue
            yield x, y, S


def check_constant_gain(rho: ChoiceData, order, tol: float = TOL) -> AxiomReport:
    """Substitution rate over the removed item's probability is one constant."""
    order = LinearOrder.coerce(order)
    if len(rho.universe) < 3:
        raise NoAdmissibleTriple("constant gain needs at least three alternatives")
    cells = []
    for x, y, S in _admissible_gain_cells(rho, order):
        py = rho.get(y, S)
        if py == 0:
            raise ZeroDenominator(f"rho({y}, {menu_label(S)}) is zero")
        cells.append((x, y, S, substitution_rate(rho, x, y, S) / py))
    if not cells:
        raise NoAdmissibleTriple("no menu has two non-best members with the reduced menu observed")
    ratios = [c[3] for c in cells]
    gamma = sum(ratios) / len(ratios)
    spread = max(ratios) - min(ratios)
    scale = max(1, abs(gamma))
    bad = []
    if spread > tol * scale:
        mid = sorted(ratios)[len(ratios) // 2]
        bad = [{"alternative": x, "removed": y, "menu": sorted(S), "ratio": float(r)}
               for x, y, S, r in cells if abs(r - mid) > tol * scale]
        if not bad:
            bad = [{"spread": float(spread)}]
    return _report("constant_gain", bad, spread, gamma_estimate=float(gamma))


def worst_survivor_sum(rho: ChoiceData, order: LinearOrder, S) -> Number:
    """Sum over x in S of the substitution rate of the worst survivor of S minus x."""
    S = frozenset(S)
    total = 0
    for x in sorted(S):
        rest = S - {x}
        total += substitution_rate(rho, order.worst(rest), x, S)
    return total


def _sum_cells(rho: ChoiceData) -> list[frozenset]:
    return [S for S in _menus(rho, 3) if all(_observed(rho, S - {x}) for x in S)]


def check_worst_survivor_sum(rho: ChoiceData, order, tol: float = TOL) -> AxiomReport:
    """Gains of the worst survivor, summed over removals, equal one in every menu."""
    order = LinearOrder.coerce(order)
    bad, dev = [], 0.0
    for S in _sum_cells(rho):
        s = worst_survivor_sum(rho, order, S)
        d = abs(s - 1)
        dev = max(dev, float(d))
        if d > tol:
            bad.append({"menu": sorted(S), "sum": float(s)})
    return _report("worst_survivor_sum", bad, dev, notes={"order": list(order.ranking)})


def check_iia(rho: ChoiceData, tol: float = TOL) -> AxiomReport:
    """Odds between two alternatives do not depend on the menu."""
    bad, dev = [], 0.0
    by_pair: dict = {}
    for S in _menus(rho, 2):
        for x, y in itertools.combinations(sorted(S), 2):
            py = rho.get(y, S)
            if py == 0:
                raise ZeroDenominator(f"rho({y}, {menu_label(S)}) is zero")
            by_pair.setdefault((x, y), []).append((S, rho.get(x, S) / py))
    for (x, y), vals in sorted(by_pair.items()):
        ref_menu, ref = vals[0]
        for S, r in vals[1:]:
            d = abs(r - ref) / max(1, abs(ref))
            dev = max(dev, float(d))
            if d > tol:
                bad.append({"pair": [x, y], "menus": [sorted(ref_menu), sorted(S)],
                            "odds": [float(ref), float(r)]})
    return _report("iia", bad, dev)


def check_luce_axiom(rho: ChoiceData, tol: float = TOL, max_universe: int = MAX_BRUTE_FORCE) -> AxiomReport:
    """Worst-survivor sums equal one under every linear order (a Luce characterisation)."""
    if len(rho.universe) > max_universe:
        r = check_iia(rho, tol)
        r.axiom = "luce_any_order"
        r.notes["method"] = f"odds invariance (|X| > {max_universe}, brute force skipped)"
        return r
    cells = _sum_cells(rho)
    bad, dev = [], 0.0
    for order in LinearOrder.all_orders(rho.universe):
        for S in cells:
            s = worst_survivor_sum(rho, order, S)
            d = abs(s - 1)
            dev = max(dev, float(d))
            if d > tol:
                bad.append({"order": list(order.ranking), "menu": sorted(S), "sum": float(s)})
    return _report("luce_any_order", bad, dev, notes={"method": "all linear orders"})


def check_consistency_condition(rho: ChoiceData, order) -> AxiomReport:
    """Binary choices consistent with a weight ordering aligned to the preference."""
    order = LinearOrder.coerce(order)
    bad = []
    if len(rho.universe) < 3:
        return _report("consistency", bad)
    for t in itertools.combinations(rho.universe, 3):
        x, y, z = order.sort(t)
        xz, xy, yz = frozenset((x, z)), frozenset((x, y)), frozenset((y, z))
        if not all(rho.has(m) for m in (xz, xy, yz)):
            continue
        lhs = rho.get(x, xz)
        rhs = max(rho.get(x, xy), rho.get(y, yz))
        if not lhs > rhs:
            bad.append({"triple": [x, y, z], "rho_x_xz": float(lhs), "bound": float(rhs)})
    return _report("consistency", bad)


def stochastic_transitivity(rho: ChoiceData) -> dict:
    """Weak, moderate and strong stochastic transitivity on binary menus."""
    out = {"wst": [], "mst": [], "sst": []}
    half = Fraction(1, 2)
    for x, y, z in itertools.permutations(rho.universe, 3):
        xy, yz, xz = frozenset((x, y)), frozenset((y, z)), frozenset((x, z))
        if not all(rho.has(m) for m in (xy, yz, xz)):
            continue
        a, b, c = rho.get(x, xy), rho.get(y, yz), rho.get(x, xz)
        if a >= half and b >= half:
            w = {"triple": [x, y, z], "rho_x_xy": a, "rho_y_yz": b, "rho_x_xz": c}
            if not c >= half:
                out["wst"].append(w)
            if not c >= min(a, b):
                out["mst"].append(w)
            if not c >= max(a, b):
                out["sst"].append(w)
    return {k: _report(k, v) for k, v in out.items()}


def check_dst(rho: ChoiceData, eps_sign: float = EPS_SIGN, tol: float = TOL) -> dict:
    """Run every characterising predicate; order-dependent checks use the revealed order."""
    reports = {
        "positivity": check_positivity(rho),
        "rationality": check_rationality(rho, eps_sign),
        "strict_regularity": check_strict_regularity(rho),
    }
    order = reports["rationality"].notes.get("order")
    if order is not None:
        try:
            reports["constant_gain"] = check_constant_gain(rho, order, tol)
        except NoAdmissibleTriple as e:
            reports["constant_gain"] = AxiomReport("constant_gain", True, notes={"skipped": str(e)})
        reports["worst_survivor_sum"] = check_worst_survivor_sum(rho, order, tol)
    else:
        for k in ("constant_gain", "worst_survivor_sum"):
            reports[k] = AxiomReport(k, False, [{"skipped": "no revealed order"}], 1)
    return reports


def require(report: AxiomReport) -> AxiomReport:
    if not report.passed:
        raise AxiomViolation(f"{report.axiom} fails", axiom=report.axiom, witnesses=report.witnesses[:5])
    return report


__all__ = [
    "AxiomReport", "substitution_rate", "check_positivity", "check_rationality", "check_strict_regularity",
    "check_constant_gain", "worst_survivor_sum", "check_worst_survivor_sum", "check_iia",
    "check_luce_axiom", "check_consistency_condition", "stochastic_transitivity", "check_dst", "require",
]
