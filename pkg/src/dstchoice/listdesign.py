"""Choosing the order in which a platform lists its products.

Customers are dual-system choosers. A product's position shifts its
perceived utility (which decides what the deliberate system picks) and sets
its salience (the Luce weight of the automatic system). The platform picks
the list that maximises expected payoff, or a CES aggregate of payoffs.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .exceptions import (
    DomainError,
    InfeasibleModel,
    NormalizationError,
    ObjectiveUnsupported,
    PerceivedUtilityTie,
    UniverseTooLarge,
)
from .numeric import Number

TIE_TOL = 1e-12
INT_TOL = 1e-7


@dataclass(frozen=True)
class ExpectedPayoff:
    def to_dict(self):
        return {"type": "expected_payoff"}


@dataclass(frozen=True)
class CES:
    delta: float

    def __post_init__(self):
        if not self.delta > 1:
            raise DomainError(f"CES elasticity must exceed 1, got {self.delta}")

    def to_dict(self):
        return {"type": "ces", "delta": self.delta}


@dataclass(frozen=True)
class Customer:
    share: Number
    alpha: Number
    salience: tuple


class ListProblem:
    """Products, payoffs, utilities, position effects and customer types."""

    def __init__(self, products: Sequence[str], payoffs: Mapping, utilities: Mapping, boost: Sequence,
                 customers: Sequence, objective=None, tie_break: bool = False):
        products = tuple(products)
        if not products or len(set(products)) != len(products):
            raise DomainError("products must be distinct and non-empty")
        n = len(products)
        self.products = products
        self.payoffs = {p: payoffs[p] for p in products}
        self.utilities = {p: utilities[p] for p in products}
        if any(not v > 0 for v in self.payoffs.values()):
            raise DomainError("payoffs must be positive")
        if len(set(self.payoffs.values())) != n:
            raise DomainError("payoffs must be pairwise distinct")
        boost = tuple(boost)
        if len(boost) != n:
            raise DomainError(f"boost needs one value per position ({n})")
        if any(b < 0 for b in boost) or any(a < b for a, b in zip(boost, boost[1:])):
            raise DomainError("boost must be non-negative and weakly decreasing")
        self.boost = boost
        custs = []
        for c in customers:
            if isinstance(c, Mapping):
                c = Customer(c["share"], c["alpha"], tuple(c["salience"]))
            elif not isinstance(c, Customer):
                c = Customer(c[0], c[1], tuple(c[2]))
            if not 0 < c.share <= 1:
                raise DomainError("customer shares must lie in (0,1]")
            if not 0 < c.alpha < 1:
                raise DomainError("customer alpha must lie in (0,1)")
            if len(c.salience) != n or any(not s > 0 for s in c.salience):
                raise DomainError("salience needs one positive value per position")
            if any(a <= b for a, b in zip(c.salience, c.salience[1:])):
                raise DomainError("salience must strictly decrease with position")
            custs.append(c)
        if not custs:
            raise DomainError("at least one customer type is required")
        if abs(sum(c.share for c in custs) - 1) > 1e-9:
            raise NormalizationError("customer shares must sum to one")
        self.customers = tuple(custs)
        self.objective = objective if objective is not None else ExpectedPayoff()
        self.tie_break = tie_break
        self.ties = self._position_ties()
        if self.ties and not tie_break:
            raise PerceivedUtilityTie("some list gives two products the same perceived utility",
                                      example=self.ties[0])

    def _position_ties(self) -> list:
        out = []
        for x, y in itertools.combinations(self.products, 2):
            for k, q in itertools.permutations(range(len(self.products)), 2):
                if abs((self.utilities[x] + self.boost[k]) - (self.utilities[y] + self.boost[q])) <= TIE_TOL:
                    out.append({"products": [x, y], "positions": [k + 1, q + 1]})
        return out

    @property
    def size(self) -> int:
        return len(self.products)

    def payoff_order(self) -> tuple:
        return tuple(sorted(self.products, key=lambda p: (-self.payoffs[p], p)))

    @classmethod
    def from_dict(cls, d: Mapping) -> "ListProblem":
        obj = d.get("objective", "expected_payoff")
        if isinstance(obj, Mapping):
            kind = obj.get("type", "expected_payoff")
            objective = CES(obj["delta"]) if kind == "ces" else ExpectedPayoff()
        elif isinstance(obj, str) and obj.startswith("ces"):
            objective = CES(float(d.get("delta", obj.partition(":")[2] or 2)))
        else:
            objective = ExpectedPayoff()
        return cls(d["products"], d["payoffs"], d["utilities"], d["boost"], d["customers"], objective,
                   bool(d.get("tie_break", False)))


def _positions(problem: ListProblem, lst: Sequence[str]) -> dict:
    lst = tuple(lst)
    if sorted(lst) != sorted(problem.products) or len(set(lst)) != len(lst):
        raise DomainError("a list must order every product exactly once")
    return {p: i for i, p in enumerate(lst)}


def perceived_best(problem: ListProblem, lst: Sequence[str]) -> str:
    pos = _positions(problem, lst)
    score = {p: problem.utilities[p] + problem.boost[pos[p]] for p in problem.products}
    top = max(score.values())
    winners = sorted(p for p, v in score.items() if top - v <= TIE_TOL)
    if len(winners) > 1 and not problem.tie_break:
        raise PerceivedUtilityTie("perceived utilities tie for the top", products=winners)
    return winners[0]


def list_demand(problem: ListProblem, lst: Sequence[str]) -> dict:
    """Market share of each product when products appear in the order ``lst``."""
    pos = _positions(problem, lst)
    best = perceived_best(problem, lst)
    demand = {p: 0 for p in problem.products}
    for c in problem.customers:
        total = sum(c.salience)
        for p in problem.products:
            v = (1 - c.alpha) * c.salience[pos[p]] / total
            if p == best:
                v += c.alpha
            demand[p] += c.share * v
    return demand


def platform_utility(problem: ListProblem, demand: Mapping) -> Number:
    obj = problem.objective
    if isinstance(obj, CES):
        e = (obj.delta - 1) / obj.delta
        return sum(float(demand[p]) * float(problem.payoffs[p]) ** e for p in problem.products) ** (1 / e)
    return sum(problem.payoffs[p] * demand[p] for p in problem.products)


def list_utility(problem: ListProblem, lst: Sequence[str]) -> Number:
    return platform_utility(problem, list_demand(problem, lst))


def system_utilities(problem: ListProblem, lst: Sequence[str]) -> dict:
    """Expected payoff if every customer used only the automatic or only the deliberate system."""
    pos = _positions(problem, lst)
    best = perceived_best(problem, lst)
    auto = 0
    for c in problem.customers:
        total = sum(c.salience)
        auto += c.share * sum(problem.payoffs[p] * c.salience[pos[p]] / total for p in problem.products)
    return {"system1": auto, "system2": problem.payoffs[best], "perceived_best": best,
            "perceived_utility": problem.utilities[best] + problem.boost[pos[best]]}


@dataclass
class ListStructureReport:
    """Block structure of an optimal list relative to the payoff ranking."""

    passed: bool
    checks: dict
    pivot: str
    pivot_rank: int
    insertion: int
    top_utility: str
    top_utility_rank: int
    first_block: list
    middle_block: list
    last_block: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_list_structure(problem: ListProblem, lst) -> ListStructureReport:
    """Check the block pattern an optimal list must follow.

    The perceived-best product (the pivot, payoff rank ``a``) sits at some
    position ``m``; the ``a - 1`` better-paying products fill positions
    1..a around it in payoff order; the highest-utility product is not placed
    above ``m``; everything below that product is in payoff order.
    """
    if isinstance(lst, ListSolution):
        lst = lst.list
    lst = tuple(lst)
    pos = {p: i + 1 for i, p in enumerate(lst)}
    ranked = problem.payoff_order()
    rank = {p: i + 1 for i, p in enumerate(ranked)}
    xa = perceived_best(problem, lst)
    a, m = rank[xa], pos[xa]
    xh = max(problem.products, key=lambda p: (problem.utilities[p], -rank[p]))
    h = rank[xh]
    first_ok = all(pos[ranked[i - 1]] == (i if i < m else i + 1) for i in range(1, a))
    first_ok = first_ok and m <= a
    cut = pos[xh]
    tail = [p for p in lst if pos[p] > cut]
    last_ok = all(problem.payoffs[x] > problem.payoffs[y] for x, y in zip(tail, tail[1:]))
    checks = {"pivot_not_below_top_utility": a <= h, "first_block": first_ok,
              "top_utility_not_above_pivot": cut >= m, "last_block_payoff_order": last_ok}
    return ListStructureReport(all(checks.values()), checks, xa, a, m, xh, h, list(lst[:a]),
                               list(lst[a:max(a, cut)]), list(lst[max(a, cut):]))


@dataclass
class ListSolution:
    list: tuple
    platform_utility: Number
    demand: dict
    co_optimal: list = field(default_factory=list)
    blocks: ListStructureReport | None = None
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def positions(self) -> dict:
        return {p: i + 1 for i, p in enumerate(self.list)}

    def to_dict(self) -> dict:
        return {
            "list": list(self.list),
            "platform_utility": float(self.platform_utility),
            "demand": {k: float(v) for k, v in self.demand.items()},
            "co_optimal": [list(c) for c in self.co_optimal],
            "blocks": self.blocks.to_dict() if self.blocks else None,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


def _solution(problem, lst, method, co_optimal, diag) -> ListSolution:
    demand = list_demand(problem, lst)
    return ListSolution(tuple(lst), platform_utility(problem, demand), demand, co_optimal,
                        verify_list_structure(problem, lst), method, diag)


def optimize_exhaustive(problem: ListProblem, max_size: int = 9, tol: float = TIE_TOL) -> ListSolution:
    """Best list by enumerating every permutation; all co-optimal lists are kept."""
    if problem.size > max_size:
        raise UniverseTooLarge(f"{problem.size} products exceed the enumeration limit of {max_size}")
    best_val = None
    best: list = []
    for perm in itertools.permutations(sorted(problem.products)):
        v = list_utility(problem, perm)
        if best_val is None or v > best_val + tol:
            best_val, best = v, [perm]
        elif abs(v - best_val) <= tol:
            best.append(perm)
    best.sort()
    return _solution(problem, best[0], "exhaustive", best, {"lists_evaluated": math.factorial(problem.size)})


def lp_coefficients(problem: ListProblem) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Payoff weights of (product, position) assignments and of being picked deliberately."""
    prods = problem.payoff_order()
    n = len(prods)
    C = np.zeros((n, n))
    D = np.zeros(n)
    for j, p in enumerate(prods):
        tau = float(problem.payoffs[p])
        for c in problem.customers:
            total = float(sum(c.salience))
            C[j] += tau * float(c.share) * (1 - float(c.alpha)) * np.array([float(s) for s in c.salience]) / total
            D[j] += tau * float(c.share) * float(c.alpha)
    return C, D, prods


class _Program:
    def __init__(self, problem: ListProblem):
        C, D, prods = lp_coefficients(problem)
        n = len(prods)
        self.n, self.prods = n, prods
        nv = 2 * n * n
        self.c = -np.concatenate([C.ravel(), np.repeat(D, n)])
        A_eq, b_eq = [], []
        for j in range(n):
            row = np.zeros(nv)
            row[j * n:(j + 1) * n] = 1
            A_eq.append(row)
            b_eq.append(1)
        for k in range(n):
            row = np.zeros(nv)
            row[[j * n + k for j in range(n)]] = 1
            A_eq.append(row)
            b_eq.append(1)
        row = np.zeros(nv)
        row[n * n:] = 1
        A_eq.append(row)
        b_eq.append(1)
        value = np.array([[float(problem.utilities[p]) + float(problem.boost[k]) for k in range(n)] for p in prods])
        A_ub, b_ub = [], []
        for j, k in itertools.product(range(n), range(n)):
            row = np.zeros(nv)
            row[n * n + j * n + k] = 1
            row[j * n + k] = -1
            A_ub.append(row)
            b_ub.append(0)
        for j, k in itertools.product(range(n), range(n)):
            row = np.zeros(nv)
            row[j * n + k] += 1
            row[n * n + j * n + k] -= 1
            higher = value > value[j, k] + TIE_TOL
            row[:n * n] -= higher.ravel()
            A_ub.append(row)
            b_ub.append(0)
        self.A_eq, self.b_eq = np.array(A_eq), np.array(b_eq, dtype=float)
        self.A_ub, self.b_ub = np.array(A_ub), np.array(b_ub, dtype=float)

    def solve(self, lo, hi):
        res = linprog(self.c, A_ub=self.A_ub, b_ub=self.b_ub, A_eq=self.A_eq, b_eq=self.b_eq,
                      bounds=list(zip(lo, hi)), method="highs")
        if res.status != 0:
            return None, None
        return -res.fun, res.x

    def encode(self, lst, best) -> np.ndarray:
        n = self.n
        x = np.zeros(2 * n * n)
        for k, p in enumerate(lst):
            j = self.prods.index(p)
            x[j * n + k] = 1
            if p == best:
                x[n * n + j * n + k] = 1
        return x

    def decode(self, x) -> tuple:
        n = self.n
        A = x[:n * n].reshape(n, n)
        order = [None] * n
        for j in range(n):
            order[int(np.argmax(A[j]))] = self.prods[j]
        return tuple(order)


def optimize_lp(problem: ListProblem, max_nodes: int = 100000) -> ListSolution:
    """Best list from the 0-1 assignment program, solved by best-first branch and bound."""
    if not isinstance(problem.objective, ExpectedPayoff):
        raise ObjectiveUnsupported("the linear program only handles expected payoff")
    if problem.ties:
        raise InfeasibleModel("perceived utilities can tie, so the dominance constraints are ill-posed")
    prog = _Program(problem)
    nv = 2 * prog.n * prog.n
    seed_list = problem.payoff_order()
    incumbent = seed_list
    inc_val = float(-prog.c @ prog.encode(seed_list, perceived_best(problem, seed_list)))
    counter = itertools.count()
    lo0, hi0 = np.zeros(nv), np.ones(nv)
    bound, x = prog.solve(lo0, hi0)
    heap = [] if bound is None else [(-bound, next(counter), lo0, hi0, x)]
    nodes = 0
    while heap and nodes < max_nodes:
        neg_bound, _, lo, hi, x = heapq.heappop(heap)
        nodes += 1
        if -neg_bound <= inc_val + 1e-12:
            continue
        frac = np.abs(x - np.round(x))
        if np.all(frac <= INT_TOL):
            val = -neg_bound
            if val > inc_val + 1e-12:
                inc_val, incumbent = val, prog.decode(np.round(x))
            continue
        a_part = frac[:prog.n * prog.n]
        pool = a_part if np.any(a_part > INT_TOL) else frac
        cand = np.where(pool > INT_TOL)[0]
        i = int(cand[np.argmin(np.abs(x[cand] - 0.5))])
        for fix in (1.0, 0.0):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[i] = hi2[i] = fix
            b, x2 = prog.solve(lo2, hi2)
            if b is not None and b > inc_val + 1e-12:
                heapq.heappush(heap, (-b, next(counter), lo2, hi2, x2))
    best = perceived_best(problem, incumbent)
    sol = _solution(problem, incumbent, "lp", [incumbent],
                    {"nodes": nodes, "lp_objective": inc_val, "search_complete": not heap,
                     "deliberate_cell": [best, incumbent.index(best) + 1]})
    if abs(float(sol.platform_utility) - inc_val) > 1e-7:
        raise InfeasibleModel("program value and direct evaluation disagree",
                              lp=inc_val, direct=float(sol.platform_utility))
    return sol


def example_problem() -> ListProblem:
    """Five products, one customer type, expected-payoff platform (a standard worked case)."""
    from fractions import Fraction as F
    prods = [f"x{j}" for j in range(1, 6)]
    return ListProblem(
        prods,
        {p: 1 - F(j, 6) for j, p in enumerate(prods, 1)},
        dict(zip(prods, [F(3, 2), F(1), F(2), F(5, 2), F(1, 2)])),
        [F(3, 2) - F(3 * j, 20) for j in range(1, 6)],
        [Customer(F(1), F(1, 2), tuple(F(2, 5) - F(j, 15) for j in range(1, 6)))],
    )


__all__ = [
    "ExpectedPayoff", "CES", "Customer", "ListProblem", "perceived_best", "list_demand", "platform_utility",
    "list_utility", "system_utilities", "ListStructureReport", "verify_list_structure", "ListSolution",
    "optimize_exhaustive", "lp_coefficients", "optimize_lp", "example_problem",
]
