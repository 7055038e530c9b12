"""Domain types and the forward dual-system choice model.

A dual-system choice function mixes a Luce rule (weights ``w``) with a strict
maximiser of a linear order. With probability ``alpha`` the deliberate system
picks the best item of the menu; otherwise the automatic system draws an
item in proportion to its weight.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exceptions import (
    AlternativeNotInMenu,
    DomainError,
    EmptyMenuCollection,
    InvalidReplicaCount,
    MenuOutsideUniverse,
    MissingMenu,
    NormalizationError,
    UniverseMismatch,
)
from .numeric import Number

DEFAULT_ID = "__default__"
EMPTY_MENU: frozenset = frozenset()
ROW_TOL = 1e-9

Menu = frozenset


def as_menu(members: Iterable[str], allow_empty: bool = False) -> frozenset:
    if isinstance(members, str):
        raise TypeError("a menu is a collection of ids, not a single string")
    items = list(members)
    for a in items:
        if not isinstance(a, str) or not a:
            raise MenuOutsideUniverse(f"invalid alternative id {a!r}")
    S = frozenset(items)
    if len(S) != len(items):
        raise MenuOutsideUniverse(f"duplicate alternatives in menu {sorted(items)}")
    if not S and not allow_empty:
        raise MenuOutsideUniverse("menus must be non-empty")
    return S


def menu_sort_key(S: frozenset) -> tuple:
    return (len(S), tuple(sorted(S)))


def sorted_menus(menus: Iterable[frozenset]) -> list[frozenset]:
    return sorted(set(menus), key=menu_sort_key)


def menu_label(S: frozenset) -> str:
    return "EMPTY" if not S else "{" + ",".join(sorted(S)) + "}"


def subsets(S: Iterable[str], min_size: int = 1, max_size: int | None = None) -> list[frozenset]:
    """All subsets of ``S`` with sizes in [min_size, max_size], in canonical order."""
    members = sorted(S)
    hi = len(members) if max_size is None else min(max_size, len(members))
    out = []
    for k in range(min_size, hi + 1):
        out.extend(frozenset(c) for c in itertools.combinations(members, k))
    return out


@dataclass(frozen=True)
class LinearOrder:
    """A strict ranking; position 0 is the most preferred alternative."""

    ranking: tuple
    _pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        ranking = tuple(self.ranking)
        if not ranking:
            raise DomainError("an order needs at least one alternative")
        for a in ranking:
            if not isinstance(a, str) or not a:
                raise DomainError(f"invalid alternative id {a!r}")
        if len(set(ranking)) != len(ranking):
            raise DomainError(f"order repeats alternatives: {ranking}")
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "_pos", {a: i for i, a in enumerate(ranking)})

    @classmethod
    def parse(cls, text: str) -> "LinearOrder":
        sep = ">" if ">" in text else ","
        return cls(tuple(p.strip() for p in text.split(sep) if p.strip()))

    @classmethod
    def coerce(cls, order) -> "LinearOrder":
        if isinstance(order, LinearOrder):
            return order
        if isinstance(order, str):
            return cls.parse(order)
        return cls(tuple(order))

    @staticmethod
    def all_orders(universe: Iterable[str]) -> Iterator["LinearOrder"]:
        for perm in itertools.permutations(sorted(universe)):
            yield LinearOrder(perm)

    @property
    def universe(self) -> frozenset:
        return frozenset(self.ranking)

    def rank(self, x: str) -> int:
        try:
            return self._pos[x]
        except KeyError:
            raise MenuOutsideUniverse(f"{x!r} is not ranked by this order") from None

    def prefers(self, x: str, y: str) -> bool:
        return self.rank(x) < self.rank(y)

    def sort(self, S: Iterable[str]) -> tuple:
        """Members of ``S`` from best to worst."""
        return tuple(sorted(S, key=self.rank))

    def best(self, S: Iterable[str]) -> str:
        return min(S, key=self.rank)

    def worst(self, S: Iterable[str]) -> str:
        return max(S, key=self.rank)

    def __iter__(self):
        return iter(self.ranking)

    def __len__(self):
        return len(self.ranking)

    def __str__(self):
        return ">".join(self.ranking)


class LuceWeights(Mapping):
    """Strictly positive weights, normalised to sum to one on construction."""

    def __init__(self, w: Mapping[str, Number]):
        if isinstance(w, LuceWeights):
            w = w.as_dict()
        if not w:
            raise DomainError("weights need at least one alternative")
        for k, v in w.items():
            if not isinstance(k, str) or not k:
                raise DomainError(f"invalid alternative id {k!r}")
            if not v > 0:
                raise DomainError(f"weight of {k!r} must be strictly positive, got {v}")
        total = sum(w.values())
        self._w = {k: w[k] / total for k in sorted(w)}

    def __getitem__(self, x):
        try:
            return self._w[x]
        except KeyError:
            raise MenuOutsideUniverse(f"{x!r} has no weight") from None

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __repr__(self):
        return f"LuceWeights({self._w!r})"

    @property
    def universe(self) -> frozenset:
        return frozenset(self._w)

    def total(self, S: Iterable[str]) -> Number:
        return sum(self[x] for x in sorted(S))

    def as_dict(self) -> dict:
        return dict(self._w)


class DstParams:
    """Cognitive weight, preference order and Luce weights of one decision maker."""

    def __init__(self, alpha: Number, order, weights):
        if not 0 < alpha < 1:
            raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")
        self.alpha = alpha
        self.order = LinearOrder.coerce(order)
        self.weights = weights if isinstance(weights, LuceWeights) else LuceWeights(weights)
        if self.order.universe != self.weights.universe:
            raise UniverseMismatch(
                "order and weights cover different alternatives",
                order=sorted(self.order.universe),
                weights=sorted(self.weights.universe),
            )

    @property
    def universe(self) -> tuple:
        return tuple(sorted(self.order.universe))

    def prob(self, menu, x: str) -> Number:
        return dst_prob(self, menu, x)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "order": list(self.order.ranking), "weights": self.weights.as_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DstParams":
        return cls(d["alpha"], d["order"], d["weights"])

    def __repr__(self):
        return f"DstParams(alpha={self.alpha!r}, order={str(self.order)!r}, weights={self.weights.as_dict()!r})"


class ReferenceModel(enum.Enum):
    """Boundary models outside the open unit interval, kept for baselines."""

    LUCE = "luce"
    MAXIMIZER = "maximizer"


def reference_prob(kind: ReferenceModel, order, weights, menu, x: str) -> Number:
    S = _check_menu(menu, x, LinearOrder.coerce(order).universe)
    if kind is ReferenceModel.MAXIMIZER:
        return 1 if LinearOrder.coerce(order).best(S) == x else 0
    w = weights if isinstance(weights, LuceWeights) else LuceWeights(weights)
    return w[x] / w.total(S)


@dataclass(frozen=True)
class MenuCollection:
    """The menus on which choices are observed (or requested)."""

    universe: tuple
    menus: tuple

    def __post_init__(self):
        uni = tuple(sorted(set(self.universe)))
        if len(uni) != len(tuple(self.universe)):
            raise DomainError("universe lists an alternative twice")
        for a in uni:
            if not isinstance(a, str) or not a:
                raise DomainError(f"invalid alternative id {a!r}")
        menus = sorted_menus(frozenset(m) for m in self.menus)
        U = set(uni)
        for m in menus:
            if not m <= U:
                raise MenuOutsideUniverse(f"menu {menu_label(m)} leaves the universe", menu=sorted(m))
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "menus", tuple(menus))

    @classmethod
    def full(cls, universe, min_size: int = 1, max_size: int | None = None, include_empty: bool = False):
        menus = subsets(universe, 0 if include_empty else min_size, max_size)
        if include_empty and min_size > 1:
            menus = [m for m in menus if len(m) == 0 or len(m) >= min_size]
        return cls(tuple(universe), tuple(menus))

    def __iter__(self):
        return iter(self.menus)

    def __len__(self):
        return len(self.menus)

    def __contains__(self, S):
        return frozenset(S) in set(self.menus)

    def richness_violations(self) -> list[str]:
        present = set(self.menus)
        issues = []
        if len(self.universe) < 3:
            issues.append(f"universe has {len(self.universe)} alternatives, need at least 3")
        for m in self.menus:
            for T in subsets(m, 1, len(m) - 1):
                if len(T) >= 2 and T not in present:
                    issues.append(f"{menu_label(T)} is missing although {menu_label(m)} is observed")
        for T in subsets(self.universe, 3, 3):
            if T not in present:
                issues.append(f"three-element menu {menu_label(T)} is missing")
        for T in subsets(self.universe, 2, 2):
            if T not in present:
                issues.append(f"binary menu {menu_label(T)} is missing")
        return sorted(set(issues))

    @property
    def is_rich(self) -> bool:
        return not self.richness_violations()


class ChoiceData:
    """A random choice function: a probability distribution over each observed menu.

    Singleton menus need not be stored; their only member is chosen with
    probability one. When ``default`` is set, every menu's distribution also
    covers that outside option and the empty menu is allowed.
    """

    def __init__(self, universe, prob: Mapping, counts: Mapping | None = None,
                 default: str | None = None, tol: float = ROW_TOL):
        uni = tuple(sorted(set(universe)))
        if len(uni) != len(tuple(universe)):
            raise DomainError("universe lists an alternative twice")
        if default is not None and default in uni:
            raise DomainError(f"default option {default!r} may not be part of the universe")
        U = set(uni)
        rows = {}
        for key, row in prob.items():
            S = frozenset(key)
            if S in rows:
                raise NormalizationError(f"menu {menu_label(S)} given twice")
            if not S and default is None:
                raise MenuOutsideUniverse("the empty menu requires a default option")
            if not S <= U:
                raise MenuOutsideUniverse(f"menu {menu_label(S)} leaves the universe", menu=sorted(S))
            allowed = set(S) | ({default} if default is not None else set())
            extra = set(row) - allowed
            if extra:
                raise AlternativeNotInMenu(
                    f"probabilities given for {sorted(extra)} outside menu {menu_label(S)}")
            full = {}
            for x in sorted(allowed):
                v = row.get(x, 0)
                if v < 0 or v > 1 + tol:
                    raise NormalizationError(f"probability {v} of {x!r} in {menu_label(S)} is outside [0,1]")
                full[x] = v
            total = sum(full.values())
            if abs(total - 1) > tol:
                raise NormalizationError(f"probabilities in {menu_label(S)} sum to {float(total)}",
                                         menu=sorted(S), total=float(total))
            rows[S] = full
        self.universe = uni
        self.default = default
        self._rows = {S: rows[S] for S in sorted_menus(rows)}
        self.counts = None if counts is None else {frozenset(k): dict(v) for k, v in counts.items()}

    # access
    def has(self, S) -> bool:
        return frozenset(S) in self._rows

    def __call__(self, x: str, S) -> Number:
        return self.get(x, S)

    def get(self, x: str, S) -> Number:
        S = frozenset(S)
        row = self._rows.get(S)
        if row is None:
            if len(S) == 1 and self.default is None and S <= set(self.universe):
                if x in S:
                    return 1
                raise AlternativeNotInMenu(f"{x!r} is not in {menu_label(S)}")
            if not S and self.default is not None and x == self.default:
                return 1
            raise MissingMenu(f"menu {menu_label(S)} is not in the data", menu=sorted(S))
        try:
            return row[x]
        except KeyError:
            raise AlternativeNotInMenu(f"{x!r} is not in {menu_label(S)}") from None

    def row(self, S) -> dict:
        S = frozenset(S)
        if S not in self._rows:
            if len(S) == 1 and self.default is None:
                return {next(iter(S)): 1}
            raise MissingMenu(f"menu {menu_label(S)} is not in the data", menu=sorted(S))
        return dict(self._rows[S])

    @property
    def menus(self) -> list[frozenset]:
        return list(self._rows)

    @property
    def menu_collection(self) -> MenuCollection:
        return MenuCollection(self.universe, tuple(m for m in self._rows if m))

    def cells(self) -> Iterator[tuple]:
        for S, row in self._rows.items():
            for x, v in row.items():
                yield S, x, v

    def zero_cells(self) -> list[tuple]:
        return [(S, x) for S, x, v in self.cells() if not v > 0]

    def is_positive(self) -> bool:
        return not self.zero_cells()

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for _, _, v in self.cells())

    # transforms
    def restrict(self, menus: Iterable) -> "ChoiceData":
        keep = {frozenset(m) for m in menus}
        return ChoiceData(self.universe, {S: r for S, r in self._rows.items() if S in keep},
                          default=self.default)

    def to_float(self) -> "ChoiceData":
        return ChoiceData(self.universe,
                          {S: {x: float(v) for x, v in r.items()} for S, r in self._rows.items()},
                          counts=self.counts, default=self.default)

    def max_abs_diff(self, other: "ChoiceData") -> float:
        if set(self._rows) != set(other._rows):
            raise MissingMenu("the two choice functions cover different menus")
        return max((abs(float(v) - float(other.get(x, S))) for S, x, v in self.cells()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, ChoiceData):
            return NotImplemented
        return (self.universe == other.universe and self.default == other.default
                and self._rows == other._rows)

    def __repr__(self):
        return f"ChoiceData(universe={self.universe!r}, menus={len(self._rows)}, default={self.default!r})"

    def to_dict(self) -> dict:
        return {S: dict(r) for S, r in self._rows.items()}


class MenuWeights(Mapping):
    """How often each menu is faced; a probability distribution over menus."""

    def __init__(self, sigma: Mapping, tol: float = ROW_TOL):
        if not sigma:
            raise EmptyMenuCollection("menu weights need at least one menu")
        out = {}
        for k, v in sigma.items():
            S = frozenset(k)
            if not 0 < v <= 1:
                raise DomainError(f"menu weight of {menu_label(S)} must lie in (0,1], got {v}")
            out[S] = v
        total = sum(out.values())
        if abs(total - 1) > tol:
            raise NormalizationError(f"menu weights sum to {float(total)}")
        self._s = {S: out[S] for S in sorted_menus(out)}

    @classmethod
    def uniform(cls, menus: Iterable, exact: bool = False) -> "MenuWeights":
        ms = sorted_menus(frozenset(m) for m in menus)
        if not ms:
            raise EmptyMenuCollection("no menus to weight")
        share = Fraction(1, len(ms)) if exact else 1.0 / len(ms)
        return cls({m: share for m in ms})

    def __getitem__(self, S):
        return self._s[frozenset(S)]

    def __iter__(self):
        return iter(self._s)

    def __len__(self):
        return len(self._s)


# forward model

def _check_menu(menu, x, universe) -> frozenset:
    S = frozenset(menu)
    if not S:
        raise MenuOutsideUniverse("menus must be non-empty")
    if not S <= set(universe):
        raise MenuOutsideUniverse(f"menu {menu_label(S)} leaves the universe", menu=sorted(S))
    if x not in S:
        raise AlternativeNotInMenu(f"{x!r} is not in {menu_label(S)}")
    return S


def dst_prob(params: DstParams, menu, x: str) -> Number:
    """Probability that ``x`` is chosen from ``menu``."""
    S = _check_menu(menu, x, params.order.universe)
    w = params.weights
    luce = w[x] / w.total(S)
    value = (1 - params.alpha) * luce
    if params.order.best(S) == x:
        value += params.alpha
    return value


def _menu_list(menus, universe) -> list[frozenset]:
    if menus is None:
        return subsets(universe)
    if isinstance(menus, MenuCollection):
        if set(menus.universe) != set(universe):
            raise UniverseMismatch("menu collection and parameters cover different alternatives",
                                   menus=list(menus.universe), params=sorted(universe))
        return list(menus.menus)
    out = sorted_menus(frozenset(m) for m in menus)
    for m in out:
        if not m or not m <= set(universe):
            raise MenuOutsideUniverse(f"menu {menu_label(m)} leaves the universe", menu=sorted(m))
    return out


def dst_rcf(params: DstParams, menus=None) -> ChoiceData:
    """Choice probabilities on every menu (all non-empty subsets by default)."""
    rows = {S: {x: dst_prob(params, S, x) for x in sorted(S)} for S in _menu_list(menus, params.universe)}
    return ChoiceData(params.universe, rows)


def dst_prob_tie_aware(alpha: Number, weak_order: Sequence[Iterable[str]], weights: Mapping,
                       menu, x: str) -> Number:
    """Choice probability when the preference has indifference classes.

    ``weak_order`` lists indifference classes from best to worst. The
    deliberate system splits its mass equally over the best class present
    in the menu. Weights need not be normalised.
    """
    classes = [frozenset(c) for c in weak_order]
    seen: set = set()
    for c in classes:
        if seen & c:
            raise DomainError("indifference classes overlap")
        seen |= c
    S = _check_menu(menu, x, seen)
    top = next(c & S for c in classes if c & S)
    total = sum(weights[y] for y in sorted(S))
    value = (1 - alpha) * weights[x] / total
    if x in top:
        value += alpha / len(top)
    return value


def replica_limit_prob(params: DstParams, base_menu, replicated: str, n_replicas: int, query: str) -> Number:
    """Choice probability after adding ``n_replicas`` copies of ``replicated``.

    Copies share the weight of the original and rank just below it, so the
    best item of the enlarged menu is the best item of ``base_menu``.
    """
    if not isinstance(n_replicas, (int, np.integer)) or n_replicas < 0:
        raise InvalidReplicaCount(f"replica count must be a non-negative integer, got {n_replicas!r}")
    S = _check_menu(base_menu, query, params.order.universe)
    if replicated not in S:
        raise AlternativeNotInMenu(f"{replicated!r} is not in {menu_label(S)}")
    w = params.weights
    total = w.total(S) + n_replicas * w[replicated]
    value = (1 - params.alpha) * w[query] / total
    if params.order.best(S) == query:
        value += params.alpha
    return value


@dataclass(frozen=True)
class SampleResult:
    data: ChoiceData
    counts: dict
    menu_counts: dict


def sample_choices(params: DstParams, menus=None, sigma: MenuWeights | None = None,
                   n: int = 1, seed=None) -> SampleResult:
    """Draw ``n`` (menu, choice) observations from sigma times the model."""
    if n < 1:
        raise DomainError("need at least one observation")
    menu_list = [m for m in _menu_list(menus, params.universe)]
    if not menu_list:
        raise EmptyMenuCollection("no menus to sample from")
    if sigma is None:
        sigma = MenuWeights.uniform(menu_list)
    for m in sigma:
        if m not in set(menu_list):
            raise MissingMenu(f"menu weight given for unknown menu {menu_label(m)}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = list(sigma)
    p = np.array([float(sigma[m]) for m in order])
    per_menu = rng.multinomial(n, p / p.sum())
    counts, freqs, menu_counts = {}, {}, {}
    for S, c in zip(order, per_menu):
        if c == 0:
            continue
        alts = sorted(S)
        q = np.array([float(dst_prob(params, S, x)) for x in alts])
        draws = rng.multinomial(int(c), q / q.sum())
        counts[S] = {x: int(k) for x, k in zip(alts, draws)}
        freqs[S] = {x: int(k) / int(c) for x, k in zip(alts, draws)}
        menu_counts[S] = int(c)
    data = ChoiceData(params.universe, freqs, counts=counts)
    return SampleResult(data=data, counts=counts, menu_counts=menu_counts)
