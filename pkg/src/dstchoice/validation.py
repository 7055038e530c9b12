"""Input coercion for the estimator classes.

Choice data arrive in several shapes: a :class:`ChoiceData`, a mapping from
menus to probability rows, a long table (``menu``, ``alternative``, ``value``)
or individual records (menus in ``X``, chosen items in ``y``).
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable, Mapping

from .core import ChoiceData, LinearOrder, as_menu
from .exceptions import DomainError, ParseError


def _menu_of(value) -> frozenset:
    if isinstance(value, str):
        if value in ("", "EMPTY"):
            raise DomainError("choice records need a non-empty menu")
        return as_menu(value.split("+"))
    return as_menu(value)


def _from_counts(counts: dict, universe=None) -> ChoiceData:
    uni = set(universe or ())
    for S in counts:
        uni |= S
    prob = {}
    for S, row in counts.items():
        n = sum(row.values())
        prob[S] = {x: Fraction(c, n) for x, c in row.items()}
    data = ChoiceData(sorted(uni), prob, counts=counts)
    return data.to_float()


def _from_records(menus: Iterable, choices: Iterable) -> ChoiceData:
    menus, choices = list(menus), list(choices)
    if len(menus) != len(choices):
        raise DomainError(f"{len(menus)} menus but {len(choices)} choices")
    if not menus:
        raise DomainError("no choice records")
    counts: dict = {}
    for m, c in zip(menus, choices):
        S = _menu_of(m)
        if c not in S:
            raise DomainError(f"chosen item {c!r} is not in its menu {sorted(S)}")
        counts.setdefault(S, Counter())[c] += 1
    return _from_counts({S: dict(r) for S, r in counts.items()})


def _from_frame(frame) -> ChoiceData:
    cols = [str(c) for c in frame.columns]
    menu_col = "menu" if "menu" in cols else "menu_id" if "menu_id" in cols else None
    if menu_col is None or "alternative" not in cols or "value" not in cols:
        raise ParseError("table needs columns menu (or menu_id), alternative, value")
    rows: dict = {}
    for m, x, v in zip(frame[menu_col], frame["alternative"], frame["value"]):
        rows.setdefault(_menu_of(m), {})[str(x)] = v
    values = [v for r in rows.values() for v in r.values()]
    if all(float(v).is_integer() for v in values) and any(v > 1 for v in values):
        return _from_counts({S: {x: int(v) for x, v in r.items()} for S, r in rows.items()})
    uni = sorted(set().union(*rows))
    return ChoiceData(uni, {S: {x: float(v) for x, v in r.items()} for S, r in rows.items()})


def check_choice_data(X, y=None) -> ChoiceData:
    """Coerce any supported input into a :class:`ChoiceData`."""
    if y is not None:
        return _from_records(X, y)
    if isinstance(X, ChoiceData):
        return X
    if hasattr(X, "columns") and hasattr(X, "__getitem__"):
        return _from_frame(X)
    if isinstance(X, Mapping):
        rows = {_menu_of(k): dict(v) for k, v in X.items()}
        uni = sorted(set().union(*rows)) if rows else []
        return ChoiceData(uni, rows)
    raise DomainError(f"cannot read choice data from {type(X).__name__}")


def check_menus(menus, universe) -> list[frozenset]:
    """Menus for prediction, each non-empty and inside ``universe``."""
    if isinstance(menus, (str, frozenset, set)):
        menus = [menus]
    out = [_menu_of(m) for m in menus]
    U = set(universe)
    for S in out:
        if not S <= U:
            raise DomainError(f"menu {sorted(S)} has items the model has not seen", unknown=sorted(S - U))
    return out


def check_order(order, universe=None) -> LinearOrder | None:
    if order is None:
        return None
    o = LinearOrder.coerce(order)
    if universe is not None and o.universe != set(universe):
        raise DomainError("order does not rank exactly the observed alternatives",
                          order=sorted(o.universe), universe=sorted(universe))
    return o


__all__ = ["check_choice_data", "check_menus", "check_order"]
