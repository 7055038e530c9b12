"""Reading and writing choice data.

Two formats are supported.

* Long CSV with header ``menu_id,alternative,value`` and an optional sidecar
  CSV ``menu_id,alternative`` listing menu members (needed when some member
  has no row in the value file). Values are either frequencies or integer
  counts; integer files are normalised per menu.
* JSON ``{"universe": [...], "menus": {id: [...]}, "prob": {id: {alt: v}}}``.

The outside option is the reserved id ``__default__`` and the empty menu is
the row ``menu_id=EMPTY``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .core import DEFAULT_ID, ChoiceData, menu_sort_key, sorted_menus
from .exceptions import DuplicateCell, NormalizationError, ParseError
from .numeric import json_number, parse_number

EMPTY_ID = "EMPTY"
_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass
class LoadedDataset:
    data: ChoiceData
    richness_issues: list = field(default_factory=list)
    menu_ids: dict = field(default_factory=dict)
    is_counts: bool = False

    @property
    def is_rich(self) -> bool:
        return not self.richness_issues


def _read_csv_rows(text: str, expected: list[str], source: str) -> list[tuple[int, dict]]:
    if not text.strip():
        raise ParseError(f"{source}: file is empty", line=1)
    reader = csv.reader(_io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(f"{source}: file is empty", line=1) from None
    if header[: len(expected)] != expected:
        raise ParseError(f"{source}: header must start with {','.join(expected)}, got {','.join(header)}", line=1)
    rows = []
    for rec in reader:
        line = reader.line_num
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) < len(expected) - 1 or len(rec) > len(header):
            raise ParseError(f"{source}: line {line} has {len(rec)} fields", line=line)
        rec = rec + [""] * (len(expected) - len(rec))
        rows.append((line, {k: rec[i].strip() for i, k in enumerate(expected)}))
    return rows


def _assemble(members: dict, values: dict, default: str | None, is_counts: bool,
              exact: bool) -> tuple[ChoiceData, dict]:
    universe = sorted({a for m in members.values() for a in m})
    prob, counts, ids = {}, {}, {}
    for mid, row in values.items():
        S = frozenset(members[mid])
        if S in ids.values():
            raise DuplicateCell(f"menu {mid} has the same members as another menu", menu_id=mid)
        ids[mid] = S
        total = sum(row.values())
        if total <= 0:
            raise NormalizationError(f"menu {mid} has no positive mass", menu_id=mid)
        if is_counts:
            counts[S] = {x: int(v) for x, v in row.items()}
            prob[S] = {x: (Fraction(v, total) if exact else v / total) for x, v in row.items()}
        else:
            if abs(total - 1) > 1e-9:
                raise NormalizationError(f"frequencies in menu {mid} sum to {float(total)}", menu_id=mid)
            prob[S] = {x: (Fraction(v) if exact and isinstance(v, int) else v) for x, v in row.items()}
    data = ChoiceData(universe, prob, counts=counts or None, default=default)
    return data, ids


def parse_csv(text: str, menus_text: str | None = None, exact: bool = False,
              source: str = "<csv>") -> LoadedDataset:
    rows = _read_csv_rows(text, ["menu_id", "alternative", "value"], source)
    if not rows:
        raise ParseError(f"{source}: no data rows", line=2)
    raw: dict = {}
    texts = []
    for line, r in rows:
        mid, alt, val = r["menu_id"], r["alternative"], r["value"]
        if not mid or not alt:
            raise ParseError(f"{source}: line {line} lacks a menu id or alternative", line=line)
        try:
            num = parse_number(val, exact=exact)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{source}: line {line} value {val!r} is not a number", line=line) from None
        if num < 0:
            raise ParseError(f"{source}: line {line} has a negative value", line=line)
        cell = raw.setdefault(mid, {})
        if alt in cell:
            raise DuplicateCell(f"{source}: line {line} repeats ({mid}, {alt})", line=line, menu_id=mid)
        cell[alt] = num
        texts.append(val)
    is_counts = all(_INT_RE.match(t) for t in texts)
    if is_counts:
        raw = {m: {a: int(v) for a, v in r.items()} for m, r in raw.items()}

    default = DEFAULT_ID if any(DEFAULT_ID in r for r in raw.values()) or EMPTY_ID in raw else None
    members: dict = {}
    if menus_text is not None:
        for line, r in _read_csv_rows(menus_text, ["menu_id", "alternative"], source + " menus"):
            mid, alt = r["menu_id"], r["alternative"]
            members.setdefault(mid, set())
            if alt and alt != DEFAULT_ID:
                if alt in members[mid]:
                    raise DuplicateCell(f"menus file line {line} repeats ({mid}, {alt})", line=line)
                members[mid].add(alt)
        unknown = set(raw) - set(members)
        if unknown:
            raise ParseError(f"{source}: menus {sorted(unknown)} are not declared in the menus file")
    else:
        for mid, r in raw.items():
            members[mid] = {a for a in r if a != DEFAULT_ID}
    for mid, r in raw.items():
        outside = set(r) - members[mid] - ({DEFAULT_ID} if default else set())
        if outside:
            raise ParseError(f"{source}: menu {mid} has values for non-members {sorted(outside)}")
        if mid == EMPTY_ID and members[mid]:
            raise ParseError(f"{source}: menu {EMPTY_ID} must have no members")
    data, ids = _assemble(members, raw, default, is_counts, exact)
    mc_issues = [] if default else data.menu_collection.richness_violations()
    return LoadedDataset(data=data, richness_issues=mc_issues, menu_ids=ids, is_counts=is_counts)


def parse_json(text: str, exact: bool = False, source: str = "<json>") -> LoadedDataset:
    if not text.strip():
        raise ParseError(f"{source}: file is empty", line=1)
    try:
        doc = json.loads(text, parse_float=(Fraction if exact else float))
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: {e.msg}", line=e.lineno, offset=e.colno) from None
    if not isinstance(doc, dict) or "prob" not in doc:
        raise ParseError(f"{source}: expected an object with a 'prob' field")
    menus = doc.get("menus")
    prob = doc["prob"]
    default = doc.get("default")
    if default is None and (EMPTY_ID in prob or any(DEFAULT_ID in r for r in prob.values())):
        default = DEFAULT_ID
    members = {}
    for mid, row in prob.items():
        if menus is not None:
            if mid not in menus:
                raise ParseError(f"{source}: menu {mid} is not declared under 'menus'")
            members[mid] = {a for a in menus[mid] if a != default}
        else:
            members[mid] = {a for a in row if a != default}
    values = {}
    for mid, row in prob.items():
        values[mid] = {}
        for a, v in row.items():
            if isinstance(v, str):
                v = parse_number(v, exact=exact)
            values[mid][a] = v
    allv = [v for r in values.values() for v in r.values()]
    is_counts = bool(allv) and all(isinstance(v, int) and not isinstance(v, bool) for v in allv)
    data, ids = _assemble(members, values, default, is_counts, exact)
    if "universe" in doc:
        declared = set(doc["universe"])
        if not set(data.universe) <= declared:
            raise ParseError(f"{source}: menus use alternatives outside the declared universe")
        if declared != set(data.universe):
            data = ChoiceData(sorted(declared), data.to_dict(), counts=data.counts, default=data.default)
    issues = [] if default else data.menu_collection.richness_violations()
    return LoadedDataset(data=data, richness_issues=issues, menu_ids=ids, is_counts=is_counts)


def _sidecar_for(path: Path) -> Path | None:
    for cand in (path.with_name(path.stem + "_menus.csv"), path.with_name("menus.csv")):
        if cand.exists() and cand != path:
            return cand
    return None


def load_dataset(path, fmt: str | None = None, exact: bool = False,
                 menus_path=None) -> LoadedDataset:
    """Load and validate a choice dataset from disk."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        return parse_json(text, exact=exact, source=str(path))
    side = Path(menus_path) if menus_path else _sidecar_for(path)
    menus_text = side.read_text(encoding="utf-8") if side else None
    return parse_csv(text, menus_text, exact=exact, source=str(path))


def menu_id_for(S: frozenset) -> str:
    return EMPTY_ID if not S else "+".join(sorted(S))


def to_json_document(data: ChoiceData, exact: bool = False) -> dict:
    menus, prob = {}, {}
    for S in data.menus:
        mid = menu_id_for(S)
        menus[mid] = sorted(S)
        prob[mid] = {x: json_number(v, exact) for x, v in data.row(S).items()}
    doc = {"universe": list(data.universe), "menus": menus, "prob": prob}
    if data.default is not None:
        doc["default"] = data.default
    return doc


def dumps_json(data: ChoiceData, exact: bool = False) -> str:
    return json.dumps(to_json_document(data, exact), indent=2, sort_keys=True)


def dumps_csv(data: ChoiceData, use_counts: bool = False) -> tuple[str, str]:
    """Return (values csv, menus csv)."""
    vals = _io.StringIO()
    mems = _io.StringIO()
    vw, mw = csv.writer(vals, lineterminator="\n"), csv.writer(mems, lineterminator="\n")
    vw.writerow(["menu_id", "alternative", "value"])
    mw.writerow(["menu_id", "alternative"])
    for S in sorted_menus(data.menus):
        mid = menu_id_for(S)
        src = data.counts[S] if (use_counts and data.counts and S in data.counts) else data.row(S)
        for x, v in src.items():
            vw.writerow([mid, x, str(v)])
        if S:
            for x in sorted(S):
                mw.writerow([mid, x])
        else:
            mw.writerow([mid, ""])
    return vals.getvalue(), mems.getvalue()


def save_csv(data: ChoiceData, path, use_counts: bool = False) -> Path:
    path = Path(path)
    values, menus = dumps_csv(data, use_counts)
    path.write_text(values, encoding="utf-8")
    side = path.with_name(path.stem + "_menus.csv")
    side.write_text(menus, encoding="utf-8")
    return side


def choice_data_from_mapping(doc: Mapping, exact: bool = False) -> ChoiceData:
    return parse_json(json.dumps(doc, default=str), exact=exact).data


def rr2000_path() -> Path:
    return Path(__file__).with_name("data") / "rr2000.csv"


def load_rr2000(exact: bool = False) -> LoadedDataset:
    """Binary choice frequencies over four delayed payments (six pairs)."""
    return load_dataset(rr2000_path(), exact=exact)


__all__ = [
    "EMPTY_ID", "LoadedDataset", "parse_csv", "parse_json", "load_dataset", "to_json_document",
    "dumps_json", "dumps_csv", "save_csv", "choice_data_from_mapping", "rr2000_path", "load_rr2000",
    "menu_sort_key",
]
