"""Command-line interface: ``dst <command> [options]``.

Every command emits one JSON report (schema ``dst-report/1``) holding the tool
version, tolerances, input digests and the result. ``--format text`` renders
that same report as indented text. Exit codes: 0 success, 1 bad input,
2 the data reject the model.
"""
from __future__ import annotations

import argparse
import dataclasses
import enum
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .core import DstParams, LinearOrder, LuceWeights, MenuWeights, as_menu, dst_rcf, sample_choices, subsets
from .exceptions import ConfigError, DSTError, InputError, ModelRejection, ParseError
from .numeric import exact_mode_requested, json_number, parse_number, to_fraction

SCHEMA = "dst-report/1"
DEFAULT_TOLERANCES = {"eps_sign": 1e-7, "tol_alpha": 1e-6, "tol": 1e-7}

# command -> option -> default
COMMANDS: dict[str, dict[str, Any]] = {
    "identify": {"data": None, "menus_file": None, "input_format": None, "predict": [], "strict_richness": False},
    "axioms": {"data": None, "menus_file": None, "input_format": None, "order": None},
    "fit": {"data": None, "menus_file": None, "input_format": None, "model": "dst", "order": None,
            "restarts": 16},
    "swaps": {"data": None, "menus_file": None, "input_format": None, "sigma": "uniform"},
    "rationality-index": {"data": None, "menus_file": None, "input_format": None},
    "dstpa": {"action": None, "data": None, "menus_file": None, "input_format": None},
    "ddst": {"action": None, "data": None, "menus_file": None, "input_format": None, "best": None},
    "hdst": {"action": None, "data": None, "menus_file": None, "input_format": None, "params": None,
             "orders": [], "alpha": 0.5, "lam": 30.0},
    "microfoundation": {"action": None, "weights": None, "menu": None, "m": None, "best": None},
    "list-design": {"problem": None, "method": "exhaustive"},
    "simulate": {"params": None, "menu_sizes": None, "n": None, "out": None},
}
ACTIONS = {"dstpa": ["identify", "check"], "ddst": ["construct", "identify"],
           "hdst": ["simulate", "rum-check", "approximate"], "microfoundation": ["verify"]}
GLOBAL_KEYS = {"command", "tolerances", "exact", "seed", "format", "output"}


@dataclasses.dataclass
class RunConfig:
    command: str
    options: dict
    tolerances: dict = dataclasses.field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    exact: bool = False
    seed: int | None = None
    format: str = "json"
    output: str | None = None

    @classmethod
    def from_mapping(cls, d: Mapping) -> "RunConfig":
        d = dict(d)
        cmd = d.get("command")
        if cmd not in COMMANDS:
            raise ConfigError(f"unknown command {cmd!r}", known=sorted(COMMANDS))
        allowed = GLOBAL_KEYS | set(COMMANDS[cmd])
        unknown = sorted(set(d) - allowed)
        if unknown:
            raise ConfigError(f"unknown configuration keys for {cmd}: {unknown}", keys=unknown)
        tol = dict(DEFAULT_TOLERANCES)
        for k, v in (d.get("tolerances") or {}).items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}", known=sorted(DEFAULT_TOLERANCES))
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"tolerance {k} must be a number") from None
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive, got {v}")
            tol[k] = v
        opts = {k: d.get(k, default) for k, default in COMMANDS[cmd].items()}
        if cmd in ACTIONS and opts["action"] not in ACTIONS[cmd]:
            raise ConfigError(f"{cmd} needs one of {ACTIONS[cmd]}", action=opts["action"])
        fmt = d.get("format", "json")
        if fmt not in ("json", "text"):
            raise ConfigError(f"format must be json or text, got {fmt!r}")
        seed = d.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ConfigError("seed must be an integer")
        return cls(cmd, opts, tol, bool(d.get("exact", False)), seed, fmt, d.get("output"))

    def to_dict(self) -> dict:
        return {"command": self.command, "options": self.options, "tolerances": self.tolerances,
                "exact": self.exact, "seed": self.seed}


# JSON helpers

def to_jsonable(obj, exact: bool = False):
    if isinstance(obj, Fraction):
        return json_number(obj, exact)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v, exact) for v in obj.tolist()]
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v, exact) for v in obj)
    if isinstance(obj, LinearOrder):
        return list(obj.ranking)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {_key(k): to_jsonable(v, exact) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, exact) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict(), exact)
    return str(obj)


def _key(k) -> str:
    if isinstance(k, frozenset):
        return "+".join(sorted(k)) if k else "EMPTY"
    if isinstance(k, tuple):
        return "".join(map(str, k))
    return str(k)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _num(v, exact: bool):
    if isinstance(v, str):
        return parse_number(v, exact)
    if exact and isinstance(v, (int, float)) and not isinstance(v, bool):
        return to_fraction(v)
    return v


def _read_json(path) -> Any:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"{p}: no such file")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{p}: invalid JSON", line=e.lineno, column=e.colno) from None


def _dst_params(doc: Mapping, exact: bool) -> DstParams:
    try:
        return DstParams(_num(doc["alpha"], exact), doc["order"],
                         {k: _num(v, exact) for k, v in doc["weights"].items()})
    except KeyError as e:
        raise ParseError(f"parameters need alpha, order and weights (missing {e})") from None


def _parse_order(text):
    if text is None:
        return None
    return LinearOrder.coerce(text if not isinstance(text, str) else LinearOrder.parse(text))


class _Run:
    """Mutable state shared by one command: inputs, warnings, config."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.o = cfg.options
        self.inputs: dict = {}
        self.warnings: list = []
        self.rejected = False

    def path(self, p) -> Path:
        if p is None:
            raise ConfigError(f"{self.cfg.command} needs an input file")
        path = Path(p)
        if str(p) == "builtin:rr2000":
            from .io import rr2000_path
            path = rr2000_path()
        if not path.exists():
            raise ParseError(f"{p}: no such file")
        self.inputs[str(p)] = _digest(path)
        return path

    def data(self, need_rich: bool = False):
        from .io import _sidecar_for, load_dataset
        path = self.path(self.o.get("data"))
        side = self.o.get("menus_file")
        if side:
            self.path(side)
        elif (s := _sidecar_for(path)) is not None and path.suffix.lower() != ".json":
            self.inputs[str(s)] = _digest(s)
        ds = load_dataset(path, self.o.get("input_format"), exact=self.cfg.exact, menus_path=side)
        if ds.richness_issues:
            self.warnings.extend(f"menu collection is not rich: {m}" for m in ds.richness_issues)
            if need_rich:
                raise ParseError("identification refused: the menu collection is not rich",
                                 issues=ds.richness_issues)
        return ds.data


# commands

def _identify(run: _Run) -> dict:
    from .identify import identify, predict
    data = run.data(need_rich=bool(run.o["strict_richness"]))
    tol = run.cfg.tolerances
    ident = identify(data, eps_sign=tol["eps_sign"], tol_alpha=tol["tol_alpha"])
    out = ident.to_dict(run.cfg.exact)
    preds = []
    for m in run.o["predict"] or []:
        menu = as_menu(m.replace("+", ",").split(",")) if isinstance(m, str) else as_menu(m)
        p = predict(ident.params, menu, data)
        preds.append({"menu": sorted(menu), "out_of_sample": p.out_of_sample,
                      "distribution": {k: json_number(v, run.cfg.exact) for k, v in p.distribution.items()}})
    if preds:
        out["predictions"] = preds
    return out


def _axioms(run: _Run) -> dict:
    from .axioms import check_consistency_condition, check_dst, check_iia, stochastic_transitivity
    data = run.data()
    tol = run.cfg.tolerances
    reports = check_dst(data, eps_sign=tol["eps_sign"], tol=tol["tol"])
    extra = {"iia": check_iia(data, tol["tol"])}
    order = _parse_order(run.o["order"]) or (
        LinearOrder(reports["rationality"].notes["order"]) if reports["rationality"].passed else None)
    if order is not None:
        extra["consistency"] = check_consistency_condition(data, order)
    extra.update(stochastic_transitivity(data))
    run.rejected = not all(r.passed for r in reports.values())
    failed = [k for k, r in reports.items() if not r.passed]
    return {"dst_axioms": reports, "other": extra, "passed": not failed, "failed": failed}


def _fit(run: _Run) -> dict:
    from .estimate import fit_dst, fit_dst_all_orders, fit_logit, fit_luce
    data = run.data()
    seed = run.cfg.seed if run.cfg.seed is not None else 0
    model, order = run.o["model"], _parse_order(run.o["order"])
    restarts = int(run.o["restarts"])
    fits = []
    if model in ("dst", "all"):
        if order is None and model == "dst":
            raise ConfigError("--model dst needs --order (or use dst-search)")
        fits.append(fit_dst(data, order, n_restarts=restarts, seed=seed) if order is not None
                    else fit_dst_all_orders(data, n_restarts=restarts, seed=seed))
    if model == "dst-search":
        fits.append(fit_dst_all_orders(data, n_restarts=restarts, seed=seed))
    if model in ("logit", "all"):
        fits.append(fit_logit(data, seed=seed))
    if model in ("luce", "all"):
        fits.append(fit_luce(data))
    if not fits:
        raise ConfigError(f"unknown model {model!r}", known=["dst", "dst-search", "logit", "luce", "all"])
    observed = {"+".join(sorted(S)): {x: float(v) for x, v in data.row(S).items()}
                for S in data.menus if len(S) >= 2}
    return {"observed": observed, "fits": [f.to_dict() for f in fits]}


def _sigma(run: _Run, data):
    source = run.o["sigma"]
    if source in (None, "uniform"):
        return None
    doc = _read_json(run.path(source))
    return MenuWeights({as_menu(k.split("+")): _num(v, run.cfg.exact) for k, v in doc.items()})


def _swaps(run: _Run) -> dict:
    from .rationality import swaps_index
    data = run.data()
    res = swaps_index(data, _sigma(run, data))
    return {"index": json_number(res.index, run.cfg.exact),
            "minimizers": [list(o.ranking) for o in res.minimizers],
            "per_order_cost": {k: json_number(v, run.cfg.exact) for k, v in res.per_order_cost.items()}}


def _rationality_index(run: _Run) -> dict:
    from .rationality import rationality_index
    data = run.data()
    total, intervals = rationality_index(data, details=True)
    ex = run.cfg.exact
    return {"index": json_number(total, ex),
            "intervals": [{"low": json_number(a, ex), "high": json_number(b, ex), "rationalizable": ok}
                          for a, b, ok in intervals]}


def _dstpa(run: _Run) -> dict:
    from .availability import associated_rcf_discrepancy, check_block_marschak_default, check_mido, identify_dstpa
    data = run.data()
    if run.o["action"] == "identify":
        return identify_dstpa(data).to_dict(run.cfg.exact)
    reports = {"block_marschak": check_block_marschak_default(data), "mido": check_mido(data)}
    disc = associated_rcf_discrepancy(data)
    run.rejected = not reports["block_marschak"].passed
    return {"checks": reports, "associated_discrepancy": disc}


def _ddst(run: _Run) -> dict:
    from .extensions import ddst_construct_3, ddst_identify_consistent, ddst_identify_known_best
    data = run.data()
    if run.o["action"] == "construct":
        return ddst_construct_3(data).to_dict()
    if run.o["best"]:
        res = ddst_identify_known_best(data, run.o["best"])
        run.rejected = not res.representable
        return res.to_dict()
    return ddst_identify_consistent(data).to_dict()


def _hdst(run: _Run) -> dict:
    from .extensions import HDstParams, hdst_rcf, rum_approximate, rum_check
    from .io import to_json_document
    act = run.o["action"]
    if act == "simulate":
        doc = _read_json(run.path(run.o["params"]))
        types = [(_num(t["share"], run.cfg.exact), _dst_params(t["params"], run.cfg.exact))
                 for t in doc["types"]]
        return {"data": to_json_document(hdst_rcf(HDstParams(types)), run.cfg.exact)}
    if act == "rum-check":
        rep = rum_check(run.data())
        run.rejected = not rep.passed
        return rep.to_dict()
    types = []
    for item in run.o["orders"] or []:
        order, _, share = str(item).partition(":")
        types.append((float(share) if share else None, LinearOrder.parse(order)))
    if not types:
        raise ConfigError("approximate needs at least one --orders entry like x>y>z:0.5")
    if any(s is None for s, _ in types):
        types = [(1 / len(types), o) for _, o in types]
    res = rum_approximate(types, float(run.o["alpha"]), float(run.o["lam"]))
    return res.to_dict()


def _microfoundation(run: _Run) -> dict:
    from .extensions import verify_foc
    o, ex = run.o, run.cfg.exact
    if not (o["weights"] and o["menu"] and o["m"] is not None and o["best"]):
        raise ConfigError("microfoundation verify needs --weights, --menu, --m and --best")
    weights = {}
    for part in str(o["weights"]).split(","):
        k, _, v = part.partition("=")
        weights[k.strip()] = parse_number(v.strip(), ex)
    menu = as_menu(str(o["menu"]).split(","))
    res = verify_foc(LuceWeights(weights), menu, parse_number(str(o["m"]), ex), o["best"])
    run.rejected = not res.passed
    return res.to_dict()


def _list_design(run: _Run) -> dict:
    from .listdesign import ListProblem, optimize_exhaustive, optimize_lp
    doc = _read_json(run.path(run.o["problem"]))
    ex = run.cfg.exact
    try:
        doc = dict(doc)
        doc["payoffs"] = {k: _num(v, ex) for k, v in doc["payoffs"].items()}
        doc["utilities"] = {k: _num(v, ex) for k, v in doc["utilities"].items()}
        doc["boost"] = [_num(v, ex) for v in doc["boost"]]
        doc["customers"] = [{"share": _num(c["share"], ex), "alpha": _num(c["alpha"], ex),
                             "salience": [_num(v, ex) for v in c["salience"]]} for c in doc["customers"]]
    except (KeyError, TypeError) as e:
        raise ParseError(f"list problem is missing a field: {e}") from None
    problem = ListProblem.from_dict(doc)
    method = run.o["method"]
    if method not in ("exhaustive", "lp"):
        raise ConfigError(f"method must be exhaustive or lp, got {method!r}")
    sol = optimize_lp(problem) if method == "lp" else optimize_exhaustive(problem)
    out = sol.to_dict()
    out["platform_utility"] = json_number(sol.platform_utility, ex)
    out["demand"] = {k: json_number(v, ex) for k, v in sol.demand.items()}
    return out


def _simulate(run: _Run) -> dict:
    from .io import save_csv, to_json_document
    params = _dst_params(_read_json(run.path(run.o["params"])), run.cfg.exact)
    sizes = run.o["menu_sizes"]
    if sizes:
        keep = {int(s) for s in str(sizes).split(",")}
        menus = [S for S in subsets(params.universe) if len(S) in keep]
    else:
        menus = subsets(params.universe, 2)
    if run.o["n"] is None:
        data = dst_rcf(params, menus)
        counts = None
    else:
        res = sample_choices(params, menus, n=int(run.o["n"]), seed=run.cfg.seed)
        data, counts = res.data, res.counts
    out = {"data": to_json_document(data, run.cfg.exact)}
    if counts is not None:
        out["counts"] = {"+".join(sorted(S)): dict(r) for S, r in counts.items()}
    if run.o["out"]:
        save_csv(data, run.o["out"], use_counts=counts is not None)
        out["written"] = str(run.o["out"])
    return out


HANDLERS = {
    "identify": _identify, "axioms": _axioms, "fit": _fit, "swaps": _swaps,
    "rationality-index": _rationality_index, "dstpa": _dstpa, "ddst": _ddst, "hdst": _hdst,
    "microfoundation": _microfoundation, "list-design": _list_design, "simulate": _simulate,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns (exit code, report)."""
    state = _Run(cfg)
    report = {
        "schema": SCHEMA,
        "tool": {"name": "dstchoice", "version": __version__},
        "command": cfg.command,
        "config": to_jsonable(cfg.to_dict()),
    }
    code = 0
    try:
        result = HANDLERS[cfg.command](state)
        report["result"] = to_jsonable(result, cfg.exact)
        if state.rejected:
            code = 2
    except ModelRejection as e:
        code = 2
        report["error"] = to_jsonable(e.to_dict())
    except InputError as e:
        code = 1
        report["error"] = to_jsonable(e.to_dict())
    report["status"] = {0: "ok", 1: "input_error", 2: "rejected"}[code]
    report["inputs"] = {k: {"sha256": v} for k, v in sorted(state.inputs.items())}
    report["warnings"] = state.warnings
    report["tolerances"] = cfg.tolerances
    return code, report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def render_text(report: dict) -> str:
    """Indented plain-text view of a JSON report."""
    lines: list[str] = []

    def walk(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {_scalar(v)}")
        elif isinstance(obj, list):
            if all(not isinstance(v, (dict, list)) for v in obj):
                lines.append(pad + ", ".join(_scalar(v) for v in obj))
            else:
                for i, v in enumerate(obj):
                    lines.append(f"{pad}- [{i}]")
                    walk(v, indent + 1)
        else:
            lines.append(pad + _scalar(obj))

    if report.get("command") == "fit" and "result" in report:
        lines.extend(_fit_table(report["result"]))
        lines.append("")
    walk(report, 0)
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if v == [] or v == {}:
        return "none"
    return str(v)


def _fit_table(result: dict) -> list[str]:
    orders = [f["params"]["order"] for f in result["fits"] if "order" in f["params"]]
    universe = sorted({x for row in result["observed"].values() for x in row})
    rank = {x: i for i, x in enumerate(orders[0] if orders else universe)}
    menus = sorted(result["observed"], key=lambda m: sorted(rank[x] for x in m.split("+")))
    top = {m: min(m.split("+"), key=rank.get) for m in menus}
    labels = [f"p({top[m]}|{m.replace('+', '')})" for m in menus]
    rows = [f"{'model':<14}" + "".join(f"{h:>10}" for h in labels) + f"{'adj R2':>9}{'pseudo R2':>11}{'k':>4}",
            f"{'data':<14}" + "".join(f"{result['observed'][m][top[m]]:>10.3f}" for m in menus)]
    for f in result["fits"]:
        name = f["model"] + (" " + ">".join(f["params"]["order"]) if "order" in f["params"] else "")
        cells = "".join(f"{f['predicted'][m][top[m]]:>10.3f}" for m in menus)
        rows.append(f"{name:<14}{cells}{f['adjusted_r2']:>9.3f}{f['mcfadden_r2']:>11.3f}{f['n_free_params']:>4}")
    return rows


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["json", "text"], help="report format (default json)")
    common.add_argument("--exact", action="store_true", help="rational arithmetic (also DST_EXACT=1)")
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file with command options; flags override it")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--eps-sign", type=float, dest="eps_sign")
    common.add_argument("--tol-alpha", type=float, dest="tol_alpha")
    common.add_argument("--tol", type=float)

    def data_opts(p):
        p.add_argument("--data", help="choice data (CSV or JSON)")
        p.add_argument("--menus-file", dest="menus_file", help="menu membership CSV for the data file")
        p.add_argument("--input-format", dest="input_format", choices=["csv", "json"])

    parser = _Parser(prog="dst", description="Dual-system discrete choice toolkit.")
    parser.add_argument("--version", action="version", version=f"dst {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("identify", parents=[common], help="recover (alpha, order, weights) exactly",
                       argument_default=argparse.SUPPRESS)
    data_opts(p)
    p.add_argument("--predict", action="append", help="menu to predict, e.g. x,y,z (repeatable)")
    p.add_argument("--strict-richness", dest="strict_richness", action="store_true")

    p = sub.add_parser("axioms", parents=[common], help="run the characterising checks",
                       argument_default=argparse.SUPPRESS)
    data_opts(p)
    p.add_argument("--order")

    p = sub.add_parser("fit", parents=[common], help="maximum-likelihood fits", argument_default=argparse.SUPPRESS)
    data_opts(p)
    p.add_argument("--model", choices=["dst", "dst-search", "luce", "logit", "all"])
    p.add_argument("--order")
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("swaps", parents=[common], help="swaps index", argument_default=argparse.SUPPRESS)
    data_opts(p)
    p.add_argument("--sigma", help="'uniform' or a JSON file of menu weights")

    p = sub.add_parser("rationality-index", parents=[common], help="lambda rationality index",
                       argument_default=argparse.SUPPRESS)
    data_opts(p)

    for name, helptext in (("dstpa", "random product availability"), ("ddst", "menu-dependent alpha")):
        p = sub.add_parser(name, parents=[common], help=helptext, argument_default=argparse.SUPPRESS)
        p.add_argument("action", choices=ACTIONS[name])
        data_opts(p)
        if name == "ddst":
            p.add_argument("--best", help="known best alternative")

    p = sub.add_parser("hdst", parents=[common], help="heterogeneous populations",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("action", choices=ACTIONS["hdst"])
    data_opts(p)
    p.add_argument("--params", help="JSON with types: [{share, params: {alpha, order, weights}}]")
    p.add_argument("--orders", action="append", help="order with share, e.g. x>y>z:0.5 (repeatable)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lam", type=float)

    p = sub.add_parser("microfoundation", parents=[common], help="check the cost-minimisation identity",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("action", choices=ACTIONS["microfoundation"])
    p.add_argument("--weights", help="e.g. x=1,y=2,z=3")
    p.add_argument("--menu", help="e.g. x,y,z")
    p.add_argument("--m", help="required improvement of the best item's share")
    p.add_argument("--best")

    p = sub.add_parser("list-design", parents=[common], help="optimal product list",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--problem", help="list problem JSON")
    p.add_argument("--method", choices=["exhaustive", "lp"])

    p = sub.add_parser("simulate", parents=[common], help="forward-simulate choice data",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--params", help="JSON with alpha, order, weights")
    p.add_argument("--menu-sizes", dest="menu_sizes", help="e.g. 2,3 (default: every menu of size 2+)")
    p.add_argument("--n", type=int, help="draws per menu; omit for exact probabilities")
    p.add_argument("--out", help="also write the data as CSV here")
    return parser


def config_from_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    if not ns.get("command"):
        raise ConfigError("a command is required (see dst --help)")
    merged: dict = {}
    if "config" in ns:
        doc = _read_json(ns.pop("config"))
        if not isinstance(doc, dict):
            raise ConfigError("configuration file must hold a JSON object")
        merged.update(doc)
        if merged.get("command", ns["command"]) != ns["command"]:
            raise ConfigError("configuration file is for a different command")
    tol = dict(merged.get("tolerances") or {})
    for k in DEFAULT_TOLERANCES:
        if k in ns:
            tol[k] = ns.pop(k)
    merged.update(ns)
    merged["tolerances"] = tol
    if exact_mode_requested():
        merged["exact"] = True
    return RunConfig.from_mapping(merged)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
    except DSTError as e:
        print(f"dst: error: {e}", file=sys.stderr)
        return 1
    code, report = run(cfg)
    text = render_text(report) if cfg.format == "text" else dumps_report(report)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if "error" in report:
        print(f"dst: {report['error'].get('error', 'error')}: {report['error'].get('message', '')}", file=sys.stderr)
    return code


__all__ = ["RunConfig", "run", "main", "build_parser", "config_from_args", "render_text", "dumps_report",
           "to_jsonable", "SCHEMA"]
