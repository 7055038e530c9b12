"""Maximum-likelihood fitting of the dual-system model and two baselines.

The DST likelihood is maximised over an unconstrained parameterisation:
``alpha = logistic(a)`` and ``w = softmax(t_1, ..., t_{n-1}, 0)``. Nelder-Mead
runs from Latin-hypercube starting points; the best restart wins.

Goodness of fit follows one fixed convention (see :func:`goodness_of_fit`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit, logsumexp
from scipy.stats import qmc

from .core import ChoiceData, DstParams, LinearOrder, LuceWeights, MenuWeights
from .exceptions import (
    DegenerateVariance,
    DomainError,
    EmptyMenuCollection,
    MissingMenu,
    NonConvergence,
    UniverseTooLarge,
)

LOG_FLOOR = math.log(1e-300)


@dataclass
class ObservedFrequencies:
    """Observed choice frequencies with menu shares (sigma) and optional counts."""

    freq: ChoiceData
    sigma: MenuWeights
    n_obs: dict | None = None

    @classmethod
    def from_data(cls, data, sigma: MenuWeights | None = None) -> "ObservedFrequencies":
        if isinstance(data, ObservedFrequencies):
            return data
        data = data.to_float()
        menus = [S for S in data.menus if len(S) >= 2]
        if not menus:
            raise EmptyMenuCollection("no menu with at least two alternatives")
        n_obs = None
        if data.counts:
            n_obs = {S: sum(data.counts[S].values()) for S in menus if S in data.counts}
        if sigma is None:
            if n_obs and len(n_obs) == len(menus):
                total = sum(n_obs.values())
                sigma = MenuWeights({S: n / total for S, n in n_obs.items()})
            else:
                sigma = MenuWeights.uniform(menus)
        return cls(data, sigma, n_obs)

    @property
    def universe(self) -> tuple:
        return self.freq.universe


class _Cells:
    """Flattened (menu, alternative) cells for vectorised likelihoods."""

    def __init__(self, obs: ObservedFrequencies):
        self.alts = list(obs.universe)
        idx = {a: i for i, a in enumerate(self.alts)}
        self.menus = [S for S in obs.freq.menus if len(S) >= 2]
        self.M = np.zeros((len(self.menus), len(self.alts)))
        menu_of, alt_of, coef, freq = [], [], [], []
        for m, S in enumerate(self.menus):
            for x in sorted(S):
                self.M[m, idx[x]] = 1.0
                menu_of.append(m)
                alt_of.append(idx[x])
                f = float(obs.freq.get(x, S))
                freq.append(f)
                coef.append(float(obs.sigma[S]) * f if S in obs.sigma else 0.0)
        self.menu_of = np.array(menu_of)
        self.alt_of = np.array(alt_of)
        self.coef = np.array(coef)
        self.freq = np.array(freq)
        self.size = np.array([len(self.menus[m]) for m in self.menu_of], dtype=float)

    def best_mask(self, order: LinearOrder) -> np.ndarray:
        best = [order.best(S) for S in self.menus]
        return np.array([self.alts[a] == best[m] for m, a in zip(self.menu_of, self.alt_of)], dtype=float)

    def loglik(self, prob: np.ndarray) -> float:
        logs = np.where(prob > 0, np.log(np.maximum(prob, 1e-300)), LOG_FLOOR)
        return float(np.sum(np.where(self.coef > 0, self.coef * logs, 0.0)))

    def null_loglik(self) -> float:
        return float(np.sum(self.coef * -np.log(self.size)))

    def to_choice_data(self, prob: np.ndarray, universe) -> ChoiceData:
        rows: dict = {}
        for (m, a), p in zip(zip(self.menu_of, self.alt_of), prob):
            rows.setdefault(self.menus[m], {})[self.alts[a]] = float(p)
        for S, r in rows.items():
            s = sum(r.values())
            rows[S] = {k: v / s for k, v in r.items()}
        return ChoiceData(universe, rows)


def _softmax_free(t: np.ndarray) -> np.ndarray:
    z = np.append(t, 0.0)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _menu_luce(cells: _Cells, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Luce probabilities from log-weights, stable under extreme weight ratios.

    Returns the per-cell probabilities and the menu-by-alternative matrix.
    """
    Zm = np.where(cells.M > 0, z[None, :], -np.inf)
    top = Zm.max(axis=1, keepdims=True)
    E = np.exp(Zm - top)
    P = E / E.sum(axis=1, keepdims=True)
    return P[cells.menu_of, cells.alt_of], P


def _dst_probs(cells: _Cells, best: np.ndarray, alpha: float, z: np.ndarray) -> np.ndarray:
    luce, _ = _menu_luce(cells, z)
    return (1 - alpha) * luce + alpha * best


def dst_log_likelihood(alpha, order, weights, data) -> float:
    """Sum over menus and alternatives of sigma * frequency * log model probability."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    obs = ObservedFrequencies.from_data(data)
    cells = _Cells(obs)
    order = LinearOrder.coerce(order)
    w = LuceWeights(weights)
    z = np.log(np.array([float(w[a]) for a in cells.alts]))
    return cells.loglik(_dst_probs(cells, cells.best_mask(order), float(alpha), z))


class DstObjective:
    """Negative log-likelihood in the unconstrained space, with analytic gradient.

    Coordinates are ``(a, t_1, ..., t_{n-1})`` with ``alpha = logistic(a)`` and
    log-weights ``(t, 0)`` over the alternatives in sorted order.
    """

    def __init__(self, data, order):
        self.obs = ObservedFrequencies.from_data(data)
        self.cells = _Cells(self.obs)
        self.order = LinearOrder.coerce(order)
        if set(self.order.ranking) != set(self.cells.alts):
            raise DomainError("order must rank exactly the alternatives in the data")
        self.best = self.cells.best_mask(self.order)
        self.dim = len(self.cells.alts)

    def unpack(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        return float(expit(theta[0])), _softmax_free(np.asarray(theta[1:], dtype=float))

    def pack(self, alpha: float, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return np.concatenate([[math.log(alpha / (1 - alpha))], np.log(w[:-1] / w[-1])])

    @staticmethod
    def _split(theta):
        theta = np.asarray(theta, dtype=float)
        return float(expit(theta[0])), np.append(theta[1:], 0.0)

    def loglik(self, theta) -> float:
        alpha, z = self._split(theta)
        return self.cells.loglik(_dst_probs(self.cells, self.best, alpha, z))

    def __call__(self, theta) -> float:
        return -self.loglik(theta)

    def grad_loglik(self, theta) -> np.ndarray:
        c = self.cells
        alpha, z = self._split(theta)
        luce, P = _menu_luce(c, z)
        prob = (1 - alpha) * luce + alpha * self.best
        g = np.where(c.coef > 0, c.coef / np.maximum(prob, 1e-300), 0.0)
        d_alpha = np.sum(g * (self.best - luce)) * alpha * (1 - alpha)
        gl = g * luce
        gz = np.bincount(c.alt_of, weights=gl, minlength=len(z))
        gz -= np.bincount(c.menu_of, weights=gl, minlength=len(c.menus)) @ P
        gz *= 1 - alpha
        return np.concatenate([[d_alpha], gz[:-1]])

    def hessian(self, theta, h: float = 1e-5) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        n = len(theta)
        H = np.zeros((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            H[:, i] = (self.grad_loglik(theta + e) - self.grad_loglik(theta - e)) / (2 * h)
        return -(H + H.T) / 2


@dataclass
class GoodnessOfFit:
    r2: float
    adjusted_r2: float
    mcfadden_r2: float
    n_cells: int
    log_likelihood: float
    null_log_likelihood: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def goodness_of_fit(observed, predicted: ChoiceData, n_free_params: int,
                    sigma: MenuWeights | None = None) -> GoodnessOfFit:
    """Fit statistics of a predicted choice function against observed frequencies.

    R-squared uses every (menu, alternative) cell of the menus with two or more
    items, centred at the mean observed cell; the adjusted version is
    ``1 - (1 - R2)(n - 1)/(n - k)`` with ``n`` cells and ``k`` free parameters.
    McFadden's pseudo R-squared compares against uniform choice in each menu.
    """
    obs = ObservedFrequencies.from_data(observed, sigma)
    cells = _Cells(obs)
    pred = []
    for m, a in zip(cells.menu_of, cells.alt_of):
        S = cells.menus[m]
        if not predicted.has(S):
            raise MissingMenu(f"prediction lacks menu {sorted(S)}")
        pred.append(float(predicted.get(cells.alts[a], S)))
    pred = np.array(pred)
    y = cells.freq
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst <= 0:
        raise DegenerateVariance("observed frequencies have no variance")
    sse = float(np.sum((y - pred) ** 2))
    r2 = 1 - sse / sst
    n, k = len(y), int(n_free_params)
    adj = 1 - (1 - r2) * (n - 1) / (n - k) if n > k else float("nan")
    ll = cells.loglik(pred)
    ll0 = cells.null_loglik()
    if ll0 == 0:
        raise DegenerateVariance("null log-likelihood is zero")
    return GoodnessOfFit(r2, adj, 1 - ll / ll0, n, ll, ll0)


@dataclass
class FitReport:
    model: str
    params: dict
    log_likelihood: float
    n_free_params: int
    predicted: ChoiceData
    adjusted_r2: float
    mcfadden_r2: float
    r2: float
    converged: bool
    n_restarts_used: int
    diagnostics: dict = field(default_factory=dict)
    per_order: list | None = None

    def dst_params(self) -> DstParams:
        if self.model != "dst":
            raise DomainError(f"{self.model} fit has no dual-system parameters")
        return DstParams(self.params["alpha"], self.params["order"], self.params["weights"])

    def to_dict(self) -> dict:
        from .io import menu_id_for
        d = {
            "model": self.model,
            "params": self.params,
            "log_likelihood": self.log_likelihood,
            "n_free_params": self.n_free_params,
            "adjusted_r2": self.adjusted_r2,
            "mcfadden_r2": self.mcfadden_r2,
            "r2": self.r2,
            "converged": self.converged,
            "n_restarts_used": self.n_restarts_used,
            "predicted": {menu_id_for(S): {x: float(v) for x, v in self.predicted.row(S).items()}
                          for S in self.predicted.menus},
            "diagnostics": self.diagnostics,
        }
        if self.per_order is not None:
            d["per_order"] = self.per_order
        return d


def _report(model, params, cells: _Cells, obs: ObservedFrequencies, prob, k, converged, restarts, diag):
    predicted = cells.to_choice_data(prob, obs.universe)
    gof = goodness_of_fit(obs, predicted, k)
    return FitReport(model, params, cells.loglik(prob), k, predicted, gof.adjusted_r2, gof.mcfadden_r2,
                     gof.r2, converged, restarts, diag)


def _starts(dim: int, n: int, seed, low: float = -4.0, high: float = 4.0) -> np.ndarray:
    sampler = qmc.LatinHypercube(d=dim, seed=np.random.default_rng(seed))
    return qmc.scale(sampler.random(n), [low] * dim, [high] * dim)


def fit_dst(data, order, n_restarts: int = 16, seed=0, xatol: float = 1e-9, fatol: float = 1e-12,
            max_iter: int | None = None) -> FitReport:
    """Maximum-likelihood cognitive weight and Luce weights for a fixed order."""
    obj = DstObjective(data, order)
    dim = obj.dim
    max_iter = max_iter or 4000 * dim
    runs = []
    for x0 in _starts(dim, max(1, n_restarts), seed):
        res = optimize.minimize(obj, x0, method="Nelder-Mead",
                                options={"xatol": xatol, "fatol": fatol, "maxiter": max_iter,
                                         "maxfev": max_iter, "adaptive": dim > 3})
        if not np.isfinite(res.fun):
            continue
        fvals = res.final_simplex[1]
        flat = float(np.max(np.abs(fvals - fvals[0]))) <= 1e-10
        runs.append((float(res.fun), tuple(np.round(res.x, 12)), res, bool(res.success) or flat))
    if not runs:
        raise NonConvergence("no restart produced a finite likelihood")
    runs.sort(key=lambda r: (r[0], r[1]))
    best_val, _, best, ok = runs[0]
    agree = sum(1 for r in runs if r[0] - best_val <= 1e-7 * max(1.0, abs(best_val)))
    converged = ok or agree >= 2
    if not converged:
        raise NonConvergence("all restarts stopped before meeting the tolerance",
                             best_negative_loglik=best_val)
    theta = best.x
    alpha, w = obj.unpack(theta)
    prob = _dst_probs(obj.cells, obj.best, alpha, np.append(theta[1:], 0.0))
    diag = _flatness(obj, theta)
    diag.update({"restarts_agreeing": agree, "boundary_alpha": bool(alpha < 1e-3 or alpha > 1 - 1e-3)})
    params = {"alpha": alpha, "order": list(obj.order.ranking),
              "weights": {a: float(v) for a, v in zip(obj.cells.alts, w)}}
    return _report("dst", params, obj.cells, obj.obs, prob, dim, converged, len(runs), diag)


def _flatness(obj: DstObjective, theta) -> dict:
    H = obj.hessian(theta)
    if not np.all(np.isfinite(H)):
        return {"hessian_eigenvalues": None, "flat_directions": None, "alpha_identified": None}
    vals, vecs = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(vals))))
    flat = np.abs(vals) < 1e-6 * scale
    alpha_flat = bool(np.any(flat & (np.abs(vecs[0]) > 0.1)))
    n_indep = sum(len(S) - 1 for S in obj.cells.menus)
    return {
        "hessian_eigenvalues": [float(v) for v in vals],
        "flat_directions": int(flat.sum()),
        "alpha_identified": not alpha_flat and n_indep >= obj.dim,
        "independent_cells": n_indep,
    }


def fit_dst_all_orders(data, n_restarts: int = 16, seed=0, max_universe: int = 8,
                       tie_tol: float = 1e-9) -> FitReport:
    """Fit every linear order and keep the one with the highest likelihood."""
    obs = ObservedFrequencies.from_data(data)
    if len(obs.universe) > max_universe:
        raise UniverseTooLarge(f"{len(obs.universe)} alternatives exceed the limit of {max_universe}")
    fits = []
    for order in LinearOrder.all_orders(obs.universe):
        try:
            fits.append(fit_dst(obs, order, n_restarts=n_restarts, seed=seed))
        except NonConvergence:
            continue
    if not fits:
        raise NonConvergence("no order could be fitted")
    top = max(f.log_likelihood for f in fits)
    tied = sorted((f for f in fits if top - f.log_likelihood <= tie_tol * max(1.0, abs(top))),
                  key=lambda f: tuple(f.params["order"]))
    best = tied[0]
    best.per_order = sorted(({"order": f.params["order"], "log_likelihood": f.log_likelihood,
                              "alpha": f.params["alpha"]} for f in fits),
                            key=lambda r: (-r["log_likelihood"], r["order"]))
    best.diagnostics["tied_orders"] = [f.params["order"] for f in tied]
    return best


def fit_luce(data, tol: float = 1e-13, max_iter: int = 100000) -> FitReport:
    """Luce weights by iterative proportional scaling of the likelihood equations."""
    obs = ObservedFrequencies.from_data(data)
    c = _Cells(obs)
    n = len(c.alts)
    num = np.zeros(n)
    np.add.at(num, c.alt_of, c.coef)
    sig = np.zeros(len(c.menus))
    np.add.at(sig, c.menu_of, c.coef)
    w = np.full(n, 1.0 / n)
    converged = False
    for it in range(max_iter):
        W = c.M @ w
        den = c.M.T @ (sig / W)
        new = np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)
        new = np.maximum(new, 1e-300)
        new /= new.sum()
        if np.max(np.abs(new - w) / np.maximum(new, 1e-300)) < tol:
            w = new
            converged = True
            break
        w = new
    W = c.M @ w
    prob = w[c.alt_of] / W[c.menu_of]
    params = {"weights": {a: float(v) for a, v in zip(c.alts, w)}}
    return _report("luce", params, c, obs, prob, n - 1, converged, 1, {"iterations": it + 1})


def fit_logit(data, covariates: dict | None = None, seed=0) -> FitReport:
    """Multinomial logit with linear utilities.

    Without covariates each alternative gets its own constant, with the last
    alternative's constant fixed at zero.
    """
    obs = ObservedFrequencies.from_data(data)
    c = _Cells(obs)
    if covariates is None:
        Z = np.eye(len(c.alts))[:, :-1]
        names = [f"asc_{a}" for a in c.alts[:-1]]
    else:
        keys = sorted(next(iter(covariates.values())))
        Z = np.array([[float(covariates[a][k]) for k in keys] for a in c.alts])
        names = keys
    Zc = Z[c.alt_of]

    def probs(beta):
        u = Zc @ beta
        out = np.empty_like(u)
        for m in range(len(c.menus)):
            sel = c.menu_of == m
            out[sel] = np.exp(u[sel] - logsumexp(u[sel]))
        return out

    def negll(beta):
        return -c.loglik(probs(beta))

    def grad(beta):
        p = probs(beta)
        mean_z = np.zeros((len(c.menus), Z.shape[1]))
        np.add.at(mean_z, c.menu_of, p[:, None] * Zc)
        sig = np.zeros(len(c.menus))
        np.add.at(sig, c.menu_of, c.coef)
        return -(c.coef @ Zc - sig @ mean_z)

    res = optimize.minimize(negll, np.zeros(Z.shape[1]), jac=grad, method="BFGS",
                            options={"gtol": 1e-10, "maxiter": 10000})
    beta = res.x
    params = {"coefficients": {k: float(v) for k, v in zip(names, beta)},
              "utilities": {a: float(u) for a, u in zip(c.alts, Z @ beta)}}
    ok = bool(res.success) or float(np.max(np.abs(grad(beta)))) < 1e-7
    return _report("logit", params, c, obs, probs(beta), Z.shape[1], ok, 1, {"gradient_norm": float(np.linalg.norm(grad(beta)))})


fit_logit_binary = fit_logit


def format_fit_table(reports: list[FitReport], data=None, order=None) -> str:
    """Plain-text table: probability of the better item in each binary menu, then fit statistics."""
    first = reports[0].predicted
    order = LinearOrder.coerce(order) if order is not None else LinearOrder(tuple(first.universe))
    menus = sorted((S for S in first.menus if len(S) == 2), key=lambda S: sorted(map(order.rank, S)))
    lead = {S: order.best(S) for S in menus}
    head = ["model"] + [f"p({lead[S]}|{''.join(order.sort(S))})" for S in menus] + ["adjR2", "pseudoR2", "k"]
    lines = []
    rows = []
    if data is not None:
        obs = data.to_float() if isinstance(data, ChoiceData) else data.freq
        rows.append(["data"] + [f"{obs.get(lead[S], S):.2f}" for S in menus] + ["", "", ""])
    for r in reports:
        rows.append([r.model] + [f"{r.predicted.get(lead[S], S):.2f}" for S in menus]
                    + [f"{r.adjusted_r2:.2f}", f"{r.mcfadden_r2:.2f}", str(r.n_free_params)])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *rows)]
    for row in [head] + rows:
        lines.append("  ".join(str(v).rjust(wd) for v, wd in zip(row, widths)))
    return "\n".join(lines)


__all__ = [
    "ObservedFrequencies", "DstObjective", "dst_log_likelihood", "GoodnessOfFit", "goodness_of_fit",
    "FitReport", "fit_dst", "fit_dst_all_orders", "fit_luce", "fit_logit", "fit_logit_binary",
    "format_fit_table",
]
