"""scikit-learn style wrappers around the fitting and identification routines.

``fit`` accepts aggregated choice data or individual records (menus as ``X``,
chosen items as ``y``). ``predict_proba`` returns one row per menu with
columns in ``classes_`` order; items outside a menu get probability zero.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import DstParams, LuceWeights, dst_prob
from .estimate import fit_dst, fit_dst_all_orders, fit_logit, fit_luce
from .identify import EPS_SIGN, TOL_ALPHA, identify
from .validation import check_choice_data, check_menus, check_order


class _ChoiceModel(BaseEstimator):
    def _menu_probs(self, S: frozenset) -> dict:
        raise NotImplementedError

    def predict_proba(self, menus) -> np.ndarray:
        check_is_fitted(self, "classes_")
        menus = check_menus(menus, self.classes_)
        col = {x: i for i, x in enumerate(self.classes_)}
        out = np.zeros((len(menus), len(self.classes_)))
        for r, S in enumerate(menus):
            for x, p in self._menu_probs(S).items():
                out[r, col[x]] = float(p)
        return out

    def predict(self, menus) -> np.ndarray:
        proba = self.predict_proba(menus)
        return np.asarray(self.classes_)[np.argmax(proba, axis=1)]

    def score(self, X, y=None) -> float:
        """Mean log-likelihood per observation (records) or per menu-weighted cell (aggregates)."""
        check_is_fitted(self, "classes_")
        if y is not None:
            menus = check_menus(X, self.classes_)
            ll = [math.log(max(self._menu_probs(S).get(c, 0.0), 1e-300)) for S, c in zip(menus, y)]
            return float(np.mean(ll))
        data = check_choice_data(X)
        menus = [S for S in data.menus if len(S) >= 2]
        total = 0.0
        for S in menus:
            probs = self._menu_probs(S)
            total += sum(float(v) * math.log(max(float(probs[x]), 1e-300))
                         for x, v in data.row(S).items() if v > 0)
        return total / len(menus)


class _WeightedModel(_ChoiceModel):
    def _menu_probs(self, S):
        if hasattr(self, "params_"):
            return {x: dst_prob(self.params_, S, x) for x in S}
        w = self.weights_
        tot = sum(w[x] for x in S)
        return {x: w[x] / tot for x in S}


class DSTChoiceModel(_WeightedModel):
    """Maximum-likelihood dual-system model; the order is searched when not given."""

    def __init__(self, order=None, n_restarts: int = 16, random_state=0, max_universe: int = 8):
        self.order = order
        self.n_restarts = n_restarts
        self.random_state = random_state
        self.max_universe = max_universe

    def fit(self, X, y=None):
        data = check_choice_data(X, y)
        order = check_order(self.order, data.universe)
        if order is None:
            rep = fit_dst_all_orders(data, n_restarts=self.n_restarts, seed=self.random_state,
                                     max_universe=self.max_universe)
        else:
            rep = fit_dst(data, order, n_restarts=self.n_restarts, seed=self.random_state)
        self.report_ = rep
        self.params_: DstParams = rep.dst_params()
        self.alpha_ = float(self.params_.alpha)
        self.order_ = self.params_.order
        self.weights_ = self.params_.weights
        self.classes_ = list(data.universe)
        self.log_likelihood_ = rep.log_likelihood
        self.converged_ = rep.converged
        return self


class LuceChoiceModel(_WeightedModel):
    """Luce (multinomial logit with alternative constants) fitted by iterative scaling."""

    def __init__(self, tol: float = 1e-13, max_iter: int = 100000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        data = check_choice_data(X, y)
        rep = fit_luce(data, tol=self.tol, max_iter=self.max_iter)
        self.report_ = rep
        self.weights_ = LuceWeights(rep.params["weights"])
        self.classes_ = list(data.universe)
        self.log_likelihood_ = rep.log_likelihood
        return self


class LogitChoiceModel(_WeightedModel):
    """Conditional logit with alternative-specific constants, fitted by BFGS."""

    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit(self, X, y=None):
        data = check_choice_data(X, y)
        rep = fit_logit(data, seed=self.random_state)
        self.report_ = rep
        u = rep.params["utilities"]
        top = max(u.values())
        self.weights_ = LuceWeights({a: math.exp(v - top) for a, v in u.items()})
        self.classes_ = list(data.universe)
        self.log_likelihood_ = rep.log_likelihood
        return self


class DSTIdentifier(_WeightedModel):
    """Closed-form recovery of the dual-system parameters from exact choice probabilities."""

    def __init__(self, eps_sign: float = EPS_SIGN, tol_alpha: float = TOL_ALPHA):
        self.eps_sign = eps_sign
        self.tol_alpha = tol_alpha

    def fit(self, X, y=None):
        data = check_choice_data(X, y)
        ident = identify(data, eps_sign=self.eps_sign, tol_alpha=self.tol_alpha)
        self.identification_ = ident
        self.params_ = ident.params
        self.alpha_ = float(ident.params.alpha)
        self.order_ = ident.params.order
        self.weights_ = ident.params.weights
        self.classes_ = list(data.universe)
        return self


__all__ = ["DSTChoiceModel", "LuceChoiceModel", "LogitChoiceModel", "DSTIdentifier"]
