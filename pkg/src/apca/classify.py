"""L1-penalized linear classifiers and the rank-based AUC.

Features here follow the usual ML layout: samples are rows (``N x p``).
The logistic objective, with ``C`` weighting the data term as in the common
liblinear/scikit-learn convention and an unpenalized intercept, is

    ||w||_1 + C * sum_i log(1 + exp(-t_i (x_i^T w + b))),   t_i in {-1, +1}

and the least-squares variant replaces the log-loss by ``0.5 (y_i - x_i^T w - b)^2``
on 0/1 labels. Features are standardized with training statistics first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numba
import numpy as np
from scipy.stats import rankdata

from .errors import DimensionMismatch, SingleClass

LOSSES = ("logistic", "squared")


@dataclass(frozen=True)
class ClassifierModel:
    weights: np.ndarray        # on standardized features
    intercept: float
    penalty_c: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    loss: str = "logistic"
    n_iter: int = 0

    def decision_function(self, features) -> np.ndarray:
        """Linear predictor; monotone in the predicted probability."""
        F = np.asarray(features, dtype=float)
        if F.ndim != 2 or F.shape[1] != self.weights.shape[0]:
            raise DimensionMismatch(
                f"expected {self.weights.shape[0]} feature columns, got shape {F.shape}")
        return ((F - self.feature_mean) / self.feature_scale) @ self.weights + self.intercept


def binarize(labels) -> np.ndarray:
    """Map a two-valued label vector to 0/1, the larger value being the positive class."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise SingleClass("labels contain a single class")
    if classes.size > 2:
        raise ValueError(f"labels must be binary, found {classes.size} distinct values")
    return (labels == classes[1]).astype(float)


def auc(scores, labels) -> float:
    """Area under the ROC curve as the normalized Mann-Whitney U statistic.

    Ties between a positive and a negative score count one half.
    """
    scores = np.asarray(scores, dtype=float)
    y = binarize(labels)
    if scores.shape != y.shape:
        raise DimensionMismatch("scores and labels must have the same length")
    n_pos = y.sum()
    n_neg = y.size - n_pos
    ranks = rankdata(scores)  # mid-ranks for ties
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@numba.njit(cache=True)
def _cd_quadratic(H, g, theta, max_sweeps, tol):
    """Coordinate descent for g.d + 0.5 d'Hd + sum_{j>=1} |theta_j + d_j|.

    Coordinate 0 (the intercept) is unpenalized. Returns the step d.
    """
    n = theta.shape[0]
    d = np.zeros(n)
    Hd = np.zeros(n)
    for _ in range(max_sweeps):
        max_change = 0.0
        max_coef = 0.0
        for j in range(n):
            a = H[j, j]
            if a <= 0.0:
                continue
            grad = g[j] + Hd[j]
            cur = theta[j] + d[j]
            if j == 0:
                new = cur - grad / a
            else:
                z = cur - grad / a
                thr = 1.0 / a
                if z > thr:
                    new = z - thr
                elif z < -thr:
                    new = z + thr
                else:
                    new = 0.0
            delta = new - cur
            if delta != 0.0:
                d[j] += delta
                for i in range(n):
                    Hd[i] += H[i, j] * delta
                if abs(delta) > max_change:
                    max_change = abs(delta)
            if abs(new) > max_coef:
                max_coef = abs(new)
        if max_change <= tol * (1.0 + max_coef):
            break
    return d


def _smooth_parts(Xa, y01, theta, c, loss):
    eta = Xa @ theta
    if loss == "logistic":
        t = 2.0 * y01 - 1.0
        f = c * np.sum(np.logaddexp(0.0, -t * eta))
        p = 0.5 * (1.0 + np.tanh(0.5 * eta))
        return f, eta, p - y01, p * (1.0 - p)
    r = eta - y01
    return 0.5 * c * np.sum(r * r), eta, r, np.ones_like(r)


def _objective(Xa, y01, theta, c, loss):
    return _smooth_parts(Xa, y01, theta, c, loss)[0] + np.sum(np.abs(theta[1:]))


def _solve(Xa, y01, c, loss, theta, tol, max_iter):
    f_smooth, _, resid, h = _smooth_parts(Xa, y01, theta, c, loss)
    obj = f_smooth + np.sum(np.abs(theta[1:]))
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        g = c * (Xa.T @ resid)
        H = c * ((Xa * np.maximum(h, 1e-12)[:, None]).T @ Xa)
        d = _cd_quadratic(H, g, theta, 1000, 1e-12)
        if not np.any(d):
            break
        # backtracking on the true objective along the Newton direction
        decrease = g @ d + np.sum(np.abs(theta[1:] + d[1:])) - np.sum(np.abs(theta[1:]))
        step = 1.0
        while True:
            cand = theta + step * d
            new_obj = _objective(Xa, y01, cand, c, loss)
            if new_obj <= obj + 1e-4 * step * decrease or step < 1e-10:
                break
            step *= 0.5
        if new_obj > obj:
            break
        theta = cand
        rel = (obj - new_obj) / max(abs(new_obj), 1e-300)
        obj = new_obj
        f_smooth, _, resid, h = _smooth_parts(Xa, y01, theta, c, loss)
        if rel <= tol and step * np.max(np.abs(d)) <= np.sqrt(tol) * (1.0 + np.max(np.abs(theta))):
            break
    return theta, n_iter


def _standardize(features):
    F = np.asarray(features, dtype=float)
    if F.ndim != 2:
        raise DimensionMismatch("features must be 2-D (samples x features)")
    mean = F.mean(axis=0)
    scale = F.std(axis=0)
    scale[scale <= 1e-12 * (1.0 + np.abs(mean))] = 1.0
    return (F - mean) / scale, mean, scale


def l1_path(features, labels, cs: Sequence[float], loss: str = "logistic",
            tol: float = 1e-7, max_iter: int = 200) -> List[ClassifierModel]:
    """Fit one classifier per penalty in ``cs``, warm-starting along increasing ``C``.

    Models are returned in the order of ``cs``.
    """
    if loss not in LOSSES:
        raise ValueError(f"loss must be one of {LOSSES}, got {loss!r}")
    y01 = binarize(labels)
    Fs, mean, scale = _standardize(features)
    if Fs.shape[0] != y01.shape[0]:
        raise DimensionMismatch("features and labels disagree on sample count")
    cs = [float(c) for c in cs]
    if any(c <= 0 for c in cs):
        raise ValueError("penalty C must be positive")
    Xa = np.hstack([np.ones((Fs.shape[0], 1)), Fs])
    ybar = y01.mean()
    b0 = np.log(ybar / (1.0 - ybar)) if loss == "logistic" else ybar
    # below this C the all-zero weight vector is optimal
    kkt = np.max(np.abs(Fs.T @ (y01 - ybar))) if Fs.shape[1] else 0.0

    models = [None] * len(cs)
    theta = np.zeros(Xa.shape[1])
    theta[0] = b0
    for i in np.argsort(cs, kind="stable"):
        c = cs[i]
        if c * kkt <= 1.0:
            sol = np.zeros_like(theta)
            sol[0] = b0
            n_iter = 0
        else:
            sol, n_iter = _solve(Xa, y01, c, loss, theta.copy(), tol, max_iter)
            theta = sol
        models[i] = ClassifierModel(weights=sol[1:].copy(), intercept=float(sol[0]),
                                    penalty_c=c, feature_mean=mean, feature_scale=scale,
                                    loss=loss, n_iter=n_iter)
    return models


def train_l1_classifier(features, labels, c: float, loss: str = "logistic",
                        tol: float = 1e-7, max_iter: int = 200) -> ClassifierModel:
    """Fit a single L1-penalized linear classifier (see module docstring)."""
    return l1_path(features, labels, [c], loss=loss, tol=tol, max_iter=max_iter)[0]


def penalized_objective(model: ClassifierModel, features, labels) -> float:
    """Value of the training objective at ``model`` (for checks against other solvers)."""
    y01 = binarize(labels)
    Fs = (np.asarray(features, dtype=float) - model.feature_mean) / model.feature_scale
    Xa = np.hstack([np.ones((Fs.shape[0], 1)), Fs])
    theta = np.concatenate([[model.intercept], model.weights])
    return float(_objective(Xa, y01, theta, model.penalty_c, model.loss))
