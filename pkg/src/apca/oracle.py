"""Iterative minimax solver used as an independent check on the analytic fit.

The objective ``||X - W A Z||^2 - mu ||Y - D A Z||^2`` is attacked directly:
the adversary ``D`` plays an exact least-squares best response, ``W`` is the
least-squares decoder of the current factors, and the encoder ``A`` follows
backtracking gradient descent on the resulting value function. No eigenvector
of the augmented matrix is ever formed here.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from .data import Dataset, center
from .errors import DimensionMismatch, NoConvergence


@dataclass(frozen=True)
class OracleConfig:
    step_size_min: float = 1e-10
    step_size_max: float = 1.0
    max_outer_iters: int = 20000
    inner_adversary_iters: int = 1
    convergence_tol: float = 1e-13
    seed: int = 0
    exact_adversary: bool = True
    init_noise: float = 1e-2

    def __post_init__(self):
        if not (0 < self.step_size_min <= self.step_size_max):
            raise ValueError("need 0 < step_size_min <= step_size_max")
        if self.max_outer_iters < 1 or self.inner_adversary_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")


class MinimaxSolution(NamedTuple):
    W: np.ndarray
    A: np.ndarray
    D: np.ndarray
    objective_trace: List[float]
    converged: bool


def _orthonormal_rows(C: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(C.T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def solve_minimax(dataset: Dataset, l: int, mu: float,
                  config: Optional[OracleConfig] = None) -> MinimaxSolution:
    """Solve the linear minimax problem iteratively.

    The encoder is parametrized in whitened coordinates (``A Z = C Q^T`` with
    ``Q`` the right singular vectors of ``Z``) and ``C`` is kept with orthonormal
    rows; the objective depends only on the row space of ``A Z`` so this
    retraction never changes its value. Initialization is the PCA solution of
    ``Z`` plus seeded noise.
    """
    config = config or OracleConfig()
    if mu < 0:
        raise ValueError("mu must be non-negative")
    centered, _, _ = center(dataset)
    X, Y, Z = centered.primary, centered.concomitant, centered.stacked
    U, s, Qt = np.linalg.svd(Z, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(Z.shape) * np.finfo(float).eps)) if s[0] > 0 else 0
    if not 1 <= l <= rank:
        raise DimensionMismatch(f"l must lie in [1, rank(Z)={rank}], got {l}")
    U, s, Q = U[:, :rank], s[:rank], Qt[:rank].T

    rng = np.random.default_rng(config.seed)
    C = np.eye(l, rank) + config.init_noise * rng.standard_normal((l, rank))
    C = _orthonormal_rows(C)
    lipschitz = (1.0 + mu) * s[0] ** 2
    D = np.zeros((Y.shape[0], l))

    def adversary(S, D):
        if config.exact_adversary:
            return Y @ S.T  # rows of S are orthonormal
        for _ in range(config.inner_adversary_iters):
            D = D + 0.5 * (Y - D @ S) @ S.T
        return D

    def value(C, D):
        S = C @ Q.T
        W = X @ S.T
        D = adversary(S, D)
        rx = X - W @ S
        ry = Y - D @ S
        f = np.sum(rx ** 2) - mu * np.sum(ry ** 2)
        return f, S, W, D, rx, ry

    f, S, W, D, rx, ry = value(C, D)
    trace = [float(f)]
    step = config.step_size_max
    converged = False
    for _ in range(config.max_outer_iters):
        grad_S = -2.0 * W.T @ rx + 2.0 * mu * D.T @ ry
        g = grad_S @ Q
        g = g - (g @ C.T) @ C  # tangent to the row space
        gnorm2 = float(np.sum(g ** 2))
        if gnorm2 == 0.0:
            converged = True
            break
        step = min(2.0 * step, config.step_size_max)
        while True:
            C_new = _orthonormal_rows(C - (step / lipschitz) * g)
            cand = value(C_new, D)
            if cand[0] <= f - 1e-4 * (step / lipschitz) * gnorm2:
                break
            step *= 0.5
            if step < config.step_size_min:
                cand = None
                break
        if cand is None:
            converged = True  # no descent left at floating-point resolution
            break
        f_old = f
        C = C_new
        f, S, W, D, rx, ry = cand
        trace.append(float(f))
        if abs(f_old - f) <= config.convergence_tol * (1.0 + abs(f)):
            converged = True
            break

    if not converged:
        warnings.warn(
            f"solve_minimax stopped after {config.max_outer_iters} iterations without meeting "
            f"tolerance {config.convergence_tol}", NoConvergence, stacklevel=2)
    A = C @ (U / s).T
    return MinimaxSolution(W=W, A=A, D=D, objective_trace=trace, converged=converged)


def refit_adversary(factors, concomitant):
    """Best linear prediction of ``Y`` from factors ``S``, with intercept.

    Returns ``(D_best, residual)`` where ``residual = ||Yc - D_best Sc||_F^2`` on
    the row-centered blocks.
    """
    S = np.asarray(factors, dtype=float)
    Y = np.asarray(concomitant, dtype=float)
    if S.ndim != 2 or Y.ndim != 2 or S.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"factors {S.shape} and concomitant {Y.shape} disagree")
    Sc = S - S.mean(axis=1, keepdims=True)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    D = Yc @ np.linalg.pinv(Sc)
    residual = float(np.sum((Yc - D @ Sc) ** 2))
    return D, residual
