"""Closed-form adversarial linear factor model.

The model solves

    min_{W, A} max_D  ||X - W A Z||_F^2 - mu ||Y - D A Z||_F^2,   Z = [X; Y]

through the leading eigenvectors of the non-symmetric augmented matrix

    B = [[ Z Z^T,  -mu* Z Y^T     ],
         [ Y Z^T,  -mu* Y P_Z Y^T ]],    mu* = mu + 1,

whose eigenvectors split as ``e = [v; d]`` into joint loadings ``v`` (length
d_x + d_y, i.e. ``[w; d]``) and adversary loadings ``d`` (length d_y).
At ``mu = 0`` the fit is ordinary PCA of the primary block.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .data import Dataset, center
from .errors import ComplexSpectrum, DegenerateEncoder, DimensionMismatch, SingularGram

__all__ = [
    "FitConfig",
    "AugmentedSystem",
    "ApcaModel",
    "build_augmented_system",
    "fit",
    "model_from_system",
    "encode",
    "reconstruct_primary",
    "predict_concomitant",
    "objective_value",
]


@dataclass(frozen=True)
class FitConfig:
    """Numerical knobs of the analytic fit.

    ridge : None lets the fit add ``1e-10 * trace(ZZ^T) / (d_x + d_y)`` only when
        ``Z Z^T`` is numerically singular; 0 demands an exact inverse; a positive
        value is always added.
    imag_tol : retained eigenvalues must satisfy ``|Im| <= imag_tol * (1 + |Re|)``.
    ordering : ``"real"`` (largest real part first) or ``"magnitude"``.
    pinv_rtol : relative cutoff for the encoder pseudo-inverse.
    positive_tol : eigenpairs with ``Re(lambda) <= positive_tol * max|lambda|`` give
        an all-zero encoder row (the factor is switched off).
    center : mean-center both blocks before fitting.
    """

    ridge: Optional[float] = None
    imag_tol: float = 1e-8
    ordering: str = "real"
    pinv_rtol: float = 1e-10
    positive_tol: float = 1e-9
    center: bool = True

    def __post_init__(self):
        if self.ordering not in ("real", "magnitude"):
            raise ValueError(f"ordering must be 'real' or 'magnitude', got {self.ordering!r}")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError("ridge must be non-negative")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=a.dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AugmentedSystem:
    """The augmented matrix ``B``, the projector ``P_Z`` and the sorted spectrum of ``B``.

    ``eigenvalues`` are complex and sorted by the configured ordering;
    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    b_matrix: np.ndarray
    projector: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    split_index: int
    d_primary: int
    mu: float
    ridge: float

    @property
    def mu_star(self) -> float:
        return self.mu + 1.0

    @property
    def eigenpairs(self):
        return [(self.eigenvalues[i], self.eigenvectors[:, i])
                for i in range(self.eigenvalues.shape[0])]


@dataclass(frozen=True)
class ApcaModel:
    """A fitted adversarial factor model (immutable).

    encoder : A, shape (l, d_x + d_y); factors are ``S = A (Z - mean)``.
    primary_loadings : W, shape (d_x, l).
    adversary_loadings : D, shape (d_y, l).
    """

    encoder: np.ndarray
    primary_loadings: np.ndarray
    adversary_loadings: np.ndarray
    mu: float
    n_factors: int
    center_primary: np.ndarray
    center_concomitant: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        for name in ("encoder", "primary_loadings", "adversary_loadings",
                     "center_primary", "center_concomitant", "eigenvalues"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=float)))
        l, dz = self.encoder.shape
        dx, dy = self.center_primary.shape[0], self.center_concomitant.shape[0]
        if l != self.n_factors or dz != dx + dy:
            raise DimensionMismatch("encoder shape disagrees with factor count or block sizes")
        if self.primary_loadings.shape != (dx, l) or self.adversary_loadings.shape != (dy, l):
            raise DimensionMismatch("loading shapes disagree with encoder")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")

    @property
    def mu_star(self) -> float:
        return self.mu + 1.0

    @property
    def joint_loadings(self) -> np.ndarray:
        """V = [W; D], shape (d_x + d_y, l)."""
        return np.vstack([self.primary_loadings, self.adversary_loadings])

    @property
    def d_primary(self) -> int:
        return self.primary_loadings.shape[0]

    @property
    def d_concomitant(self) -> int:
        return self.adversary_loadings.shape[0]


def _spectrum_order(values: np.ndarray, ordering: str) -> np.ndarray:
    # lexsort uses the last key as primary; ties fall to magnitude, then index
    idx = np.arange(values.shape[0])
    mag = np.abs(values)
    primary = -values.real if ordering == "real" else -mag
    return np.lexsort((idx, -mag, primary))


def build_augmented_system(dataset: Dataset, mu: float, ridge: Optional[float] = None,
                           ordering: str = "real") -> AugmentedSystem:
    """Assemble ``B`` and ``P_Z`` for a centered dataset and diagonalize ``B``.

    Raises
    ------
    SingularGram
        If ``Z Z^T`` is singular and ``ridge == 0``.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    Z = dataset.stacked
    Y = dataset.concomitant
    dz = Z.shape[0]
    mu_star = mu + 1.0

    gram = Z @ Z.T
    singular = np.linalg.matrix_rank(gram) < dz
    if ridge is None:
        used_ridge = 1e-10 * np.trace(gram) / dz if singular else 0.0
    else:
        used_ridge = float(ridge)
    if used_ridge == 0.0 and singular:
        raise SingularGram(f"Z Z^T has rank {np.linalg.matrix_rank(gram)} < {dz}; pass a ridge")
    if used_ridge > 0.0:
        gram_inv = np.linalg.inv(gram + used_ridge * np.eye(dz))
    else:
        gram_inv = np.linalg.inv(gram)
    projector = Z.T @ gram_inv @ Z

    ZY = Z @ Y.T
    B = np.block([
        [gram, -mu_star * ZY],
        [ZY.T, -mu_star * (Y @ projector @ Y.T)],
    ])
    values, vectors = np.linalg.eig(B)
    order = _spectrum_order(values, ordering)
    return AugmentedSystem(
        b_matrix=_readonly(B),
        projector=_readonly(projector),
        eigenvalues=_readonly(values[order]),
        eigenvectors=_readonly(vectors[:, order]),
        split_index=dz,
        d_primary=dataset.d_primary,
        mu=float(mu),
        ridge=float(used_ridge),
    )


def _real_vector(e: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(e):
        pivot = np.argmax(np.abs(e))
        e = e * np.exp(-1j * np.angle(e[pivot]))
        return e.real.copy()
    return np.array(e, dtype=float)


def model_from_system(system: AugmentedSystem, n_factors: int,
                      center_primary: np.ndarray, center_concomitant: np.ndarray,
                      config: Optional[FitConfig] = None) -> ApcaModel:
    """Turn the ``n_factors`` leading eigenpairs of ``B`` into an :class:`ApcaModel`.

    Each eigenvector is scaled so its joint-loading part ``v`` has unit norm and
    its largest-magnitude entry is positive. The encoder then solves the encoder
    stationarity condition ``(V^T V - mu* D^T D) A = V^T - mu* [0 | D^T]`` over
    the active factors (positive eigenvalue); inactive factors get a zero row.
    """
    config = config or FitConfig()
    dz = system.split_index
    dx = system.d_primary
    l = int(n_factors)
    if not 1 <= l <= dz:
        raise ValueError(f"n_factors must lie in [1, {dz}], got {l}")

    values = system.eigenvalues[:l]
    scale = np.max(np.abs(system.eigenvalues)) if system.eigenvalues.size else 0.0
    active = values.real > config.positive_tol * scale
    bad = active & (np.abs(values.imag) > config.imag_tol * (1.0 + np.abs(values.real)))
    if bad.any():
        raise ComplexSpectrum(
            f"retained eigenvalue(s) {values[bad]} exceed the imaginary-part tolerance")

    V = np.zeros((dz, l))
    for i in range(l):
        e = _real_vector(system.eigenvectors[:, i])
        v = e[:dz]
        norm = np.linalg.norm(v)
        if norm > 0:
            v = v / norm
        pivot = np.argmax(np.abs(v))
        if v[pivot] < 0:
            v = -v
        V[:, i] = v
    W = V[:dx]
    D = V[dx:]

    mu_star = system.mu_star
    A = np.zeros((l, dz))
    act = np.flatnonzero(active)
    if act.size:
        Va, Da = V[:, act], D[:, act]
        G = Va.T @ Va - mu_star * (Da.T @ Da)
        rhs = Va.T.copy()
        rhs[:, dx:] -= mu_star * Da.T
        A_act = np.linalg.pinv(G, rcond=config.pinv_rtol) @ rhs
        resid = np.linalg.norm(G @ A_act - rhs)
        if not np.isfinite(A_act).all() or resid > 1e-6 * max(np.linalg.norm(rhs), 1.0):
            raise DegenerateEncoder(
                f"encoder system inconsistent (residual {resid:.3e}) at mu={system.mu}")
        A[act] = A_act

    return ApcaModel(
        encoder=A,
        primary_loadings=W,
        adversary_loadings=D,
        mu=system.mu,
        n_factors=l,
        center_primary=center_primary,
        center_concomitant=center_concomitant,
        eigenvalues=values.real,
    )


def fit(dataset: Dataset, n_factors: int, mu: float,
        config: Optional[FitConfig] = None) -> ApcaModel:
    """Fit the adversarial factor model in closed form.

    Parameters
    ----------
    dataset : Dataset
        Training data; blocks are centered internally unless ``config.center`` is False.
    n_factors : int
        Number of factors ``l``, ``1 <= l <= min(d_x + d_y, N)``.
    mu : float
        Adversarial strength, ``mu >= 0``.
    config : FitConfig, optional

    Returns
    -------
    ApcaModel
    """
    config = config or FitConfig()
    dz = dataset.d_primary + dataset.d_concomitant
    if not 1 <= n_factors <= min(dz, dataset.n_samples):
        raise ValueError(
            f"n_factors must lie in [1, {min(dz, dataset.n_samples)}], got {n_factors}")
    if config.center:
        centered, mx, my = center(dataset)
    else:
        centered = dataset
        mx, my = np.zeros(dataset.d_primary), np.zeros(dataset.d_concomitant)
    system = build_augmented_system(centered, mu, ridge=config.ridge, ordering=config.ordering)
    return model_from_system(system, n_factors, mx, my, config)


def _joint(model: ApcaModel, dataset: Dataset) -> np.ndarray:
    if dataset.d_primary != model.d_primary or dataset.d_concomitant != model.d_concomitant:
        raise DimensionMismatch(
            f"dataset blocks ({dataset.d_primary}, {dataset.d_concomitant}) do not match "
            f"model ({model.d_primary}, {model.d_concomitant})")
    means = np.concatenate([model.center_primary, model.center_concomitant])
    return dataset.stacked - means[:, None]


def encode(model: ApcaModel, dataset: Dataset) -> np.ndarray:
    """Factor matrix ``S = A (Z - mean)``, shape (l, N)."""
    return model.encoder @ _joint(model, dataset)


def _check_factors(model: ApcaModel, factors) -> np.ndarray:
    S = np.asarray(factors, dtype=float)
    if S.ndim != 2 or S.shape[0] != model.n_factors:
        raise DimensionMismatch(f"factors must have {model.n_factors} rows, got shape {S.shape}")
    return S


def reconstruct_primary(model: ApcaModel, factors) -> np.ndarray:
    """``W S`` plus the primary mean, shape (d_x, N)."""
    S = _check_factors(model, factors)
    return model.primary_loadings @ S + model.center_primary[:, None]


def predict_concomitant(model: ApcaModel, factors) -> np.ndarray:
    """The adversary's prediction ``D S`` plus the concomitant mean, shape (d_y, N)."""
    S = _check_factors(model, factors)
    return model.adversary_loadings @ S + model.center_concomitant[:, None]


def objective_value(model: ApcaModel, dataset: Dataset) -> Tuple[float, float, float]:
    """Evaluate ``||X - W A Z||^2 - mu ||Y - D A Z||^2``.

    Returns ``(total, primary_term, adversary_term)`` with
    ``total = primary_term - mu * adversary_term``.
    """
    S = encode(model, dataset)
    primary_term = float(np.sum((dataset.primary - reconstruct_primary(model, S)) ** 2))
    adversary_term = float(np.sum((dataset.concomitant - predict_concomitant(model, S)) ** 2))
    return primary_term - model.mu * adversary_term, primary_term, adversary_term
