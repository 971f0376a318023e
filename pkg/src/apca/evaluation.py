"""Cross-validated evaluation of raw, PCA and adversarial-PCA feature sets.

Every preprocessing statistic (block standardization, PCA/aPCA fit, classifier
standardization) is estimated on the training fold only. Grid cells are
reduced in grid order, so results do not depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import LeaveOneOut, StratifiedKFold

from .classify import auc, binarize, l1_path
from .core import FitConfig, build_augmented_system, encode, fit, model_from_system, predict_concomitant, reconstruct_primary
from .data import Dataset
from .errors import InfeasibleStratification, SingleClass
from .pca import pca_fit

DEFAULT_C_GRID = tuple(10.0 ** e for e in range(-2, 7))
DEFAULT_MU_GRID = tuple(round(0.1 * i, 1) for i in range(201))
PREPROCESSING = ("none", "pca", "apca")
CV_SCHEMES = ("stratified-k-fold", "leave-one-out")


@dataclass(frozen=True)
class EvalConfig:
    """Grids and validation settings.

    ``k_grid=None`` means ``1 .. p`` with ``p`` the dimension of the decomposed block.
    ``recon_factors`` fixes the factor count used for the reconstruction-error and
    factor-correlation curves of a sweep (None: the largest k in the grid).
    """

    c_grid: Tuple[float, ...] = DEFAULT_C_GRID
    k_grid: Optional[Tuple[int, ...]] = None
    mu_grid: Tuple[float, ...] = DEFAULT_MU_GRID
    cv_folds: int = 5
    cv_scheme: str = "stratified-k-fold"
    seed: int = 0
    loss: str = "logistic"
    standardize_blocks: bool = True
    recon_factors: Optional[int] = None
    swap_blocks: bool = False
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        for name in ("c_grid", "mu_grid"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, values)
        if any(c <= 0 for c in self.c_grid):
            raise ValueError("C values must be positive")
        if any(m < 0 for m in self.mu_grid):
            raise ValueError("mu values must be non-negative")
        if self.k_grid is not None:
            ks = tuple(int(k) for k in self.k_grid)
            if not ks or min(ks) < 1:
                raise ValueError("k_grid must be non-empty positive integers")
            object.__setattr__(self, "k_grid", ks)
        if self.cv_scheme not in CV_SCHEMES:
            raise ValueError(f"cv_scheme must be one of {CV_SCHEMES}")
        if self.cv_scheme == "stratified-k-fold" and self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")

    def ks_for(self, p: int) -> Tuple[int, ...]:
        ks = self.k_grid if self.k_grid is not None else tuple(range(1, p + 1))
        return tuple(k for k in ks if k <= p) or (p,)


def make_folds(labels, config: EvalConfig) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Deterministic (train, test) index pairs for the configured scheme."""
    y = binarize(labels)
    if config.cv_scheme == "leave-one-out":
        return list(LeaveOneOut().split(y))
    counts = np.bincount(y.astype(int), minlength=2)
    if counts.min() < config.cv_folds:
        raise InfeasibleStratification(
            f"smallest class has {counts.min()} samples, fewer than {config.cv_folds} folds")
    skf = StratifiedKFold(n_splits=config.cv_folds, shuffle=True, random_state=config.seed)
    return list(skf.split(np.zeros_like(y), y))


# --------------------------------------------------------------------------
# fold-level feature construction


def _block_stats(block: np.ndarray, standardize: bool):
    mean = block.mean(axis=1)
    if not standardize:
        return mean, np.ones_like(mean)
    scale = block.std(axis=1)
    scale[scale <= 1e-12 * (1.0 + np.abs(mean))] = 1.0
    return mean, scale


def _scale_blocks(train: Dataset, others: Sequence[Dataset], standardize: bool):
    mx, sx = _block_stats(train.primary, standardize)
    my, sy = _block_stats(train.concomitant, standardize)

    def apply(ds):
        return ds.with_blocks((ds.primary - mx[:, None]) / sx[:, None],
                              (ds.concomitant - my[:, None]) / sy[:, None])
    return apply(train), [apply(ds) for ds in others]


def _orient(train: Dataset, test: Dataset, swap: bool):
    if not swap:
        return train, test
    return tuple(ds.with_blocks(ds.concomitant, ds.primary, ds.concomitant_names, ds.primary_names)
                 for ds in (train, test))


def _fold_features(train: Dataset, test: Dataset, preprocessing: str, ks, mus,
                   config: EvalConfig, append: bool) -> Iterator[Tuple[int, int, np.ndarray, np.ndarray]]:
    """Yield ``(mu_index, k_index, F_train, F_test)`` with samples as rows.

    ``none`` yields once with indices (0, 0); ``pca`` yields for mu index 0 only.
    """
    train, test = _orient(train, test, config.swap_blocks)
    train, (test,) = _scale_blocks(train, [test], config.standardize_blocks)

    def finish(f_tr, f_te):
        if append:
            f_tr = np.vstack([f_tr, train.concomitant])
            f_te = np.vstack([f_te, test.concomitant])
        return f_tr.T, f_te.T

    if preprocessing == "none":
        yield (0, 0, *finish(train.primary, test.primary))
    elif preprocessing == "pca":
        pca = pca_fit(train.primary, max(ks))
        s_tr, s_te = pca.transform(train.primary), pca.transform(test.primary)
        for j, k in enumerate(ks):
            yield (0, j, *finish(s_tr[:k], s_te[:k]))
    elif preprocessing == "apca":
        centered = train  # blocks already centered with training means
        zero_x, zero_y = np.zeros(train.d_primary), np.zeros(train.d_concomitant)
        for i, mu in enumerate(mus):
            system = build_augmented_system(centered, mu, ridge=config.fit_config.ridge,
                                            ordering=config.fit_config.ordering)
            for j, k in enumerate(ks):
                model = model_from_system(system, k, zero_x, zero_y, config.fit_config)
                yield (i, j, *finish(encode(model, train), encode(model, test)))
    else:
        raise ValueError(f"preprocessing must be one of {PREPROCESSING}, got {preprocessing!r}")


@dataclass
class FoldPipeline:
    """One preprocessing + classifier configuration fitted on a single training fold.

    The reference path for a single grid cell; the grid machinery computes the same
    scores in bulk.
    """

    preprocessing: str = "none"
    n_components: int = 1
    mu: float = 0.0
    c: float = 1.0
    append_concomitant: bool = False
    config: EvalConfig = field(default_factory=EvalConfig)

    def scores(self, train: Dataset, train_labels, test: Dataset) -> np.ndarray:
        (_, _, f_tr, f_te), = _fold_features(train, test, self.preprocessing, (self.n_components,),
                                             (self.mu,), self.config, self.append_concomitant)
        model, = l1_path(f_tr, train_labels, [self.c], loss=self.config.loss)
        return model.decision_function(f_te)


# --------------------------------------------------------------------------
# cross-validated AUC tables


def _grid_axes(dataset: Dataset, preprocessing: str, config: EvalConfig):
    p = dataset.d_concomitant if config.swap_blocks else dataset.d_primary
    if preprocessing == "none":
        return (0.0,), (p,)
    ks = config.ks_for(p)
    if preprocessing == "pca":
        return (0.0,), ks
    return config.mu_grid, ks


def _auc_or_nan(scores, labels) -> float:
    try:
        return auc(scores, labels)
    except SingleClass:
        return float("nan")


def cv_auc_tables(dataset: Dataset, label_sets: Sequence[np.ndarray], preprocessing: str,
                  config: EvalConfig, append_concomitant: bool = False,
                  mus: Optional[Sequence[float]] = None):
    """Cross-validated AUC for every (label set, mu, k, C) cell.

    Folds are stratified on the first label set. Returns ``(mus, ks, table)`` with
    ``table`` of shape (n_labels, n_mu, n_k, n_c, n_folds); leave-one-out pools
    the held-out scores into a single AUC (last axis of length 1).
    """
    grid_mus, ks = _grid_axes(dataset, preprocessing, config)
    if mus is not None and preprocessing == "apca":
        grid_mus = tuple(float(m) for m in mus)
    folds = make_folds(label_sets[0], config)
    cs = config.c_grid
    shape = (len(label_sets), len(grid_mus), len(ks), len(cs))
    loo = config.cv_scheme == "leave-one-out"
    if loo:
        pooled = np.zeros(shape + (dataset.n_samples,))
        table = np.full(shape + (1,), np.nan)
    else:
        table = np.full(shape + (len(folds),), np.nan)

    for f, (tr, te) in enumerate(folds):
        train, test = dataset.subset(tr), dataset.subset(te)
        for i, j, f_tr, f_te in _fold_features(train, test, preprocessing, ks, grid_mus,
                                               config, append_concomitant):
            for a, labels in enumerate(label_sets):
                models = l1_path(f_tr, labels[tr], cs, loss=config.loss)
                for c_idx, model in enumerate(models):
                    s = model.decision_function(f_te)
                    if loo:
                        pooled[a, i, j, c_idx, te] = s
                    else:
                        table[a, i, j, c_idx, f] = _auc_or_nan(s, labels[te])
    if loo:
        for idx in np.ndindex(shape):
            table[idx + (0,)] = _auc_or_nan(pooled[idx], label_sets[idx[0]])
    return grid_mus, ks, table


def cross_validated_auc(features, labels, config: Optional[EvalConfig] = None,
                        c: float = 1.0) -> Tuple[float, List[float]]:
    """Cross-validated AUC of an L1 classifier on a fixed ``N x p`` feature matrix.

    Standardization happens inside each training fold. Returns the mean AUC and
    the per-fold AUCs (one pooled value under leave-one-out).
    """
    config = config or EvalConfig()
    F = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    folds = make_folds(labels, config)
    if config.cv_scheme == "leave-one-out":
        scores = np.zeros(F.shape[0])
        for tr, te in folds:
            model, = l1_path(F[tr], labels[tr], [c], loss=config.loss)
            scores[te] = model.decision_function(F[te])
        value = auc(scores, labels)
        return value, [value]
    per_fold = []
    for tr, te in folds:
        model, = l1_path(F[tr], labels[tr], [c], loss=config.loss)
        per_fold.append(_auc_or_nan(model.decision_function(F[te]), labels[te]))
    return float(np.nanmean(per_fold)), per_fold


# --------------------------------------------------------------------------
# grid search


def _round(x: float) -> float:
    return round(float(x), 12)


def _best_cell(mean_table: np.ndarray, mus, ks, cs, restrict_k: Optional[int] = None):
    """Index (i, j, c) of the best mean AUC; ties go to smaller k, then C, then mu."""
    best, best_key = None, None
    for i, j, c in np.ndindex(mean_table.shape):
        if restrict_k is not None and j != restrict_k:
            continue
        value = mean_table[i, j, c]
        if np.isnan(value):
            continue
        key = (-_round(value), ks[j], cs[c], mus[i])
        if best_key is None or key < best_key:
            best, best_key = (i, j, c), key
    return best


@dataclass(frozen=True)
class GridSearchResult:
    preprocessing: str
    target: str
    best_mu: Optional[float]
    best_k: Optional[int]
    best_c: float
    best_auc: float
    n_features: int
    table: List[dict]


def _labels_for(dataset: Dataset, target: str) -> np.ndarray:
    labels = {"target": dataset.labels, "confound": dataset.confound_labels}.get(target)
    if target not in ("target", "confound"):
        raise ValueError("target must be 'target' or 'confound'")
    if labels is None:
        raise ValueError(f"dataset carries no {target} labels")
    return labels


def grid_search(dataset: Dataset, target: str = "target", preprocessing: str = "none",
                config: Optional[EvalConfig] = None,
                append_concomitant: bool = False) -> GridSearchResult:
    """Exhaustive search over (mu, k, C) by mean cross-validated AUC.

    ``none`` searches C only, ``pca`` searches (k, C), ``apca`` searches (mu, k, C).
    """
    config = config or EvalConfig()
    if preprocessing not in PREPROCESSING:
        raise ValueError(f"preprocessing must be one of {PREPROCESSING}, got {preprocessing!r}")
    labels = _labels_for(dataset, target)
    mus, ks, table = cv_auc_tables(dataset, [labels], preprocessing, config, append_concomitant)
    means = np.nanmean(table[0], axis=-1)
    i, j, c = _best_cell(means, mus, ks, config.c_grid)
    rows = []
    for ii, jj, cc in np.ndindex(means.shape):
        rows.append({
            "mu": mus[ii] if preprocessing == "apca" else None,
            "k": ks[jj] if preprocessing != "none" else None,
            "c": config.c_grid[cc],
            "mean_auc": float(means[ii, jj, cc]),
            "fold_aucs": [float(v) for v in table[0, ii, jj, cc]],
        })
    extra = (dataset.d_primary if config.swap_blocks else dataset.d_concomitant) if append_concomitant else 0
    return GridSearchResult(
        preprocessing=preprocessing,
        target=target,
        best_mu=mus[i] if preprocessing == "apca" else None,
        best_k=ks[j] if preprocessing != "none" else None,
        best_c=config.c_grid[c],
        best_auc=float(means[i, j, c]),
        n_features=ks[j] + extra,
        table=rows,
    )


# --------------------------------------------------------------------------
# sweeps over adversarial strength


@dataclass(frozen=True)
class SweepRecord:
    mu: float
    best_k: int
    best_c: float
    auc_target: float
    auc_confound: Optional[float]
    primary_recon_error: float
    concomitant_recon_error: float
    factor_confound_correlations: Tuple[Tuple[float, ...], ...]

    @property
    def max_abs_correlation(self) -> float:
        values = [abs(v) for row in self.factor_confound_correlations for v in row]
        return max(values) if values else 0.0


@dataclass(frozen=True)
class SweepResult:
    experiment: str
    records: Tuple[SweepRecord, ...]
    metadata: Dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.records], dtype=float)


def _correlations(S: np.ndarray, Y: np.ndarray) -> Tuple[Tuple[float, ...], ...]:
    Sc = S - S.mean(axis=1, keepdims=True)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    ns = np.linalg.norm(Sc, axis=1)
    ny = np.linalg.norm(Yc, axis=1)
    out = []
    for i in range(S.shape[0]):
        row = []
        for j in range(Y.shape[0]):
            denom = ns[i] * ny[j]
            row.append(float(Sc[i] @ Yc[j] / denom) if denom > 1e-12 * max(1.0, ny[j]) else 0.0)
        out.append(tuple(row))
    return tuple(out)


def _curve_point(dataset: Dataset, mu: float, n_factors: int, config: EvalConfig):
    """In-sample relative reconstruction errors and factor-concomitant correlations."""
    oriented, _ = _orient(dataset, dataset, config.swap_blocks)
    scaled, _ = _scale_blocks(oriented, [], config.standardize_blocks)
    model = fit(scaled, n_factors, mu, config.fit_config)
    S = encode(model, scaled)
    xc = scaled.primary - scaled.primary.mean(axis=1, keepdims=True)
    yc = scaled.concomitant - scaled.concomitant.mean(axis=1, keepdims=True)
    ex = np.sum((scaled.primary - reconstruct_primary(model, S)) ** 2) / max(np.sum(xc ** 2), 1e-300)
    ey = np.sum((scaled.concomitant - predict_concomitant(model, S)) ** 2) / max(np.sum(yc ** 2), 1e-300)
    return float(ex), float(ey), _correlations(S, scaled.concomitant)


def _sweep(dataset: Dataset, label_sets, config: EvalConfig, append: bool, experiment: str):
    mus, ks, table = cv_auc_tables(dataset, label_sets, "apca", config, append)
    means = np.nanmean(table, axis=-1)  # (labels, mu, k, c)
    cs = config.c_grid
    recon_l = config.recon_factors or max(ks)
    records = []
    for i, mu in enumerate(mus):
        _, j, c = _best_cell(means[0, i:i + 1], (mu,), ks, cs)
        confound_auc = None
        if len(label_sets) > 1:
            confound_auc = float(np.nanmax(means[1, i, j]))
        ex, ey, corr = _curve_point(dataset, mu, recon_l, config)
        records.append(SweepRecord(
            mu=float(mu), best_k=int(ks[j]), best_c=float(cs[c]),
            auc_target=float(means[0, i, j, c]), auc_confound=confound_auc,
            primary_recon_error=ex, concomitant_recon_error=ey,
            factor_confound_correlations=corr))
    metadata = {
        "experiment": experiment,
        "mu_grid": list(mus),
        "k_grid": list(ks),
        "c_grid": list(cs),
        "cv_scheme": config.cv_scheme,
        "cv_folds": config.cv_folds,
        "seed": config.seed,
        "recon_factors": recon_l,
    }
    return SweepResult(experiment=experiment, records=tuple(records), metadata=metadata)


def confound_invariance_experiment(dataset: Dataset, config: Optional[EvalConfig] = None) -> SweepResult:
    """Sweep mu with the confound block as concomitant data.

    For each mu the (k, C) cell maximizing target AUC is selected; the confound
    AUC is then the best over C at that k (the strongest linear probe of the
    retained confound information).
    """
    config = config or EvalConfig()
    if dataset.labels is None or dataset.confound_labels is None:
        raise ValueError("confound experiment needs both target and confound labels")
    return _sweep(dataset, [dataset.labels, dataset.confound_labels], config, False, "confound")


@dataclass(frozen=True)
class ComparisonRow:
    preprocessing: str
    n_features: int
    auc: float
    k: Optional[int]
    c: float
    mu: Optional[float]


def disentanglement_experiment(dataset: Dataset, config: Optional[EvalConfig] = None):
    """Sweep mu with modality 2 as concomitant data; classifier sees factors plus raw modality 2.

    Returns ``(sweep, comparison)`` where ``comparison`` lists the naive
    concatenation, PCA and best-mu aPCA rows.
    """
    config = config or EvalConfig()
    if dataset.labels is None:
        raise ValueError("disentanglement experiment needs target labels")
    sweep = _sweep(dataset, [dataset.labels], config, True, "multimodal")
    d_second = dataset.d_primary if config.swap_blocks else dataset.d_concomitant

    naive = grid_search(dataset, "target", "none", config, append_concomitant=True)
    pca = grid_search(dataset, "target", "pca", config, append_concomitant=True)
    best = None
    for r in sweep.records:
        key = (-_round(r.auc_target), r.best_k, r.best_c, r.mu)
        if best is None or key < best[0]:
            best = (key, r)
    r = best[1]
    comparison = [
        ComparisonRow("none", naive.n_features, naive.best_auc, None, naive.best_c, None),
        ComparisonRow("pca", pca.n_features, pca.best_auc, pca.best_k, pca.best_c, None),
        ComparisonRow("apca", r.best_k + d_second, r.auc_target, r.best_k, r.best_c, r.mu),
    ]
    return sweep, comparison
