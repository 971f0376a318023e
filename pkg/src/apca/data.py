"""Sample container shared by fitting and evaluation.

Matrices follow the factor-model convention: features are rows and samples
are columns, so the primary block ``X`` is ``d_x x N`` and the concomitant
block ``Y`` is ``d_y x N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch


def _check_labels(labels, n: int, name: str) -> Optional[np.ndarray]:
    if labels is None:
        return None
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != n:
        raise DimensionMismatch(f"{name} must be a vector of length {n}, got shape {labels.shape}")
    if np.unique(labels).size != 2:
        raise ValueError(f"{name} must take exactly two distinct values")
    return labels


@dataclass(frozen=True)
class Dataset:
    """Primary block, concomitant block and optional binary labels.

    Parameters
    ----------
    primary : ndarray, shape (d_x, N)
        Data the factors must reconstruct.
    concomitant : ndarray, shape (d_y, N)
        Data the factors must be unpredictive of.
    labels : ndarray, shape (N,), optional
        Binary target labels (e.g. diagnosis).
    confound_labels : ndarray, shape (N,), optional
        Binary confound labels (e.g. IQ group), used by the confound experiment.
    primary_names, concomitant_names : sequence of str, optional
        Feature names for each block.
    """

    primary: np.ndarray
    concomitant: np.ndarray
    labels: Optional[np.ndarray] = None
    confound_labels: Optional[np.ndarray] = None
    primary_names: Optional[Sequence[str]] = field(default=None, compare=False)
    concomitant_names: Optional[Sequence[str]] = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.primary, dtype=float)
        Y = np.array(self.concomitant, dtype=float)
        if X.ndim != 2 or Y.ndim != 2:
            raise DimensionMismatch("primary and concomitant must be 2-D (features x samples)")
        if X.shape[1] != Y.shape[1]:
            raise DimensionMismatch(
                f"primary has {X.shape[1]} samples but concomitant has {Y.shape[1]}")
        if X.shape[1] < 1 or X.shape[0] < 1 or Y.shape[0] < 1:
            raise DimensionMismatch("both blocks need at least one feature and one sample")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise ValueError("dataset entries must be finite")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "primary", X)
        object.__setattr__(self, "concomitant", Y)
        n = X.shape[1]
        for name in ("labels", "confound_labels"):
            lab = _check_labels(getattr(self, name), n, name)
            if lab is not None:
                lab = lab.copy()
                lab.setflags(write=False)
            object.__setattr__(self, name, lab)
        for name, d in (("primary_names", X.shape[0]), ("concomitant_names", Y.shape[0])):
            names = getattr(self, name)
            if names is not None:
                names = tuple(str(s) for s in names)
                if len(names) != d:
                    raise DimensionMismatch(f"{name} has {len(names)} entries, expected {d}")
                object.__setattr__(self, name, names)

    @property
    def n_samples(self) -> int:
        return self.primary.shape[1]

    @property
    def d_primary(self) -> int:
        return self.primary.shape[0]

    @property
    def d_concomitant(self) -> int:
        return self.concomitant.shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """The joint matrix ``Z = [X; Y]`` of shape (d_x + d_y, N)."""
        return np.vstack([self.primary, self.concomitant])

    def subset(self, index) -> "Dataset":
        """Column (sample) subset, labels included."""
        index = np.asarray(index)
        return replace(
            self,
            primary=self.primary[:, index],
            concomitant=self.concomitant[:, index],
            labels=None if self.labels is None else self.labels[index],
            confound_labels=None if self.confound_labels is None else self.confound_labels[index],
        )

    def with_blocks(self, primary, concomitant, primary_names=None,
                    concomitant_names=None) -> "Dataset":
        """Same samples and labels, new blocks.

        Feature names are kept when a block keeps its row count and no new names are given.
        """
        primary, concomitant = np.asarray(primary), np.asarray(concomitant)
        if primary_names is None and primary.shape[:1] == self.primary.shape[:1]:
            primary_names = self.primary_names
        if concomitant_names is None and concomitant.shape[:1] == self.concomitant.shape[:1]:
            concomitant_names = self.concomitant_names
        return replace(self, primary=primary, concomitant=concomitant,
                       primary_names=primary_names, concomitant_names=concomitant_names)


def center(dataset: Dataset):
    """Remove the per-feature mean from both blocks.

    Returns
    -------
    centered : Dataset
    center_primary : ndarray, shape (d_x,)
    center_concomitant : ndarray, shape (d_y,)
    """
    mx = dataset.primary.mean(axis=1)
    my = dataset.concomitant.mean(axis=1)
    centered = dataset.with_blocks(dataset.primary - mx[:, None],
                                   dataset.concomitant - my[:, None])
    return centered, mx, my
