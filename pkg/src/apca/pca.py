"""Mean-centered PCA baseline by SVD (features x samples convention)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray          # (d,)
    loadings: np.ndarray      # (d, k), orthonormal columns
    singular_values: np.ndarray  # all singular values of the centered block

    @property
    def n_components(self) -> int:
        return self.loadings.shape[1]

    def transform(self, block) -> np.ndarray:
        block = np.asarray(block, dtype=float)
        if block.ndim != 2 or block.shape[0] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} feature rows, got shape {block.shape}")
        return self.loadings.T @ (block - self.mean[:, None])

    def inverse_transform(self, scores) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        if scores.ndim != 2 or scores.shape[0] != self.n_components:
            raise DimensionMismatch(f"expected {self.n_components} score rows, got {scores.shape}")
        return self.loadings @ scores + self.mean[:, None]

    def reconstruct(self, block) -> np.ndarray:
        return self.inverse_transform(self.transform(block))


def pca_fit(block, k: int) -> PcaModel:
    """Rank-``k`` PCA of a ``d x N`` block.

    Loadings are the leading left singular vectors of the centered block, signed
    so the largest-magnitude entry of each column is positive.
    """
    block = np.asarray(block, dtype=float)
    if block.ndim != 2:
        raise DimensionMismatch("block must be 2-D (features x samples)")
    d, n = block.shape
    if not 1 <= k <= min(d, n):
        raise DimensionMismatch(f"k must lie in [1, {min(d, n)}], got {k}")
    mean = block.mean(axis=1)
    U, s, _ = np.linalg.svd(block - mean[:, None], full_matrices=False)
    L = U[:, :k].copy()
    pivots = np.argmax(np.abs(L), axis=0)
    signs = np.sign(L[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    return PcaModel(mean=mean, loadings=L * signs, singular_values=s)
