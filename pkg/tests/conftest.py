import numpy as np
import pytest

from apca import Dataset


def random_dataset(seed, dx=5, dy=2, n=50, labels=False):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dx, n))
    Y = rng.standard_normal((dy, n))
    lab = None
    if labels:
        lab = np.zeros(n, dtype=int)
        lab[: n // 2] = 1
        lab = rng.permutation(lab)
    return Dataset(X, Y, labels=lab)


def correlated_dataset(seed, dx=5, dy=2, n=50):
    """Random blocks sharing a latent, so the adversary has something to predict."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((1, n))
    X = rng.standard_normal((dx, n)) + rng.standard_normal((dx, 1)) @ h
    Y = rng.standard_normal((dy, n)) + rng.standard_normal((dy, 1)) @ h
    return Dataset(X, Y)


def zscore(B):
    return (B - B.mean(axis=1, keepdims=True)) / B.std(axis=1, keepdims=True)


def pca_reconstruction(X, k):
    """Rank-k reconstruction of X (features x samples) around its row means."""
    m = X.mean(axis=1, keepdims=True)
    U, s, Vt = np.linalg.svd(X - m, full_matrices=False)
    return U[:, :k] @ np.diag(s[:k]) @ Vt[:k] + m


def optimal_objective(X, Y, mu, l):
    """Closed-form optimum of the minimax objective on centered data.

    With Z = Q S P^T (thin SVD), the min over W, A and max over D reduce to
    ||X||^2 - mu ||Y||^2 minus the sum of the l largest positive eigenvalues of
    P^T (X^T X - mu Y^T Y) P. Independent of the augmented-matrix route.
    """
    Xc = X - X.mean(axis=1, keepdims=True)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    Z = np.vstack([Xc, Yc])
    _, s, Pt = np.linalg.svd(Z, full_matrices=False)
    P = Pt[s > 1e-10 * s[0]].T
    M = P.T @ (Xc.T @ Xc - mu * Yc.T @ Yc) @ P
    ev = np.sort(np.linalg.eigvalsh(M))[::-1][:l]
    return np.sum(Xc ** 2) - mu * np.sum(Yc ** 2) - np.sum(ev[ev > 0])


@pytest.fixture
def ds_5x2():
    return random_dataset(0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
