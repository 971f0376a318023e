import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from apca import SingleClass, auc, cross_validated_auc, train_l1_classifier
from apca.classify import l1_path, penalized_objective
from apca.evaluation import EvalConfig


def brute_force_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p, n in itertools.product(pos, neg):
        total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def lbfgs_objective(F, y, c, loss):
    """Reference optimum via the split w = a - b, a, b >= 0 (smooth, bound-constrained)."""
    Fs = (F - F.mean(axis=0)) / F.std(axis=0)
    n, p = Fs.shape
    t = 2.0 * y - 1.0

    def f(z):
        b0, a, b = z[0], z[1:p + 1], z[p + 1:]
        eta = Fs @ (a - b) + b0
        if loss == "logistic":
            val = c * np.sum(np.logaddexp(0.0, -t * eta))
            r = -t * 0.5 * (1.0 - np.tanh(0.5 * t * eta))
        else:
            val = 0.5 * c * np.sum((eta - y) ** 2)
            r = eta - y
        g = c * (Fs.T @ r)
        val += np.sum(a) + np.sum(b)
        return val, np.concatenate([[c * np.sum(r)], g + 1.0, -g + 1.0])

    bounds = [(None, None)] + [(0.0, None)] * (2 * p)
    res = minimize(f, np.zeros(2 * p + 1), jac=True, method="L-BFGS-B", bounds=bounds,
                   options=dict(maxiter=20000, ftol=1e-15, gtol=1e-12, maxcor=30))
    return res.fun


def problem(seed, n=120, p=6):
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((n, p)) * rng.uniform(0.5, 3.0, p) + rng.standard_normal(p)
    w = rng.standard_normal(p) * (rng.random(p) < 0.5)
    y = (F @ w + rng.standard_normal(n) > 0).astype(int)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return F, y


# -- auc ---------------------------------------------------------------------------

def test_auc_examples():
    s = [0.9, 0.8, 0.2, 0.1]
    assert auc(s, [1, 1, 0, 0]) == 1.0
    assert auc(s, [0, 0, 1, 1]) == 0.0
    assert auc([0.3] * 4, [1, 0, 1, 0]) == 0.5


def test_auc_single_class():
    with pytest.raises(SingleClass):
        auc([0.1, 0.2], [1, 1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.booleans()), min_size=2, max_size=40))
def test_auc_matches_brute_force(pairs):
    scores = [float(s) for s, _ in pairs]
    labels = [int(b) for _, b in pairs]
    if len(set(labels)) < 2:
        return
    assert auc(scores, labels) == brute_force_auc(scores, labels)


def test_auc_labels_may_be_any_two_values():
    assert auc([0.1, 0.9], [-1, 1]) == 1.0
    assert auc([0.1, 0.9], ["a", "b"]) == 1.0


# -- classifier --------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("c", [0.05, 1.0, 100.0])
@pytest.mark.parametrize("loss", ["logistic", "squared"])
def test_objective_matches_lbfgs_reference(seed, c, loss):
    F, y = problem(seed)
    model = train_l1_classifier(F, y, c, loss=loss)
    ours = penalized_objective(model, F, y)
    ref = lbfgs_objective(F, y, c, loss)
    # never worse than the reference beyond the stated tolerance
    assert ours <= ref + 1e-7 * abs(ref)
    assert kkt_violation(model, F, y) <= 1e-4


def kkt_violation(model, F, y):
    """Largest violation of the subgradient optimality conditions."""
    Fs = (F - model.feature_mean) / model.feature_scale
    eta = Fs @ model.weights + model.intercept
    if model.loss == "logistic":
        r = 0.5 * (1.0 + np.tanh(0.5 * eta)) - y
    else:
        r = eta - y
    g = model.penalty_c * (Fs.T @ r)
    w = model.weights
    viol = np.where(w != 0, np.abs(g + np.sign(w)), np.maximum(np.abs(g) - 1.0, 0.0))
    return max(np.max(viol), abs(model.penalty_c * np.sum(r)))


def test_path_matches_individual_fits():
    F, y = problem(11)
    cs = [100.0, 0.1, 1.0, 10.0]
    path = l1_path(F, y, cs)
    for c, m in zip(cs, path):
        single = train_l1_classifier(F, y, c)
        assert m.penalty_c == c
        a, b = penalized_objective(m, F, y), penalized_objective(single, F, y)
        assert abs(a - b) <= 1e-7 * abs(b)


def test_small_c_shrinks_all_weights():
    rng = np.random.default_rng(3)
    F = rng.standard_normal((200, 10))
    y = (F[:, 0] + rng.standard_normal(200) > 0).astype(int)
    model = train_l1_classifier(F, y, 1e-2)
    assert np.all(model.weights == 0.0)
    assert auc(model.decision_function(F), y) == 0.5


def test_shrinkage_threshold_is_exact():
    # zero weights are optimal iff C * max_j |Fs_j . (y - ybar)| <= 1
    F, y = problem(4)
    Fs = (F - F.mean(axis=0)) / F.std(axis=0)
    c0 = 1.0 / np.max(np.abs(Fs.T @ (y - y.mean())))
    assert np.all(train_l1_classifier(F, y, 0.999 * c0).weights == 0.0)
    assert np.any(train_l1_classifier(F, y, 1.01 * c0).weights != 0.0)


def test_separable_one_dimensional():
    x = np.concatenate([np.linspace(-3, -1, 30), np.linspace(1, 3, 30)])
    y = (x > 0).astype(int)
    model = train_l1_classifier(x[::2, None], y[::2], 1e4)
    assert auc(model.decision_function(x[1::2, None]), y[1::2]) == 1.0


def test_chance_level_on_independent_labels():
    rng = np.random.default_rng(5)
    F = rng.standard_normal((200, 5))
    y = rng.permutation(np.repeat([0, 1], 100))
    mean_auc, per_fold = cross_validated_auc(F, y, EvalConfig(), c=1.0)
    assert len(per_fold) == 5
    assert abs(mean_auc - 0.5) <= 0.1


def test_single_class_rejected():
    with pytest.raises(SingleClass):
        train_l1_classifier(np.ones((4, 2)), [1, 1, 1, 1], 1.0)


def test_invalid_arguments():
    F, y = problem(0)
    with pytest.raises(ValueError):
        train_l1_classifier(F, y, 0.0)
    with pytest.raises(ValueError):
        train_l1_classifier(F, y, 1.0, loss="hinge")


def test_constant_feature_is_harmless():
    F, y = problem(6)
    F = np.hstack([F, np.full((F.shape[0], 1), 2.5)])
    model = train_l1_classifier(F, y, 10.0)
    assert model.weights[-1] == 0.0
    assert np.all(np.isfinite(model.decision_function(F)))
