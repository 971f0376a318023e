import numpy as np
import pytest

from apca import (EvalConfig, SynthSpec, cross_validated_auc, encode, fit, refit_adversary)
from apca.synth import (PRESETS, confounded_preset, generate, generate_confounded_cohort,
                        generate_multimodal_cohort, multimodal_preset, population_covariance,
                        with_seed)

from conftest import zscore


@pytest.mark.parametrize("kind", ["confounded", "multimodal"])
def test_identical_seeds_bit_identical(kind):
    spec = PRESETS[kind](seed=7, n_samples=100)
    a, b = generate(kind, spec), generate(kind, spec)
    assert np.array_equal(a.primary, b.primary) and np.array_equal(a.concomitant, b.concomitant)
    assert np.array_equal(a.labels, b.labels)
    c = generate(kind, with_seed(spec, 8))
    assert not np.array_equal(a.primary, c.primary)


def test_default_sizes():
    ds = generate_multimodal_cohort(SynthSpec())
    assert (ds.n_samples, ds.d_primary, ds.d_concomitant) == (62, 36, 3)


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(noise_sigma=0.0)
    with pytest.raises(ValueError):
        SynthSpec(label_confound_correlation=1.5)
    with pytest.raises(ValueError):
        SynthSpec(d_primary=0)
    with pytest.raises(ValueError):
        generate("spiral", SynthSpec())


def test_confounded_cohort_structure():
    ds = generate_confounded_cohort(confounded_preset(seed=0))
    assert ds.labels.sum() == ds.n_samples // 2
    # bimodal confound: modes near -1 and +1, agreement with the target near (1 + rho) / 2
    c = ds.concomitant[0]
    assert np.mean(np.abs(np.abs(c) - 1.0) < 0.5) > 0.99
    agree = np.mean(ds.confound_labels == ds.labels)
    assert abs(agree - 0.8) < 0.05


@pytest.mark.parametrize("kind,spec", [
    ("confounded", confounded_preset(n_samples=10_000, d_primary=4, d_concomitant=2, seed=3)),
    ("multimodal", multimodal_preset(n_samples=10_000, d_primary=6, d_concomitant=3, seed=3)),
])
def test_moments_match_generative_formula(kind, spec):
    ds = generate(kind, spec)
    Z = ds.stacked
    sd = np.sqrt(np.diag(population_covariance(spec, kind)))
    assert np.max(np.abs(Z.mean(axis=1)) / sd) < 0.05
    emp = np.cov(Z, bias=True)
    pop = population_covariance(spec, kind)
    assert np.linalg.norm(emp - pop) <= 0.05 * np.linalg.norm(pop)


@pytest.mark.parametrize("seed", range(20))
def test_no_confound_pathway_gives_chance_confound_auc(seed):
    spec = SynthSpec(n_samples=4000, d_primary=3, d_concomitant=1, confound_strength=0.0, seed=seed)
    ds = generate_confounded_cohort(spec)
    value, _ = cross_validated_auc(ds.primary.T, ds.confound_labels, c=1.0)
    assert abs(value - 0.5) <= 0.07


def cross_block_r2(X, Y):
    """Fraction of Y variance predictable linearly from X (the adversary's best response)."""
    _, resid = refit_adversary(X, Y)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    return 1.0 - resid / np.sum(Yc ** 2)


def test_no_redundancy_leaves_nothing_to_remove():
    # no shared latent and no label link between the private latents
    spec = multimodal_preset(seed=0, n_samples=2000, redundancy_strength=0.0, signal_strength=0.0)
    ds = generate_multimodal_cohort(spec)
    ds = ds.with_blocks(zscore(ds.primary), zscore(ds.concomitant))
    base = cross_block_r2(encode(fit(ds, 4, 0.0), ds), ds.concomitant)
    for mu in (1.0, 20.0):
        r2 = cross_block_r2(encode(fit(ds, 4, mu), ds), ds.concomitant)
        assert r2 >= base - 0.005  # base itself is chance-level, about l / N


@pytest.mark.parametrize("seed", range(3))
def test_high_redundancy_makes_blocks_predictable(seed):
    ds = generate_multimodal_cohort(multimodal_preset(seed=seed, n_samples=2000,
                                                      redundancy_strength=5.0))
    # multiple correlation between the block and its least-squares prediction
    assert np.sqrt(cross_block_r2(ds.primary, ds.concomitant)) >= 0.8


def test_redundancy_removed_at_high_mu():
    ds = generate_multimodal_cohort(multimodal_preset(seed=0, n_samples=2000))
    ds = ds.with_blocks(zscore(ds.primary), zscore(ds.concomitant))
    base = cross_block_r2(encode(fit(ds, 4, 0.0), ds), ds.concomitant)
    high = cross_block_r2(encode(fit(ds, 4, 20.0), ds), ds.concomitant)
    assert base > 0.4 and high < 0.01
