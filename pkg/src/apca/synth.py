"""Seeded synthetic cohorts mirroring the two experiment designs.

``generate_confounded_cohort``
    A balanced binary target and a bimodal continuous confound whose mode
    tracks the target. Primary features load on a target direction and a
    confound direction; the concomitant block holds noisy measurements of the
    confound (several "IQ subscales" when ``d_concomitant > 1``).

``generate_multimodal_cohort``
    Two modalities driven by shared nuisance latents (``shared_dim`` of them)
    plus a private label-informative latent each. The shared latents are the
    cross-modal redundancy that adversarial factors remove.

All latents and noise are Gaussian (the target enters as +/-1), so
``population_covariance`` gives the exact second moments of each design.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int = 62
    d_primary: int = 36
    d_concomitant: int = 3
    signal_strength: float = 1.0
    confound_strength: float = 1.0
    redundancy_strength: float = 1.0
    label_confound_correlation: float = 0.0
    noise_sigma: float = 1.0
    seed: int = 0
    confound_spread: float = 0.25
    concomitant_noise: float = 0.1
    shared_dim: int = 1
    orthogonal_directions: bool = True

    def __post_init__(self):
        if self.n_samples < 2 or self.d_primary < 1 or self.d_concomitant < 1:
            raise ValueError("need n_samples >= 2 and at least one feature per block")
        if not self.noise_sigma > 0:
            raise ValueError("noise_sigma must be > 0")
        if not -1.0 <= self.label_confound_correlation <= 1.0:
            raise ValueError("label_confound_correlation must lie in [-1, 1]")
        if self.confound_spread < 0 or self.concomitant_noise < 0:
            raise ValueError("confound_spread and concomitant_noise must be >= 0")
        if self.shared_dim < 1:
            raise ValueError("shared_dim must be >= 1")


def confounded_preset(**overrides) -> SynthSpec:
    """Three behavior-like features, one IQ-like confound, strongly confounded."""
    base = dict(n_samples=1000, d_primary=3, d_concomitant=1, signal_strength=1.0,
                confound_strength=1.0, label_confound_correlation=0.6, noise_sigma=1.0,
                confound_spread=0.1, concomitant_noise=0.05)
    base.update(overrides)
    return SynthSpec(**base)


def multimodal_preset(**overrides) -> SynthSpec:
    """36 EEG-like primary features, 3 behavior-like features, strong two-dimensional redundancy."""
    base = dict(n_samples=150, d_primary=36, d_concomitant=3, signal_strength=0.7,
                redundancy_strength=3.0, noise_sigma=1.5, shared_dim=2)
    base.update(overrides)
    return SynthSpec(**base)


PRESETS = {"confounded": confounded_preset, "multimodal": multimodal_preset}


def _two_directions(rng, d: int, orthogonal: bool):
    a, b = rng.standard_normal((2, d))
    a /= np.linalg.norm(a)
    if orthogonal and d >= 2:
        b -= (b @ a) * a
    b /= np.linalg.norm(b)
    return a, b


def _private_and_shared(rng, d: int, r: int):
    """A unit private direction and ``r`` unit shared directions, mutually orthogonal when d allows."""
    M = rng.standard_normal((d, r + 1))
    if d >= r + 1:
        q, _ = np.linalg.qr(M)
        return q[:, 0], q[:, 1:]
    M /= np.linalg.norm(M, axis=0)
    return M[:, 0], M[:, 1:]


def _directions(spec: SynthSpec, kind: str):
    # drawn first from the seeded stream so population_covariance can re-derive them
    rng = np.random.default_rng(spec.seed)
    if kind == "confounded":
        return rng, _two_directions(rng, spec.d_primary, spec.orthogonal_directions), None
    x_dirs = _private_and_shared(rng, spec.d_primary, spec.shared_dim)
    y_dirs = _private_and_shared(rng, spec.d_concomitant, spec.shared_dim)
    return rng, x_dirs, y_dirs


def _balanced_target(rng, n: int) -> np.ndarray:
    t = np.zeros(n, dtype=int)
    t[: n // 2] = 1
    return rng.permutation(t)


def generate_confounded_cohort(spec: SynthSpec) -> Dataset:
    rng, (u_signal, u_confound), _ = _directions(spec, "confounded")
    n = spec.n_samples
    target = _balanced_target(rng, n)
    flip = rng.random(n) < (1.0 - spec.label_confound_correlation) / 2.0
    mode = np.where(flip, 1 - target, target)
    confound = (2.0 * mode - 1.0) + spec.confound_spread * rng.standard_normal(n)

    X = (spec.signal_strength * np.outer(u_signal, 2.0 * target - 1.0)
         + spec.confound_strength * np.outer(u_confound, confound)
         + spec.noise_sigma * rng.standard_normal((spec.d_primary, n)))
    Y = confound[None, :] + spec.concomitant_noise * rng.standard_normal((spec.d_concomitant, n))
    return Dataset(
        primary=X,
        concomitant=Y,
        labels=target,
        confound_labels=(confound > 0).astype(int),
        primary_names=[f"behavior_{i}" for i in range(spec.d_primary)],
        concomitant_names=[f"confound_{i}" for i in range(spec.d_concomitant)],
    )


def generate_multimodal_cohort(spec: SynthSpec) -> Dataset:
    rng, (ux, lx), (uy, ly) = _directions(spec, "multimodal")
    n = spec.n_samples
    target = _balanced_target(rng, n)
    signed = 2.0 * target - 1.0
    shared = rng.standard_normal((spec.shared_dim, n))
    private_x = spec.signal_strength * signed + rng.standard_normal(n)
    private_y = spec.signal_strength * signed + rng.standard_normal(n)

    X = (spec.redundancy_strength * lx @ shared + np.outer(ux, private_x)
         + spec.noise_sigma * rng.standard_normal((spec.d_primary, n)))
    Y = (spec.redundancy_strength * ly @ shared + np.outer(uy, private_y)
         + spec.noise_sigma * rng.standard_normal((spec.d_concomitant, n)))
    return Dataset(
        primary=X,
        concomitant=Y,
        labels=target,
        primary_names=[f"eeg_{i}" for i in range(spec.d_primary)],
        concomitant_names=[f"behavior_{i}" for i in range(spec.d_concomitant)],
    )


GENERATORS = {"confounded": generate_confounded_cohort, "multimodal": generate_multimodal_cohort}


def population_covariance(spec: SynthSpec, kind: str) -> np.ndarray:
    """Exact covariance of the stacked ``[X; Y]`` features for a generator design."""
    dx, dy = spec.d_primary, spec.d_concomitant
    if kind == "confounded":
        _, (us, uc), _ = _directions(spec, kind)
        s, k, rho = spec.signal_strength, spec.confound_strength, spec.label_confound_correlation
        var_c = 1.0 + spec.confound_spread ** 2
        cxx = (s * s * np.outer(us, us) + k * k * var_c * np.outer(uc, uc)
               + s * k * rho * (np.outer(us, uc) + np.outer(uc, us)) + spec.noise_sigma ** 2 * np.eye(dx))
        cxy = np.outer(s * rho * us + k * var_c * uc, np.ones(dy))
        cyy = var_c * np.ones((dy, dy)) + spec.concomitant_noise ** 2 * np.eye(dy)
    elif kind == "multimodal":
        _, (ux, lx), (uy, ly) = _directions(spec, kind)
        r2, s2 = spec.redundancy_strength ** 2, spec.signal_strength ** 2
        noise = spec.noise_sigma ** 2
        cxx = r2 * lx @ lx.T + (s2 + 1.0) * np.outer(ux, ux) + noise * np.eye(dx)
        cyy = r2 * ly @ ly.T + (s2 + 1.0) * np.outer(uy, uy) + noise * np.eye(dy)
        cxy = r2 * lx @ ly.T + s2 * np.outer(ux, uy)
    else:
        raise ValueError(f"unknown design {kind!r}")
    return np.block([[cxx, cxy], [cxy.T, cyy]])


def generate(kind: str, spec: SynthSpec) -> Dataset:
    try:
        return GENERATORS[kind](spec)
    except KeyError:
        raise ValueError(f"unknown design {kind!r}; choose from {sorted(GENERATORS)}") from None


def with_seed(spec: SynthSpec, seed: int) -> SynthSpec:
    return replace(spec, seed=seed)
