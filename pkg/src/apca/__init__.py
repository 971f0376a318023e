"""Adversarial linear factor models (adversarial PCA) and their evaluation harness."""
from .classify import ClassifierModel, auc, train_l1_classifier
from .core import (ApcaModel, AugmentedSystem, FitConfig, build_augmented_system, encode, fit,
                   objective_value, predict_concomitant, reconstruct_primary)
from .data import Dataset, center
from .errors import (ApcaError, ComplexSpectrum, DataFormatError, DegenerateEncoder,
                     DimensionMismatch, InfeasibleStratification, NoConvergence, SingleClass,
                     SingularGram)
from .evaluation import (EvalConfig, SweepRecord, SweepResult, confound_invariance_experiment,
                         cross_validated_auc, disentanglement_experiment, grid_search)
from .oracle import OracleConfig, refit_adversary, solve_minimax
from .pca import PcaModel, pca_fit
from .synth import (SynthSpec, confounded_preset, generate_confounded_cohort,
                    generate_multimodal_cohort, multimodal_preset)

__version__ = "0.1.0"
