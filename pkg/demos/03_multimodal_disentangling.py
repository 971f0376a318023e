"""
Disentangling two modalities
============================

An EEG-like block and a behavior-like block share nuisance latents. Factors of
the EEG block that are unpredictive of behavior complement the raw behavior
features better than the raw EEG features do.
"""
from apca import EvalConfig, disentanglement_experiment
from apca.synth import generate_multimodal_cohort, multimodal_preset

data = generate_multimodal_cohort(multimodal_preset(seed=3))
config = EvalConfig(mu_grid=(0.0, 1.0, 5.0, 20.0), recon_factors=5)
sweep, comparison = disentanglement_experiment(data, config)

print("preprocessing  # of features  AUC")
for row in comparison:
    print(f"{row.preprocessing:13s}  {row.n_features:13d}  {row.auc:.3f}")

# reconstruction errors at a fixed factor count rise with mu
print("\n   mu  EEG error  behavior error")
for r in sweep.records:
    print(f"{r.mu:5.1f}  {r.primary_recon_error:9.3f}  {r.concomitant_recon_error:14.3f}")
