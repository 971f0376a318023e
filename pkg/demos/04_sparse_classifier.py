"""
L1-penalized classification and cross-validated AUC
===================================================
"""
import numpy as np

from apca import EvalConfig, auc, cross_validated_auc
from apca.classify import l1_path

rng = np.random.default_rng(1)
n, p = 300, 10
F = rng.standard_normal((n, p))
y = (F[:, 0] - 0.5 * F[:, 1] + rng.standard_normal(n) > 0).astype(int)

# weights switch on one by one as C grows
for model in l1_path(F, y, [1e-2, 1e-1, 1.0, 10.0]):
    nonzero = np.flatnonzero(model.weights)
    print(f"C={model.penalty_c:6.2f}  nonzero weights {nonzero.tolist()}")

# ties count one half
print("AUC with ties:", auc([0.2, 0.5, 0.5, 0.9], [0, 0, 1, 1]))

for scheme in ("stratified-k-fold", "leave-one-out"):
    value, _ = cross_validated_auc(F, y, EvalConfig(cv_scheme=scheme), c=1.0)
    print(f"{scheme:18s} AUC {value:.3f}")
