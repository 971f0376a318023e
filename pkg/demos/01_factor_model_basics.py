"""
Adversarial factors on a toy dataset
====================================

Fit the closed-form model, look at the spectrum of the augmented matrix and
compare against plain PCA and the iterative minimax solver.
"""
import numpy as np

from apca import Dataset, build_augmented_system, center, encode, fit, objective_value, pca_fit
from apca import reconstruct_primary, solve_minimax

rng = np.random.default_rng(0)
n = 200

# one latent h leaks into both blocks
h = rng.standard_normal(n)
X = rng.standard_normal((5, n)) + np.outer([2.0, 1.5, 0.0, 0.0, 0.5], h)
Y = rng.standard_normal((2, n)) * 0.3 + np.outer([1.0, -1.0], h)
data = Dataset(X, Y)

# at mu = 0 the model is PCA of X
model = fit(data, n_factors=2, mu=0.0)
Xhat = reconstruct_primary(model, encode(model, data))
pca = pca_fit(X, 2)
print("mu=0 vs PCA, max abs difference:", np.abs(Xhat - pca.reconstruct(X)).max())

# the augmented matrix has d_x positive, d_y negative and d_y zero eigenvalues
centered, _, _ = center(data)
system = build_augmented_system(centered, mu=4.0)
print("spectrum of B at mu=4:", np.round(system.eigenvalues.real, 2))

# raising mu trades primary reconstruction for concomitant unpredictability
for mu in (0.0, 1.0, 4.0, 16.0):
    m = fit(data, 2, mu)
    total, primary_term, adversary_term = objective_value(m, data)
    print(f"mu={mu:5.1f}  ||X-WAZ||^2={primary_term:8.1f}  ||Y-DAZ||^2={adversary_term:7.1f}")

# the iterative solver lands on the same value
sol = solve_minimax(data, 2, 4.0)
print("analytic:", objective_value(fit(data, 2, 4.0), data)[0], " iterative:", sol.objective_trace[-1])
