"""
Checking the solution
=====================

Three independent views of the same optimum: random perturbations,
finite-difference gradients and, on scalar models, exhaustive search.
"""

# %%
import math

import numpy as np

from plabound import build_identity_scenario, perturb_and_check, sample_wishart_scenario, solve
from plabound.oracle import (
    GridSpec,
    brute_force_scalar,
    conditional_cross_covariance,
    finite_difference_gradient,
    scalar_identity_divergence,
)
from plabound.solver import assemble_joint

K = sample_wishart_scenario(4, 2, "real")
sol = solve(K)
rep = perturb_and_check(K, sol, scale=0.01, trials=1000, seed=0)
print(f"J* = {sol.j_star:.10f}, best perturbed J = {rep.min_J_found:.10f}, improved: {rep.improved}")
print(f"smallest increase {np.min(rep.deltas):.3e}, largest {np.max(rep.deltas):.3e}")

# %%
fd = finite_difference_gradient(K, sol.params)
print(f"stationarity residual {sol.stationarity_residual:.2e}, FD relative gradient {fd.relative_norm:.2e}")
# x and v are uncorrelated once z is known
print(f"conditional cross-covariance {conditional_cross_covariance(assemble_joint(K, sol.params), 4, 4):.2e}")
print("singular values of C:", np.round(np.linalg.svd(sol.params.C, compute_uv=False), 6))

# %%
# Scalar model: solver vs closed form vs grid search.
for sigma, rho in [(0.9, 0.0), (0.9, 0.4), (0.5, 0.3)]:
    Ks = build_identity_scenario(1, rho=rho, sigma=sigma, tau=rho * sigma)
    s = solve(Ks)
    _, _, j_grid = brute_force_scalar(Ks, GridSpec((-2, 2), (0, 2), 1e-3))
    print(f"sigma={sigma} rho={rho}: solver D*={s.d_star:.8f} analytic {scalar_identity_divergence(sigma, rho):.8f} "
          f"grid {j_grid - 2:.8f}")
print(f"rho=0 reference sigma^2/(1-sigma^2) = {0.81 / 0.19:.8f}, ln 2 = {math.log(2):.6f}")
