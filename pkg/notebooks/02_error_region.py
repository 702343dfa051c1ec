"""
Error-region boundary
=====================

Any decision rule for the authentication test has false alarm alpha and
missed detection beta with f(beta, alpha) <= D*. Smaller D* pushes the
boundary up, i.e. a better-informed attacker forces larger beta.
"""

# %%
import math

import numpy as np

from plabound import build_identity_scenario, region_boundary, solve

sigma = 1 / math.sqrt(2)
alphas = np.array([0.01, 0.05, 0.1, 0.2, 0.3, 0.5])
curves = {}
for rho in (0.1, 0.3, 0.5, 0.7):
    d_star = solve(build_identity_scenario(2, rho=rho, sigma=sigma, tau=0.0)).d_star
    curves[rho] = (d_star, region_boundary(d_star, alphas).beta_low)

print("alpha  " + " ".join(f"{a:>8}" for a in alphas))
for rho, (d_star, beta) in curves.items():
    print(f"rho={rho} (D*={d_star:.4f})")
    print("beta   " + " ".join(f"{b:8.4f}" for b in beta))

# %%
# The same boundary as CSV, ready for plotting elsewhere.
print(region_boundary(curves[0.1][0], np.linspace(0.01, 0.99, 9)).to_csv())
