"""
Identity-block scenarios
========================

All blocks are scaled identities: Kxy = sigma I, Kxz = rho I, Kyz = tau I.
The problem then splits into n independent scalar problems, so D* grows
linearly with n.
"""

# %%
import math

from plabound import build_identity_scenario, solve
from plabound.experiments import sweep

# sigma = 1/sqrt(2) with tau = 0 gives D* = 1.6099 at n = 2, rho = 0.1
sigma = 1 / math.sqrt(2)
rows = sweep([1, 2, 4, 8, 16, 32, 64], [0.1, 0.5, 0.7], sigma=sigma, tau=0.0)

print(f"{'n':>3} {'rho':>4} {'D_cf':>10} {'D_iter':>10} {'eta %':>8} {'iters':>5}")
for r in rows:
    print(f"{r['n']:>3} {r['rho']:>4} {r['J_cf'] - 2 * r['n']:>10.4f} {r['D_iter']:>10.4f} "
          f"{r['eta']:>8.2f} {r['iters']:>5}")

# %%
# The fixed-point iteration on a large instance. history[0] is D at the
# projected starting point.
K = build_identity_scenario(64, rho=0.1, sigma=0.9, tau=0.09)
sol = solve(K)
print(f"n=64: {sol.iterations} iterations, D* = {sol.d_star:.6f}")
for k in (0, 1, 2, 5, 10, 20, sol.iterations):
    print(f"  iteration {k:>3}: D = {sol.history[k]:.6f}")

# %%
# With rho >= sigma the relaxed solution is already a valid covariance
# and the attacker reaches D* = 0 on the scalar model.
for rho in (0.3, 0.6, 0.9):
    s = solve(build_identity_scenario(1, rho=rho, sigma=0.6, tau=0.6 * rho))
    print(f"rho={rho}: feasible relaxed solution {s.relaxed_feasible}, D* = {s.d_star:.6f}")
