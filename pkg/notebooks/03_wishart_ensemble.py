"""
Random Wishart correlations
===========================

The joint covariance of (x, y, z) is a 3n x 3n real Wishart matrix. We look
at how often the relaxed closed form is already a valid covariance, and at
the gap eta between the relaxed cost and the final cost.
"""

# %%
from plabound.experiments import wishart_ensemble

_, feas = wishart_ensemble([1, 2, 4, 8, 16, 32], trials=200, seed=0, solve_it=False)
for n, entry in feas.items():
    print(f"n={n:>2}: relaxed solution feasible in {entry['feasible_percent']:5.1f}% of draws")

# %%
# Full solves. eta = 100 (J_iter / J_cf - 1) >= 0 since the relaxed optimum
# is a lower bound.
rows, summary = wishart_ensemble([2, 4, 8], trials=20, seed=0)
for n, entry in summary.items():
    cdf = entry["d_star_cdf"]
    print(f"n={n}: median eta {entry['median_eta']:.1f}%, min eta {entry['min_eta']:.2e}, "
          f"D* quartiles {cdf[len(cdf) // 4]:.3f} {cdf[len(cdf) // 2]:.3f} {cdf[3 * len(cdf) // 4]:.3f}")
