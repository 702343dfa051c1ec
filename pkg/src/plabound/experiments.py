"""Batch drivers behind the command line: identity-scenario sweeps, Wishart
ensembles and error-region tables.

Randomness: every Wishart trial draws its scenario seed from
``SeedSequence([seed, n, trial])``, so a trial can be regenerated alone and
rows never depend on execution order.
"""

from __future__ import annotations

import math
from statistics import median

import numpy as np

from .covmodel import build_identity_scenario, sample_wishart_scenario
from .solver import MAX_ITER, REL_TOL, is_feasible, solve, solve_relaxed


def trial_seed(seed: int, n: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(n), int(trial)]).generate_state(1, np.uint64)[0])


def sweep(n_list, rho_list, sigma=None, tau=None, max_iter=MAX_ITER, rel_tol=REL_TOL):
    """Identity scenarios over a grid of (n, rho); rows sorted by (n, rho)."""
    rows = []
    for n in sorted(n_list):
        for rho in sorted(rho_list):
            K = build_identity_scenario(n, rho, sigma, tau)
            sol = solve(K, max_iter=max_iter, rel_tol=rel_tol)
            rows.append({
                "n": n, "rho": rho, "J_cf": sol.j_cf, "J_iter": sol.j_star,
                "D_iter": sol.d_star, "eta": sol.eta, "projected": int(sol.projected),
                "iters": sol.iterations,
            })
    return rows


def wishart_trial(n: int, trial: int, seed: int, field: str = "real", solve_it: bool = True,
                  max_iter=MAX_ITER, rel_tol=REL_TOL):
    K = sample_wishart_scenario(n, trial_seed(seed, n, trial), field)
    if not solve_it:
        Z, X = solve_relaxed(K)
        return {"n": n, "trial": trial, "feasible_cf": int(is_feasible(K, Z, X))}
    sol = solve(K, max_iter=max_iter, rel_tol=rel_tol)
    return {
        "n": n, "trial": trial, "feasible_cf": int(sol.relaxed_feasible), "J_cf": sol.j_cf,
        "J_iter": sol.j_star, "D_iter": sol.d_star, "eta": sol.eta, "iters": sol.iterations,
    }


def wishart_ensemble(n_list, trials: int, seed: int, field: str = "real", solve_it: bool = True,
                     max_iter=MAX_ITER, rel_tol=REL_TOL):
    rows = [wishart_trial(n, t, seed, field, solve_it, max_iter, rel_tol)
            for n in sorted(n_list) for t in range(trials)]
    return rows, wishart_summary(rows)


def wishart_summary(rows):
    out = {}
    for n in sorted({r["n"] for r in rows}):
        sub = [r for r in rows if r["n"] == n]
        entry = {
            "trials": len(sub),
            "feasible_percent": 100.0 * sum(r["feasible_cf"] for r in sub) / len(sub),
        }
        if "D_iter" in sub[0]:
            etas = [r["eta"] for r in sub if not math.isnan(r["eta"])]
            entry["median_eta"] = median(etas) if etas else math.nan
            entry["min_eta"] = min(etas) if etas else math.nan
            entry["d_star_cdf"] = sorted(r["D_iter"] for r in sub)
        out[str(n)] = entry
    return out


def default_alpha_grid(points: int = 99) -> np.ndarray:
    return np.linspace(0.01, 0.99, points)
