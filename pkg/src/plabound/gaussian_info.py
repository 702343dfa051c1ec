"""Divergences between zero-mean circular Gaussian laws and the binary
divergence that turns a divergence budget into an (alpha, beta) region.

Everything is in nats. The Gaussian divergence uses the circular-symmetric
complex convention (no factor 1/2), also for real-valued covariances.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from .errors import DomainError, SolverPreconditionError

TOL_ROOT = 1e-12
MAX_BISECTION = 200


def _logdet_pd(M: np.ndarray) -> float | None:
    """log det of a Hermitian matrix via Cholesky; None when not PD."""
    try:
        L = np.linalg.cholesky(0.5 * (M + M.conj().T))
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))


def kl_gaussian(K0, K1) -> float:
    """D(N(0, K0) || N(0, K1)) = tr(K1^-1 K0) - log det(K0 K1^-1) - d.

    Returns ``math.inf`` when K0 is singular; raises when K1 is.
    """
    K0 = np.atleast_2d(np.asarray(K0, dtype=complex))
    K1 = np.atleast_2d(np.asarray(K1, dtype=complex))
    if K0.shape != K1.shape or K0.shape[0] != K0.shape[1]:
        raise DomainError(f"shape mismatch {K0.shape} vs {K1.shape}")
    d = K0.shape[0]
    ld1 = _logdet_pd(K1)
    if ld1 is None:
        raise SolverPreconditionError("reference covariance K1 is not positive definite")
    ld0 = _logdet_pd(K0)
    if ld0 is None:
        return math.inf
    tr = float(np.trace(np.linalg.solve(K1, K0)).real)
    return tr - (ld0 - ld1) - d


def binary_divergence(phi: float, psi: float) -> float:
    """f(phi, psi): divergence between Bernoulli(phi) and Bernoulli(1 - psi)."""
    if not (0.0 <= phi <= 1.0 and 0.0 <= psi <= 1.0):
        raise DomainError(f"arguments must lie in [0, 1], got phi={phi}, psi={psi}")
    if abs(phi + psi - 1.0) <= 4 * np.finfo(float).eps:
        return 0.0
    # nonnegative in exact arithmetic; clamp the roundoff near phi = 1 - psi
    return max(0.0, float(rel_entr(phi, 1.0 - psi) + rel_entr(1.0 - phi, psi)))


def beta_lower_bound(alpha: float, d_star: float) -> float:
    """Smallest beta in [0, 1 - alpha] with f(beta, alpha) <= d_star.

    f(., alpha) decreases on [0, 1 - alpha] down to zero, so the answer is
    bracketed and found by bisection.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    if d_star < 0 or math.isnan(d_star):
        raise DomainError(f"d_star must be nonnegative, got {d_star}")
    hi = 1.0 - alpha
    if d_star == 0.0:
        return hi
    if binary_divergence(0.0, alpha) <= d_star:
        return 0.0
    lo = 0.0
    for _ in range(MAX_BISECTION):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if binary_divergence(mid, alpha) <= d_star:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ErrorRegionBound:
    d_star: float
    points: tuple[tuple[float, float], ...]

    @property
    def alpha(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def beta_low(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta_low"])
        for a, b in self.points:
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, d_star: float) -> "ErrorRegionBound":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        rows = list(csv.reader(lines))
        if rows[0] != ["alpha", "beta_low"]:
            raise DomainError(f"unexpected header {rows[0]}")
        return cls(d_star, tuple((float(a), float(b)) for a, b in rows[1:]))


def region_boundary(d_star: float, alpha_grid) -> ErrorRegionBound:
    alphas = [float(a) for a in alpha_grid]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise DomainError("alpha grid must be strictly increasing")
    points = tuple((a, beta_lower_bound(a, d_star)) for a in alphas)
    return ErrorRegionBound(float(d_star), points)
