"""Independent checks for the solver: grid search at n = m = 1, an analytic
scalar optimum, central-difference gradients and the zero-block structure of
the joint inverse.

The scalar routines evaluate the cost from its explicit 2 x 2 formula and do
not go through the matrix code paths in :mod:`plabound.solver`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covmodel import JointChannelCovariance
from .errors import DomainError, SolverPreconditionError, StructuralError
from .solver import AttackParameters, cost_J, cost_J_batch

MAX_GRID_POINTS = 10**8


@dataclass(frozen=True)
class GridSpec:
    z_range: tuple[float, float] = (-3.0, 3.0)
    c_range: tuple[float, float] = (0.0, 3.0)
    step: float = 1e-3

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        for lo, hi in (self.z_range, self.c_range):
            if not hi >= lo:
                raise DomainError(f"empty range [{lo}, {hi}]")

    def axis(self, rng: tuple[float, float]) -> np.ndarray:
        count = int(math.floor((rng[1] - rng[0]) / self.step + 1e-9)) + 1
        return rng[0] + self.step * np.arange(count)

    @property
    def size(self) -> int:
        return self.axis(self.z_range).size * self.axis(self.c_range).size


def scalar_cost(K: JointChannelCovariance, z, c):
    """J at n = m = 1 written out by hand; broadcasts over z and c."""
    kxx, kxy, kxz = K.Kxx[0, 0].real, K.Kxy[0, 0].real, K.Kxz[0, 0].real
    kyy, kzz = K.Kyy[0, 0].real, K.Kzz[0, 0].real
    det_xy = kxx * kyy - kxy ** 2
    y = kxz * z / kzz
    x = z ** 2 / kzz + c ** 2
    det_xv = kxx * x - y ** 2
    tr = (kyy * kxx - 2 * kxy * y + kxx * x) / det_xy
    with np.errstate(divide="ignore", invalid="ignore"):
        J = -np.log(det_xv / det_xy) + tr
    return np.where(det_xv > 0, J, np.inf)


def brute_force_scalar(K: JointChannelCovariance, grid: GridSpec = GridSpec(), chunk: int = 256):
    """Exhaustive minimum of J over the (Z, C) grid for a real scalar model."""
    if K.n != 1 or K.m != 1:
        raise StructuralError("brute force oracle needs n = m = 1")
    if not K.is_real:
        raise DomainError("brute force oracle needs real-valued blocks")
    if grid.size > MAX_GRID_POINTS:
        raise DomainError(f"grid has {grid.size} points, limit is {MAX_GRID_POINTS}")
    zs = grid.axis(grid.z_range)
    cs = grid.axis(grid.c_range)
    best = (math.nan, math.nan, math.inf)
    for i in range(0, zs.size, chunk):
        zb = zs[i:i + chunk, None]
        J = scalar_cost(K, zb, cs[None, :])
        k = np.argmin(J)
        r, col = np.unravel_index(k, J.shape)
        if J[r, col] < best[2]:
            best = (float(zb[r, 0]), float(cs[col]), float(J[r, col]))
    return best


def scalar_identity_divergence(sigma: float, rho: float) -> float:
    """Optimal divergence for Kxx = Kyy = Kzz = 1, Kxy = sigma, Kxz = rho (real, rho >= 0).

    If rho >= sigma the relaxed optimum is feasible and D = 0. Otherwise the
    optimum sits on the boundary X = Z^2, where stationarity reduces to
    Z^2 - sigma rho Z - (1 - sigma^2) = 0.
    """
    if not (0 <= abs(sigma) < 1 and 0 <= rho <= 1):
        raise DomainError("need |sigma| < 1 and 0 <= rho <= 1")
    if rho >= sigma:
        return 0.0
    a = 1.0 - sigma ** 2
    z = 0.5 * (sigma * rho + math.sqrt((sigma * rho) ** 2 + 4 * a))
    J = -math.log(z * z * (1 - rho ** 2) / a) + (1 - 2 * sigma * rho * z + z * z) / a
    return J - 2.0


@dataclass(frozen=True)
class FDGradient:
    gZ: np.ndarray
    gC: np.ndarray
    J: float
    param_norm: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.gZ) ** 2 + np.linalg.norm(self.gC) ** 2))

    @property
    def relative_norm(self) -> float:
        """||grad|| * max(1, ||(Z, C)||) / max(1, |J|): invariant to rescaling the unknowns."""
        return self.norm * max(1.0, self.param_norm) / max(1.0, abs(self.J))


def finite_difference_gradient(K: JointChannelCovariance, params: AttackParameters,
                               h: float | None = None, batch: int = 128) -> FDGradient:
    """Central differences of J over every real coordinate of Z and C.

    Default steps are 1e-6 * (1 + ||Z||) for Z and 1e-6 * (1 + ||C||) for C.
    Gradients are returned as complex matrices: real part is d/dRe, imaginary
    part is d/dIm. When K and the parameters are real only the real
    coordinates are probed; J is even in the imaginary ones there.
    """
    Z, C = params.Z, params.C
    J0 = cost_J(K, params)
    if not math.isfinite(J0):
        raise SolverPreconditionError("cost is not finite at the base point")
    real = K.is_real and params.is_real()
    hz = h if h is not None else 1e-6 * (1 + np.linalg.norm(Z))
    hc = h if h is not None else 1e-6 * (1 + np.linalg.norm(C))

    def probe(which: str, base: np.ndarray, step: float) -> np.ndarray:
        size = base.size
        grad = np.zeros(2 * size)
        coords = np.arange(size if real else 2 * size)
        for s in range(0, coords.size, batch):
            idx = coords[s:s + batch]
            b = idx.size
            E = np.zeros((b, size), dtype=complex)
            E[np.arange(b), idx % size] = np.where(idx < size, 1.0, 1.0j)
            E = E.reshape((b,) + base.shape) * step
            vals = []
            for sign in (1.0, -1.0):
                if which == "Z":
                    Js = cost_J_batch(K, Z[None] + sign * E, np.broadcast_to(C, (b,) + C.shape))
                else:
                    Js = cost_J_batch(K, np.broadcast_to(Z, (b,) + Z.shape), C[None] + sign * E)
                vals.append(Js)
            bad = ~(np.isfinite(vals[0]) & np.isfinite(vals[1]))
            if bad.any():
                k = int(idx[np.argmax(bad)])
                part = "Re" if k < size else "Im"
                pos = [int(i) for i in np.unravel_index(k % size, base.shape)]
                raise SolverPreconditionError(f"non-finite probe at {part} {which}{pos}")
            grad[idx] = (vals[0] - vals[1]) / (2 * step)
        return (grad[:size] + 1j * grad[size:]).reshape(base.shape)

    gZ = probe("Z", Z, hz)
    gC = probe("C", C, hc)
    pnorm = float(np.sqrt(np.linalg.norm(Z) ** 2 + np.linalg.norm(C) ** 2))
    return FDGradient(gZ, gC, J0, pnorm)


def check_zero_block_inverse(M, n: int, m: int) -> float:
    """||(M^-1)_xv|| / ||M^-1|| in Frobenius norm for a (2n+m)-square PD matrix."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (2 * n + m, 2 * n + m):
        raise StructuralError(f"matrix shape {M.shape} does not match n={n}, m={m}")
    try:
        np.linalg.cholesky(0.5 * (M + M.conj().T))
    except np.linalg.LinAlgError as exc:
        raise SolverPreconditionError("matrix is not positive definite") from exc
    Minv = np.linalg.inv(M)
    return float(np.linalg.norm(Minv[:n, n:2 * n]) / np.linalg.norm(Minv))


def conditional_cross_covariance(M, n: int, m: int) -> float:
    """Relative norm of M_xv - M_xz M_zz^-1 M_zv.

    For PD M this vanishes exactly when the (x, v) block of M^-1 does, and it
    stays meaningful when M is singular but M_zz is not, which is the case
    at boundary optima where C loses rank.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (2 * n + m, 2 * n + m):
        raise StructuralError(f"matrix shape {M.shape} does not match n={n}, m={m}")
    x, v, z = slice(0, n), slice(n, 2 * n), slice(2 * n, 2 * n + m)
    reg = M[x, z] @ np.linalg.solve(M[z, z], M[z, v])
    scale = 1.0 + np.linalg.norm(M[x, v]) + np.linalg.norm(reg)
    return float(np.linalg.norm(M[x, v] - reg) / scale)
