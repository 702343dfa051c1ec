"""Joint second-order models of the template x, the legitimate estimate y and
the attacker observation z.

The joint covariance is stored as its six distinct blocks::

    [[Kxx,  Kxy,  Kxz],
     [Kxy*, Kyy,  Kyz],
     [Kxz*, Kyz*, Kzz]]

All blocks are held as read-only complex arrays. Real inputs are embedded with
zero imaginary part.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import SolverPreconditionError, StructuralError

logger = logging.getLogger(__name__)

MAX_WISHART_ATTEMPTS = 100

BLOCK_NAMES = ("Kxx", "Kxy", "Kxz", "Kyy", "Kyz", "Kzz")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    arr.setflags(write=False)
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True, eq=False)
class JointChannelCovariance:
    """Covariance of the stacked vector [x; y; z] with dim x = dim y = n, dim z = m."""

    Kxx: np.ndarray
    Kxy: np.ndarray
    Kxz: np.ndarray
    Kyy: np.ndarray
    Kyz: np.ndarray
    Kzz: np.ndarray
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for name in BLOCK_NAMES:
            arr = getattr(self, name)
            arr = np.asarray(arr)
            if arr.ndim > 2:
                raise StructuralError(f"{name} must be a matrix, got ndim={arr.ndim}")
            object.__setattr__(self, name, _frozen(arr))
        object.__setattr__(self, "meta", dict(self.meta))
        n = self.Kxx.shape[0]
        m = self.Kzz.shape[0]
        expected = {
            "Kxx": (n, n), "Kxy": (n, n), "Kxz": (n, m),
            "Kyy": (n, n), "Kyz": (n, m), "Kzz": (m, m),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise StructuralError(
                    f"block {name} has shape {got}, expected {shape} for n={n}, m={m}"
                )
        if n < 1 or m < 1:
            raise StructuralError("n and m must be positive")

    @property
    def n(self) -> int:
        return self.Kxx.shape[0]

    @property
    def m(self) -> int:
        return self.Kzz.shape[0]

    @property
    def is_real(self) -> bool:
        return all(not np.any(getattr(self, b).imag) for b in BLOCK_NAMES)

    @property
    def tol_psd(self) -> float:
        return tol_psd(self)

    def full(self) -> np.ndarray:
        """The assembled (2n+m) x (2n+m) matrix."""
        H = lambda a: a.conj().T  # noqa: E731
        return np.block([
            [self.Kxx, self.Kxy, self.Kxz],
            [H(self.Kxy), self.Kyy, self.Kyz],
            [H(self.Kxz), H(self.Kyz), self.Kzz],
        ])

    def xy(self) -> np.ndarray:
        """Covariance of [x; y], the reference law of the divergence."""
        return np.block([[self.Kxx, self.Kxy], [self.Kxy.conj().T, self.Kyy]])

    def xz(self) -> np.ndarray:
        return np.block([[self.Kxx, self.Kxz], [self.Kxz.conj().T, self.Kzz]])

    @classmethod
    def from_full(cls, W, n: int, m: int | None = None, meta=None) -> "JointChannelCovariance":
        W = np.asarray(W)
        if m is None:
            m = W.shape[0] - 2 * n
        if W.ndim != 2 or W.shape != (2 * n + m, 2 * n + m) or m < 1:
            raise StructuralError(f"matrix of shape {W.shape} cannot be split with n={n}, m={m}")
        x, y, z = slice(0, n), slice(n, 2 * n), slice(2 * n, 2 * n + m)
        return cls(W[x, x], W[x, y], W[x, z], W[y, y], W[y, z], W[z, z], meta=meta or {})


def tol_psd(K: JointChannelCovariance) -> float:
    """Scale-aware PSD tolerance: 1e-9 * (1 + largest diagonal entry)."""
    diag = np.concatenate([np.diag(K.Kxx), np.diag(K.Kyy), np.diag(K.Kzz)]).real
    return 1e-9 * (1.0 + float(np.max(diag)))


@dataclass(frozen=True)
class Violation:
    invariant: str
    detail: str
    value: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{v.invariant}: {v.detail}" for v in self.violations)


def validate(K: JointChannelCovariance) -> ValidationReport:
    """Check the covariance invariants; structural problems raise instead.

    The [x; z] corner is allowed to be singular (for instance when z is a
    copy of x); only Kxx and Kzz must be strictly positive definite, since
    those are the matrices the solver inverts.
    """
    tol = tol_psd(K)
    W = K.full()
    out = []

    asym = float(np.max(np.abs(W - W.conj().T)))
    if asym > tol:
        out.append(Violation("hermitian", f"max |K - K*| = {asym:.3e}", asym))

    d = np.diag(W)
    worst_imag = float(np.max(np.abs(d.imag)))
    if worst_imag > tol:
        out.append(Violation("real_diagonal", f"max |Im diag| = {worst_imag:.3e}", worst_imag))
    min_diag = float(np.min(d.real))
    if min_diag < -tol:
        out.append(Violation("nonnegative_diagonal", f"min diag = {min_diag:.3e}", min_diag))

    lam = float(np.linalg.eigvalsh(hermitian_part(W))[0])
    if lam < -tol:
        out.append(Violation("psd", f"most negative eigenvalue {lam:.6e}", lam))

    for name in ("Kxx", "Kzz"):
        lam_b = float(np.linalg.eigvalsh(hermitian_part(getattr(K, name)))[0])
        if lam_b <= tol:
            out.append(Violation(f"{name}_pd", f"smallest eigenvalue of {name} is {lam_b:.6e}", lam_b))
    return ValidationReport(tuple(out))


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for a scenario: either the identity-block family or a Wishart draw."""

    kind: str
    n: int
    m: int | None = None
    rho: complex = 0.0
    sigma: complex | None = None
    tau: complex | None = None
    seed: int = 0
    field: str = "real"

    def build(self) -> JointChannelCovariance:
        if self.kind == "identity_block":
            if self.m not in (None, self.n):
                raise StructuralError("identity_block scenarios require m = n")
            return build_identity_scenario(self.n, self.rho, self.sigma, self.tau)
        if self.kind == "wishart":
            if self.m not in (None, self.n):
                raise StructuralError("wishart scenarios use m = n")
            return sample_wishart_scenario(self.n, self.seed, self.field)
        raise StructuralError(f"unknown scenario kind {self.kind!r}")


DEFAULT_SIGMA = 0.9


def build_identity_scenario(n: int, rho=0.0, sigma=None, tau=None) -> JointChannelCovariance:
    """Scalar-multiple-of-identity blocks: Kxy = sigma I, Kxz = rho I, Kyz = tau I.

    sigma defaults to 0.9 and tau to rho * sigma; defaults are logged.
    """
    if n < 1:
        raise StructuralError("n must be >= 1")
    if sigma is None:
        sigma = DEFAULT_SIGMA
        logger.info("identity scenario: sigma not given, using default %s", sigma)
    if tau is None:
        tau = rho * sigma
        logger.info("identity scenario: tau not given, using rho*sigma = %s", tau)
    eye = np.eye(n)
    meta = {"kind": "identity_block", "rho": complex(rho), "sigma": complex(sigma), "tau": complex(tau)}
    return JointChannelCovariance(eye, sigma * eye, rho * eye, eye, tau * eye, eye, meta=meta)


def wishart_generator(seed: int, attempt: int = 0) -> np.random.Generator:
    """PCG64 stream for a Wishart draw: SeedSequence entropy [seed, attempt]."""
    return np.random.default_rng([int(seed), int(attempt)])


def sample_wishart_scenario(n: int, seed: int, field: str = "real") -> JointChannelCovariance:
    """W = A A* with A a 3n x 3n matrix of unit-variance Gaussian entries.

    Complex entries carry variance 1/2 on each of the real and imaginary parts.
    If the [x; z] corner comes out singular the draw is repeated with the next
    attempt index (recorded in ``meta['attempt']``).
    """
    if n < 1:
        raise StructuralError("n must be >= 1")
    if field not in ("real", "complex"):
        raise StructuralError(f"field must be 'real' or 'complex', got {field!r}")
    d = 3 * n
    for attempt in range(MAX_WISHART_ATTEMPTS):
        rng = wishart_generator(seed, attempt)
        if field == "real":
            A = rng.standard_normal((d, d))
        else:
            A = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
        W = A @ A.conj().T
        W = hermitian_part(W)
        meta = {"kind": "wishart", "seed": int(seed), "field": field, "attempt": attempt}
        K = JointChannelCovariance.from_full(W, n, n, meta=meta)
        if np.linalg.eigvalsh(K.xz())[0] > tol_psd(K):
            return K
        logger.warning("wishart seed %d attempt %d: singular [x;z] corner, resampling", seed, attempt)
    raise SolverPreconditionError(
        f"no nonsingular Wishart draw after {MAX_WISHART_ATTEMPTS} attempts (seed={seed})"
    )


def _inv_pd(M: np.ndarray, name: str, tol: float) -> np.ndarray:
    lam = np.linalg.eigvalsh(hermitian_part(M))[0]
    if lam <= tol:
        raise SolverPreconditionError(f"{name} is singular within tolerance (min eigenvalue {lam:.3e})")
    return np.linalg.inv(M)


def schur_A(K: JointChannelCovariance) -> np.ndarray:
    """Residual covariance of y after linear regression on x."""
    Kxx_inv = _inv_pd(K.Kxx, "Kxx", tol_psd(K))
    return hermitian_part(K.Kyy - K.Kxy.conj().T @ Kxx_inv @ K.Kxy)


def schur_B(K: JointChannelCovariance) -> np.ndarray:
    """Residual covariance of z after linear regression on x."""
    Kxx_inv = _inv_pd(K.Kxx, "Kxx", tol_psd(K))
    return hermitian_part(K.Kzz - K.Kxz.conj().T @ Kxx_inv @ K.Kxz)
