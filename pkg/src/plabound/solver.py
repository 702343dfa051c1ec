"""Optimal Gaussian forging strategy: the attacker picks the covariance of v
jointly with its observation z so that the law of [x; v] is as close as
possible, in divergence, to the legitimate law of [x; y].

Conditional independence of v and x given z pins the cross block to
Y = Kxz Kzz^-1 Z*, and positivity is built in by writing
X = Z Kzz^-1 Z* + C C*. The unknowns are therefore (Z, C) and the cost is

    J(Z, C) = -log det(Kxv Kxy^-1) + tr(Kxy^-1 Kxv),   D = J - 2n.

The pipeline is: closed-form relaxed optimum (no positivity), projection onto
the feasible set by eigenvalue clipping, the coupled fixed-point iteration on
(Z, C), and a quasi-Newton refinement of J that drives the first-order
conditions to working precision.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .covmodel import JointChannelCovariance, hermitian_part, schur_A, schur_B, tol_psd
from .errors import NumericalDivergenceError, SolverPreconditionError

logger = logging.getLogger(__name__)

REL_TOL = 1e-10
MAX_ITER = 200
TOL_STAT = 1e-7
TOL_ROOT = 1e-12
PINV_RCOND = 1e-12
CLIP_FACTOR = 100.0


def _H(a):
    return a.conj().T


@dataclass(frozen=True, eq=False)
class AttackParameters:
    """Cross-covariance Z = K_vz and factor C of the conditional covariance of v given z."""

    Z: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Z", np.array(self.Z, dtype=complex, ndmin=2))
        object.__setattr__(self, "C", np.array(self.C, dtype=complex, ndmin=2))

    @property
    def cond_cov(self) -> np.ndarray:
        return self.C @ _H(self.C)

    def X(self, K: JointChannelCovariance) -> np.ndarray:
        return hermitian_part(self.Z @ _pre(K).Kzz_inv @ _H(self.Z) + self.cond_cov)

    def Y(self, K: JointChannelCovariance) -> np.ndarray:
        return K.Kxz @ _pre(K).Kzz_inv @ _H(self.Z)

    def is_real(self) -> bool:
        return not (np.any(self.Z.imag) or np.any(self.C.imag))


@dataclass(frozen=True)
class AttackStrategy:
    """v | z ~ CN(gain @ z, cond_cov)."""

    gain: np.ndarray
    cond_cov: np.ndarray


@dataclass(eq=False)
class AttackSolution:
    params: AttackParameters
    j_star: float
    d_star: float
    iterations: int
    converged: bool
    stationarity_residual: float
    history: list = field(default_factory=list)
    fixed_point_converged: bool = False
    fixed_point_residual: float = math.nan
    projected: bool = False
    projection_fallback: bool = False
    relaxed_feasible: bool = False
    j_cf: float = math.nan
    regularized: bool = False
    non_monotone: bool = False
    refined: bool = False
    n: int = 0

    @property
    def eta(self) -> float:
        """Percentage increase of J over the relaxed closed-form cost."""
        if not math.isfinite(self.j_cf) or self.j_cf == 0:
            return math.nan
        return 100.0 * (self.j_star / self.j_cf - 1.0)

    @property
    def d_cf(self) -> float:
        return self.j_cf - 2 * self.n


class _Pre:
    """Quantities that depend on K only."""

    def __init__(self, K: JointChannelCovariance):
        tol = tol_psd(K)
        for name in ("Kxx", "Kzz"):
            lam = np.linalg.eigvalsh(hermitian_part(getattr(K, name)))[0]
            if lam <= tol:
                raise SolverPreconditionError(f"{name} is singular within tolerance (min eigenvalue {lam:.3e})")
        self.n, self.m = K.n, K.m
        self.tol = tol
        self.Kxx_inv = np.linalg.inv(K.Kxx)
        self.Kzz_inv = hermitian_part(np.linalg.inv(K.Kzz))
        self.L = K.Kxz @ self.Kzz_inv
        self.Kxy_full = K.xy()
        self.Kxy_inv = hermitian_part(np.linalg.inv(self.Kxy_full))
        L_chol = np.linalg.cholesky(hermitian_part(self.Kxy_full))
        self.logdet_xy = 2.0 * float(np.sum(np.log(np.abs(np.diag(L_chol)))))
        self.A = schur_A(K)
        self.B = schur_B(K)
        # Kzx Kxx^-1 Kxy, the constant term of the Z update
        self.P0 = _H(K.Kxz) @ self.Kxx_inv @ K.Kxy
        self.K = K
        self.logdet_xx = 2.0 * float(np.sum(np.log(np.abs(np.diag(np.linalg.cholesky(hermitian_part(K.Kxx)))))))
        self.tr_xx = complex(np.sum(self.Kxy_inv[:self.n, :self.n].T * K.Kxx))
        self._cast = {}

    def cast(self, dtype) -> dict:
        """Matrices used by the batched cost, converted once per dtype."""
        if dtype not in self._cast:
            conv = (lambda a: np.ascontiguousarray(a.real)) if dtype is float else (lambda a: a)
            self._cast[dtype] = {name: conv(getattr(self, name)) for name in ("L", "Kzz_inv", "Kxx_inv", "Kxy_inv")}
        return self._cast[dtype]


@functools.lru_cache(maxsize=32)
def _pre(K: JointChannelCovariance) -> _Pre:
    return _Pre(K)


def _kxv(pre: _Pre, Z, C) -> np.ndarray:
    Y = pre.L @ _H(Z)
    X = Z @ pre.Kzz_inv @ _H(Z) + C @ _H(C)
    return hermitian_part(np.block([[pre.K.Kxx, Y], [_H(Y), X]]))


def _kxv_zx(pre: _Pre, Z, X) -> np.ndarray:
    Y = pre.L @ _H(Z)
    return hermitian_part(np.block([[pre.K.Kxx, Y], [_H(Y), X]]))


def _cost_of_kxv(pre: _Pre, Kxv: np.ndarray) -> float:
    try:
        Lc = np.linalg.cholesky(Kxv)
    except np.linalg.LinAlgError:
        return math.inf
    logdet = 2.0 * float(np.sum(np.log(np.abs(np.diag(Lc)))))
    tr = float(np.sum(pre.Kxy_inv.T * Kxv).real)
    return -(logdet - pre.logdet_xy) + tr


def joint_xv(K: JointChannelCovariance, params: AttackParameters) -> np.ndarray:
    """Covariance of [x; v], the upper-left 2n x 2n corner of the assembled joint."""
    return _kxv(_pre(K), params.Z, params.C)


def cost_J(K: JointChannelCovariance, params: AttackParameters) -> float:
    """-log det(Kxv Kxy^-1) + tr(Kxy^-1 Kxv); +inf when Kxv is singular."""
    pre = _pre(K)
    return _cost_of_kxv(pre, _kxv(pre, params.Z, params.C))


def divergence_D(K: JointChannelCovariance, params: AttackParameters) -> float:
    return cost_J(K, params) - 2 * K.n


def cost_J_relaxed(K: JointChannelCovariance, Z, X) -> float:
    """Cost in the (Z, X) parametrization used by the relaxed problem."""
    pre = _pre(K)
    return _cost_of_kxv(pre, _kxv_zx(pre, np.asarray(Z, dtype=complex), np.asarray(X, dtype=complex)))


def cost_J_batch(K: JointChannelCovariance, Zs: np.ndarray, Cs: np.ndarray) -> np.ndarray:
    """Vectorized cost over stacks Zs (b, n, m) and Cs (b, n, n).

    Uses log det Kxv = log det Kxx + log det(X - Y* Kxx^-1 Y), so only an
    n x n factorization per item is needed, in real arithmetic when possible.
    """
    pre = _pre(K)
    real = K.is_real and not (np.iscomplexobj(Zs) and np.any(np.imag(Zs))) \
        and not (np.iscomplexobj(Cs) and np.any(np.imag(Cs)))
    dt = float if real else complex
    Zs = np.asarray(Zs.real if real and np.iscomplexobj(Zs) else Zs, dtype=dt)
    Cs = np.asarray(Cs.real if real and np.iscomplexobj(Cs) else Cs, dtype=dt)
    c = pre.cast(dt)
    b, n = Zs.shape[0], pre.n
    ZH = np.conj(np.swapaxes(Zs, 1, 2))
    Y = c["L"] @ ZH
    YH = np.conj(np.swapaxes(Y, 1, 2))
    X = Zs @ c["Kzz_inv"] @ ZH + Cs @ np.conj(np.swapaxes(Cs, 1, 2))
    S = X - YH @ c["Kxx_inv"] @ Y
    S = 0.5 * (S + np.conj(np.swapaxes(S, 1, 2)))
    Q = c["Kxy_inv"]
    tr = (pre.tr_xx + np.einsum("ij,bji->b", Q[:n, n:], YH) + np.einsum("ij,bji->b", Q[n:, :n], Y)
          + np.einsum("ij,bji->b", Q[n:, n:], X)).real
    try:
        Lc = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        Ls = []
        for Si in S:
            try:
                Ls.append(np.linalg.cholesky(Si))
            except np.linalg.LinAlgError:
                Ls.append(None)
        out = np.full(b, math.inf)
        for i, Li in enumerate(Ls):
            if Li is not None:
                logdet = pre.logdet_xx + 2.0 * np.sum(np.log(np.abs(np.diag(Li))))
                out[i] = -(logdet - pre.logdet_xy) + tr[i]
        return out
    logdet = pre.logdet_xx + 2.0 * np.sum(np.log(np.abs(np.diagonal(Lc, axis1=1, axis2=2))), axis=1)
    return -(logdet - pre.logdet_xy) + tr


def _delta(pre: _Pre, Z, C):
    Kxv = _kxv(pre, Z, C)
    try:
        np.linalg.cholesky(Kxv)
    except np.linalg.LinAlgError:
        return None
    return pre.Kxy_inv - hermitian_part(np.linalg.inv(Kxv))


def gradient(K: JointChannelCovariance, params: AttackParameters):
    """Gradient of J packed as complex matrices (real part: d/dRe, imaginary part: d/dIm)."""
    pre = _pre(K)
    n = pre.n
    D = _delta(pre, params.Z, params.C)
    if D is None:
        raise SolverPreconditionError("K_[x;v] is not positive definite")
    G = _H(pre.L) @ D[:n, n:] + pre.Kzz_inv @ _H(params.Z) @ D[n:, n:]
    return 2.0 * _H(G), 2.0 * D[n:, n:] @ params.C


def stationarity_residual(K: JointChannelCovariance, params: AttackParameters) -> float:
    """Normalized violation of the first-order conditions

        (Kxz Kzz^-1)* D12 + Kzz^-1 Z* D22 = 0,     C* D22 = 0,

    where D = Kxy^-1 - Kxv^-1. Returns +inf when Kxv is singular.
    """
    pre = _pre(K)
    n = pre.n
    D = _delta(pre, params.Z, params.C)
    if D is None:
        return math.inf
    D12, D22 = D[:n, n:], D[n:, n:]
    t1 = _H(pre.L) @ D12
    t2 = pre.Kzz_inv @ _H(params.Z) @ D22
    nrm = np.linalg.norm
    r1 = nrm(t1 + t2) / (1.0 + nrm(t1) + nrm(t2))
    r2 = nrm(_H(params.C) @ D22) / (1.0 + nrm(params.C) * nrm(D22))
    return float(max(r1, r2))


def _inner(pre: _Pre, Z, C):
    ZK = Z @ pre.Kzz_inv
    return hermitian_part(ZK @ pre.B @ _H(ZK) + C @ _H(C))


def fixed_point_residual(K: JointChannelCovariance, params: AttackParameters) -> float:
    """Normalized violation of the coupled matrix equations

        C* = C* M^-1 A,    Z* = Kzx Kxx^-1 Kxy + B Kzz^-1 Z* M^-1 A,

    with M = Z Kzz^-1 B Kzz^-1 Z* + C C*.
    """
    pre = _pre(K)
    Z, C = params.Z, params.C
    M = _inner(pre, Z, C)
    if np.linalg.eigvalsh(M)[0] <= 0:
        return math.inf
    MA = np.linalg.solve(M, pre.A)
    nrm = np.linalg.norm
    rc = nrm(_H(C) - _H(C) @ MA) / (1.0 + nrm(C) * (1.0 + nrm(MA)))
    t = pre.B @ pre.Kzz_inv @ _H(Z) @ MA
    rz = nrm(_H(Z) - pre.P0 - t) / (1.0 + nrm(Z) + nrm(pre.P0) + nrm(t))
    return float(max(rc, rz))


def solve_relaxed(K: JointChannelCovariance):
    """Closed-form minimizer of J over (Z, X) ignoring positivity.

    Z = Kxy* Kxx^-1 Kxz G^+ Kzz and X = Kyy - Kxy* R (I - P) R Kxy, with
    G = Kxz* Kxx^-1 Kxz, R = Kxx^-1/2 and P = R Kxz G^+ Kxz* R.
    """
    pre = _pre(K)
    G = hermitian_part(_H(K.Kxz) @ pre.Kxx_inv @ K.Kxz)
    G_pinv = np.linalg.pinv(G, rcond=PINV_RCOND, hermitian=True)
    Z = _H(K.Kxy) @ pre.Kxx_inv @ K.Kxz @ G_pinv @ K.Kzz
    w, V = np.linalg.eigh(hermitian_part(K.Kxx))
    R = (V * w ** -0.5) @ _H(V)
    P = R @ K.Kxz @ G_pinv @ _H(K.Kxz) @ R
    X = K.Kyy - _H(K.Kxy) @ R @ (np.eye(K.n) - P) @ R @ K.Kxy
    return Z, hermitian_part(X)


def schur_defect(K: JointChannelCovariance, Z, X) -> np.ndarray:
    """X - Z Kzz^-1 Z*, which must be PSD for a genuine joint covariance."""
    pre = _pre(K)
    return hermitian_part(X - Z @ pre.Kzz_inv @ _H(Z))


def is_feasible(K: JointChannelCovariance, Z, X) -> bool:
    return bool(np.linalg.eigvalsh(schur_defect(K, Z, X))[0] >= -tol_psd(K))


def _psd_sqrt(S: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(S))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ _H(V)


@dataclass(frozen=True, eq=False)
class Projection:
    params: AttackParameters
    epsilon: float
    clipped: int
    fallback: bool


def project_to_feasible(K: JointChannelCovariance, Z, X) -> Projection:
    """Clip the spectrum of X - Z Kzz^-1 Z* to make the joint matrix positive.

    Nonpositive eigenvalues are replaced by eps = d_k / 100 where d_k is the
    smallest positive eigenvalue. With no positive eigenvalue at all,
    eps = 1e-2 * max(1, mean diagonal of X) is used and ``fallback`` is set.
    C is the Hermitian square root of the clipped matrix.
    """
    S = schur_defect(K, Z, X)
    w, T = np.linalg.eigh(S)
    pos = w[w > 0]
    fallback = pos.size == 0
    if fallback:
        eps = 1e-2 * max(1.0, float(np.mean(np.diag(X).real)))
        logger.info("projection: no positive eigenvalue, fallback eps=%g", eps)
    else:
        eps = float(pos.min()) / CLIP_FACTOR
    clipped = int(np.sum(w <= 0))
    w_new = np.where(w > 0, w, eps)
    C = (T * np.sqrt(w_new)) @ _H(T)
    return Projection(AttackParameters(np.array(Z, dtype=complex), C), eps, clipped, fallback)


@dataclass
class FixedPointResult:
    params: AttackParameters
    history: list
    iterations: int
    converged: bool
    regularized: bool
    non_monotone: bool


def iterate_fixed_point(K: JointChannelCovariance, init: AttackParameters,
                        max_iter: int = MAX_ITER, rel_tol: float = REL_TOL) -> FixedPointResult:
    """Run the coupled updates

        C*(k+1) = C*(k) M_k^-1 A
        Z*(k+1) = Kzx Kxx^-1 Kxy + B Kzz^-1 Z*(k) M_k^-1 A

    with M_k = Z Kzz^-1 B Kzz^-1 Z* + C C*, until the change in D over one
    step is at most rel_tol * max(1, |D|). ``history[0]`` is D at the start.
    """
    pre = _pre(K)
    n = pre.n
    Z, C = init.Z.copy(), init.C.copy()
    d_prev = cost_J(K, init) - 2 * n
    if not math.isfinite(d_prev):
        raise NumericalDivergenceError("initial point has singular K_[x;v]", (Z, C), [d_prev])
    history = [d_prev]
    converged = regularized = non_monotone = False
    it = 0
    for it in range(1, max_iter + 1):
        M = _inner(pre, Z, C)
        trace = float(np.trace(M).real)
        if np.linalg.eigvalsh(M)[0] < pre.tol * trace:
            M = M + pre.tol * trace * np.eye(n)
            regularized = True
        MA = np.linalg.solve(M, pre.A)
        C_new = _H(MA) @ C
        Z_new = _H(pre.P0) + _H(MA) @ Z @ pre.Kzz_inv @ pre.B
        d = cost_J(K, AttackParameters(Z_new, C_new)) - 2 * n
        if not (math.isfinite(d) and np.all(np.isfinite(Z_new)) and np.all(np.isfinite(C_new))):
            raise NumericalDivergenceError(
                f"non-finite iterate at step {it}", (Z, C), history
            )
        Z, C = Z_new, C_new
        history.append(d)
        if d > d_prev + 1e-12 * max(1.0, abs(d_prev)):
            non_monotone = True
        if abs(d - d_prev) <= rel_tol * max(1.0, abs(d_prev)):
            converged = True
            break
        d_prev = d
    if regularized:
        logger.info("fixed point: inner matrix regularized at least once")
    return FixedPointResult(AttackParameters(Z, C), history, it, converged, regularized, non_monotone)


def _pack(params: AttackParameters, real: bool) -> np.ndarray:
    parts = [params.Z.real.ravel(), params.C.real.ravel()]
    if not real:
        parts += [params.Z.imag.ravel(), params.C.imag.ravel()]
    return np.concatenate(parts)


def _unpack(p: np.ndarray, n: int, m: int, real: bool) -> AttackParameters:
    nz, nc = n * m, n * n
    Z = p[:nz].reshape(n, m).astype(complex)
    C = p[nz:nz + nc].reshape(n, n).astype(complex)
    if not real:
        Z = Z + 1j * p[nz + nc:2 * nz + nc].reshape(n, m)
        C = C + 1j * p[2 * nz + nc:].reshape(n, n)
    return AttackParameters(Z, C)


def _lbfgs(K: JointChannelCovariance, params: AttackParameters, real: bool, maxiter: int):
    n, m = K.n, K.m

    def fun(p):
        q = _unpack(p, n, m, real)
        J = cost_J(K, q)
        if not math.isfinite(J):
            return 1e300, np.zeros_like(p)
        gZ, gC = gradient(K, q)
        g = _pack(AttackParameters(gZ, gC), real)
        return J, g

    res = minimize(fun, _pack(params, real), jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "maxcor": 30, "ftol": 0.0, "gtol": 0.0,
                            "maxfun": 4 * maxiter})
    return _unpack(res.x, n, m, real), res


def _grad_vec(K, p, n, m, real):
    q = _unpack(p, n, m, real)
    gZ, gC = gradient(K, q)
    return _pack(AttackParameters(gZ, gC), real)


def _newton_cg(K: JointChannelCovariance, params: AttackParameters, real: bool,
               steps: int = 8, cg_iter: int = 250) -> AttackParameters:
    """Newton steps on grad J = 0 with Hessian-vector products from central
    differences of the analytic gradient. Steps are accepted when they reduce
    the gradient norm without raising J beyond rounding.
    """
    n, m = K.n, K.m
    x = _pack(params, real)
    g = _grad_vec(K, x, n, m, real)
    J = cost_J(K, params)
    for _ in range(steps):
        gnorm = np.linalg.norm(g)
        if gnorm == 0:
            break
        scale = max(1.0, np.linalg.norm(x))
        eps = 1e-6 * scale

        def hv(v):
            nv = np.linalg.norm(v)
            if nv == 0:
                return np.zeros_like(v)
            u = v / nv
            return nv * (_grad_vec(K, x + eps * u, n, m, real)
                         - _grad_vec(K, x - eps * u, n, m, real)) / (2 * eps)

        # conjugate gradients on H p = -g, stopped on negative curvature
        p = np.zeros_like(x)
        r = -g
        d = r.copy()
        rr = r @ r
        for _k in range(cg_iter):
            Hd = hv(d)
            curv = d @ Hd
            if curv <= 0:
                if not p.any():
                    p = -g * (1e-3 * scale / gnorm)
                break
            a = rr / curv
            p = p + a * d
            r = r - a * Hd
            rr_new = r @ r
            if np.sqrt(rr_new) <= 1e-4 * gnorm:
                break
            d = r + (rr_new / rr) * d
            rr = rr_new
        accepted = False
        for t in (1.0, 0.5, 0.25, 0.125):
            x_new = x + t * p
            q = _unpack(x_new, n, m, real)
            J_new = cost_J(K, q)
            if not math.isfinite(J_new):
                continue
            g_new = _grad_vec(K, x_new, n, m, real)
            if np.linalg.norm(g_new) < gnorm and J_new <= J + 1e-12 * max(1.0, abs(J)):
                x, g, J = x_new, g_new, J_new
                accepted = True
                break
        if not accepted:
            break
    return _unpack(x, n, m, real)


def refine(K: JointChannelCovariance, params: AttackParameters, maxiter: int = 5000,
           rank_tol: float = 1e-5) -> AttackParameters:
    """Minimize J from ``params`` with L-BFGS, drop negligible singular values
    of C, and finish with Newton-CG steps on the gradient.

    At a boundary optimum C is rank deficient; driving its small singular
    values to exactly zero removes the slow directions left by the
    multiplicative C update.
    """
    real = K.is_real and params.is_real()
    best, best_J = params, cost_J(K, params)
    for _ in range(2):
        cand, _res = _lbfgs(K, best, real, maxiter)
        J = cost_J(K, cand)
        if J <= best_J:
            best, best_J = cand, J
        U, s, Vh = np.linalg.svd(best.C)
        if s.size == 0 or s[0] == 0:
            break
        small = s < rank_tol * s[0]
        if not small.any():
            break
        s_trunc = np.where(small, 0.0, s)
        cand = AttackParameters(best.Z, (U * s_trunc) @ Vh)
        J = cost_J(K, cand)
        if J <= best_J + 1e-13 * max(1.0, abs(best_J)):
            best, best_J = cand, J
        else:
            break
    return _newton_cg(K, best, real)


def solve(K: JointChannelCovariance, max_iter: int = MAX_ITER, rel_tol: float = REL_TOL,
          refine_solution: bool = True) -> AttackSolution:
    """Relaxed closed form, feasibility check, projection, fixed-point iteration, refinement."""
    n = K.n
    Z, X = solve_relaxed(K)
    j_cf = cost_J_relaxed(K, Z, X)
    feasible = is_feasible(K, Z, X)
    if feasible:
        params = AttackParameters(Z, _psd_sqrt(schur_defect(K, Z, X)))
        fp = FixedPointResult(params, [cost_J(K, params) - 2 * n], 0, True, False, False)
        projection = None
    else:
        projection = project_to_feasible(K, Z, X)
        fp = iterate_fixed_point(K, projection.params, max_iter=max_iter, rel_tol=rel_tol)
        params = fp.params
    refined = False
    if refine_solution and not feasible:
        params = refine(K, params)
        refined = True
    # a feasible relaxed optimum is returned as is: same covariance, same cost
    j = j_cf if feasible else cost_J(K, params)
    d = j - 2 * n
    if -TOL_ROOT <= d < 0:
        d, j = 0.0, float(2 * n)
    resid = stationarity_residual(K, params)
    return AttackSolution(
        params=params,
        j_star=j,
        d_star=d,
        iterations=fp.iterations,
        converged=bool(resid <= TOL_STAT),
        stationarity_residual=resid,
        history=list(fp.history),
        fixed_point_converged=fp.converged,
        fixed_point_residual=fixed_point_residual(K, params),
        projected=projection is not None,
        projection_fallback=bool(projection and projection.fallback),
        relaxed_feasible=feasible,
        j_cf=j_cf,
        regularized=fp.regularized,
        non_monotone=fp.non_monotone,
        refined=refined,
        n=n,
    )


def solution_from_params(K: JointChannelCovariance, params: AttackParameters, **kw) -> AttackSolution:
    """Wrap arbitrary parameters (e.g. a truncated run) as a solution record."""
    j = cost_J(K, params)
    fields = dict(params=params, j_star=j, d_star=j - 2 * K.n, iterations=0, converged=False,
                  stationarity_residual=stationarity_residual(K, params), n=K.n)
    fields.update(kw)
    return AttackSolution(**fields)


def assemble_joint(K: JointChannelCovariance, params: AttackParameters) -> np.ndarray:
    """Covariance of [x; v; z] induced by the attack parameters."""
    pre = _pre(K)
    Y = pre.L @ _H(params.Z)
    X = params.X(K)
    return np.block([
        [K.Kxx, Y, K.Kxz],
        [_H(Y), X, params.Z],
        [_H(K.Kxz), _H(params.Z), K.Kzz],
    ])


def extract_strategy(K: JointChannelCovariance, params: AttackParameters) -> AttackStrategy:
    pre = _pre(K)
    return AttackStrategy(params.Z @ pre.Kzz_inv, hermitian_part(params.cond_cov))


@dataclass(frozen=True)
class PerturbationReport:
    j_star: float
    min_J_found: float
    improved: bool
    deltas: np.ndarray

    @property
    def max_improvement(self) -> float:
        return max(0.0, self.j_star - self.min_J_found)


def perturb_and_check(K: JointChannelCovariance, solution: AttackSolution, scale: float = 0.01,
                      trials: int = 100, seed: int = 0, tol: float = TOL_ROOT,
                      batch: int = 250) -> PerturbationReport:
    """Evaluate J at (Z + dZ, C + dC) for random Gaussian directions with
    ||dZ|| = scale ||Z|| and ||dC|| = scale ||C|| (Frobenius).

    Perturbations are real when both K and the solution are real.
    """
    rng = np.random.default_rng(seed)
    Z, C = solution.params.Z, solution.params.C
    real = K.is_real and solution.params.is_real()
    j_star = cost_J(K, solution.params)

    def draw(shape, target):
        g = rng.standard_normal((trials,) + shape)
        if not real:
            g = g + 1j * rng.standard_normal((trials,) + shape)
        norms = np.linalg.norm(g.reshape(trials, -1), axis=1)
        norms[norms == 0] = 1.0
        return g * (target / norms)[:, None, None]

    dZ = draw(Z.shape, scale * np.linalg.norm(Z))
    dC = draw(C.shape, scale * np.linalg.norm(C))
    J = np.concatenate([
        cost_J_batch(K, Z[None] + dZ[i:i + batch], C[None] + dC[i:i + batch])
        for i in range(0, trials, batch)
    ]) if trials else np.empty(0)
    deltas = J - j_star
    min_J = float(np.min(J)) if trials else j_star
    return PerturbationReport(j_star, min_J, bool(np.any(J < j_star - tol)), deltas)

