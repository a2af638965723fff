"""Output-error models linking the parameter error to the measured error.

Two models are provided. The algebraic one returns e_y = (theta - theta*)^T phi
directly. The dynamic one filters theta_err^T phi_hat through a strictly
positive real (SPR) state-space system

    e_dot = A e + b theta_err^T phi_hat + b theta*^T phi_tilde,   e_y = c e,

where phi_hat = phi + phi_tilde and the filter error phi_tilde decays through
a Hurwitz Lambda (phi_tilde_dot = Lambda phi_tilde). SPR of W(s) = c (sI-A)^-1 b
is certified by matrices P, Q with

    A^T P + P A = -Q,   P b = c^T,   P, Q symmetric positive definite,

which is what makes the gradient-like update law stable for this model. The
certificate is found numerically: Hurwitz eigenvalue check, a positive-realness
sweep of Re W(j omega) on a log frequency grid, then a least-squares solve of
the vectorized Lyapunov equation under the hard constraint P b = c^T.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .exceptions import NotSPRError, NotStableError

LYAP_RESIDUAL_TOL = 1e-8


@dataclass
class SPRCertificate:
    """KYP certificate (P, Q) for (A, b, c) plus (P_bar, Q_bar) for Lambda."""

    P: np.ndarray
    Q: np.ndarray
    P_bar: np.ndarray = None
    Q_bar: np.ndarray = None


class AlgebraicErrorModel:
    """Static regression error: e_y = (theta - theta_star)^T phi."""

    def __init__(self, theta_star):
        self.theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
        if not np.all(np.isfinite(self.theta_star)):
            raise ValueError("theta_star must be finite")

    @property
    def dim(self):
        return self.theta_star.size

    def output(self, theta, phi):
        return algebraic_output(theta, self, phi)


def algebraic_output(theta, model, phi):
    """Measured output error of the algebraic model."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.shape != model.theta_star.shape or phi.shape != theta.shape:
        raise ValueError(
            f"dimension mismatch: theta {theta.shape}, "
            f"theta_star {model.theta_star.shape}, phi {phi.shape}")
    return float((theta - model.theta_star) @ phi)


def _hurwitz_margin(M):
    return float(np.max(np.real(np.linalg.eigvals(M))))


def _warn_if_not_minimal(A, b, c):
    n = A.shape[0]
    ctrl = np.column_stack([np.linalg.matrix_power(A, k) @ b for k in range(n)])
    obs = np.vstack([c @ np.linalg.matrix_power(A, k) for k in range(n)])
    if np.linalg.matrix_rank(ctrl) < n:
        warnings.warn("(A, b) is not controllable; KYP certificate may not exist",
                      stacklevel=3)
    if np.linalg.matrix_rank(obs) < n:
        warnings.warn("(A, c) is not observable; KYP certificate may not exist",
                      stacklevel=3)


def _symmetric_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            E[j, i] = 1.0
            basis.append(E)
    return basis


def _solve_kyp(A, b, c, pd_tol):
    """Least-squares KYP solve: find symmetric P with P b = c^T and
    -(A^T P + P A) positive definite. Returns (P, Q) or None."""
    n = A.shape[0]
    basis = _symmetric_basis(n)
    m = len(basis)
    L_lyap = np.column_stack([(A.T @ E + E @ A).ravel() for E in basis])
    L_b = np.column_stack([E @ b for E in basis])

    x0, residual, *_ = np.linalg.lstsq(L_b, c, rcond=None)
    if np.linalg.norm(L_b @ x0 - c) > 1e-9 * max(1.0, np.linalg.norm(c)):
        return None
    Z = scipy.linalg.null_space(L_b)

    def assemble(x):
        P = sum(x[k] * basis[k] for k in range(m))
        Q = -(A.T @ P + P @ A)
        return P, 0.5 * (Q + Q.T)

    best = None
    if Z.shape[1] == 0:
        candidates = [x0]
    else:
        candidates = []
        base_rhs = L_lyap @ x0
        LZ = L_lyap @ Z
        for rho in np.logspace(-3, 3, 13):
            target = -(rho * np.eye(n)).ravel() - base_rhs
            y, *_ = np.linalg.lstsq(LZ, target, rcond=None)
            candidates.append(x0 + Z @ y)

    for x in candidates:
        P, Q = assemble(x)
        lam_q = float(np.min(np.linalg.eigvalsh(Q)))
        if best is None or lam_q > best[0]:
            best = (lam_q, P, Q)
        if lam_q > pd_tol:
            return P, Q

    if Z.shape[1] > 0:
        # lambda_min(Q) is concave on the affine family; refine from the best
        # least-squares point with a derivative-free search
        x_best = None

        def neg_min_eig(y):
            _, Q = assemble(x0 + Z @ y)
            return -float(np.min(np.linalg.eigvalsh(Q)))

        y0 = np.zeros(Z.shape[1])
        res = scipy.optimize.minimize(neg_min_eig, y0, method="Nelder-Mead",
                                      options={"maxiter": 2000, "xatol": 1e-12,
                                               "fatol": 1e-14})
        x_best = x0 + Z @ res.x
        P, Q = assemble(x_best)
        if float(np.min(np.linalg.eigvalsh(Q))) > pd_tol:
            return P, Q
    return None


def lyapunov_pair(lam, q_bar=None):
    """Solve Lambda^T P_bar + P_bar Lambda = -Q_bar for Hurwitz Lambda.

    Q_bar defaults to the identity.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if _hurwitz_margin(lam) >= 0:
        raise NotStableError("Lambda is not Hurwitz")
    if q_bar is None:
        q_bar = np.eye(lam.shape[0])
    q_bar = np.asarray(q_bar, dtype=float)
    p_bar = scipy.linalg.solve_continuous_lyapunov(lam.T, -q_bar)
    return 0.5 * (p_bar + p_bar.T), q_bar


def check_spr(A, b, c, lam=None, n_freq=200, freq_range=(1e-3, 1e3),
              realness_tol=1e-9, pd_tol=1e-10):
    """Certify strict positive realness of W(s) = c (sI - A)^-1 b.

    Raises NotStableError when A has an eigenvalue with nonnegative real
    part, NotSPRError when the frequency sweep finds Re W(j omega) at or
    below `realness_tol` or when no KYP certificate can be assembled.
    When `lam` is given, the returned certificate also carries the Lyapunov
    pair (P_bar, Q_bar) for it.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    n = A.shape[0]
    if A.shape != (n, n) or b.size != n or c.size != n:
        raise ValueError("A must be n x n with b, c of length n")

    if _hurwitz_margin(A) >= 0:
        raise NotStableError("A is not Hurwitz")
    _warn_if_not_minimal(A, b, c)

    omegas = np.logspace(np.log10(freq_range[0]), np.log10(freq_range[1]), n_freq)
    eye = np.eye(n)
    re_w = np.array([
        np.real(c @ np.linalg.solve(1j * w * eye - A, b)) for w in omegas
    ])
    if np.min(re_w) <= realness_tol:
        w_bad = omegas[int(np.argmin(re_w))]
        raise NotSPRError(
            f"Re W(j omega) = {np.min(re_w):.3e} at omega = {w_bad:.3e}")

    solved = _solve_kyp(A, b, c, pd_tol)
    if solved is None:
        raise NotSPRError("no positive definite KYP pair (P, Q) found")
    P, Q = solved

    if np.linalg.norm(A.T @ P + P @ A + Q) > LYAP_RESIDUAL_TOL:
        raise NotSPRError("KYP Lyapunov residual above tolerance")
    if np.linalg.norm(P @ b - c) > LYAP_RESIDUAL_TOL:
        raise NotSPRError("KYP constraint P b = c^T violated")
    if float(np.min(np.linalg.eigvalsh(P))) <= 0:
        raise NotSPRError("KYP solution P is not positive definite")

    p_bar = q_bar = None
    if lam is not None:
        p_bar, q_bar = lyapunov_pair(lam)
    return SPRCertificate(P=P, Q=Q, P_bar=p_bar, Q_bar=q_bar)


class DynamicErrorModel:
    """SPR state-space error model with a decaying filtered regressor.

    State is (e, phi_tilde); the owning simulation loop integrates it and
    writes it back after each step. phi_tilde(0) defaults to zero (the
    filtered regressor starts aligned with the true one).
    """

    def __init__(self, A, b, c, lam, theta_star, e0=None, phi_tilde0=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
        self.c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
        self.lam = np.atleast_2d(np.asarray(lam, dtype=float))
        self.theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))

        if _hurwitz_margin(self.lam) >= 0:
            raise NotStableError("Lambda is not Hurwitz")
        self.cert = check_spr(self.A, self.b, self.c, lam=self.lam)

        n = self.A.shape[0]
        N = self.theta_star.size
        if self.lam.shape != (N, N):
            raise ValueError("Lambda must be N x N for an N-dim regressor")
        self.e = np.zeros(n) if e0 is None else np.asarray(e0, dtype=float).ravel()
        self.phi_tilde = (np.zeros(N) if phi_tilde0 is None
                          else np.asarray(phi_tilde0, dtype=float).ravel())
        if self.e.size != n or self.phi_tilde.size != N:
            raise ValueError("e0 / phi_tilde0 sizes do not match (A, Lambda)")

    @property
    def dim(self):
        return self.theta_star.size

    @property
    def state_dim(self):
        return self.A.shape[0] + self.theta_star.size

    def alpha_bound(self):
        """Floor on the Lyapunov weight of the phi_tilde term.

        Above 4 ||P b||^2 ||theta*||^2 / (min eig Q * min eig Q_bar) the
        decaying cross term cannot flip the sign of the derivative.
        """
        pb = self.cert.P @ self.b
        num = 4.0 * float(pb @ pb) * float(self.theta_star @ self.theta_star)
        den = (np.min(np.linalg.eigvalsh(self.cert.Q))
               * np.min(np.linalg.eigvalsh(self.cert.Q_bar)))
        return num / den

    def alpha_default(self):
        """Twice the bound, or 1.0 when the bound degenerates to zero."""
        bound = self.alpha_bound()
        return 2.0 * bound if bound > 0 else 1.0

    def output(self, e=None):
        e = self.e if e is None else e
        return float(self.c @ e)

    def delta(self, e=None, phi_tilde=None):
        """Cross term 2 e^T P b theta*^T phi_tilde (decays exponentially)."""
        e = self.e if e is None else e
        phi_tilde = self.phi_tilde if phi_tilde is None else phi_tilde
        return 2.0 * float(e @ (self.cert.P @ self.b)) * float(
            self.theta_star @ phi_tilde)


def dynamic_derivatives(model, theta, phi, e=None, phi_tilde=None):
    """State derivatives and output of the dynamic model.

    Returns (e_dot, phi_tilde_dot, e_y) evaluated at the given state
    (defaults to the state stored on the model).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    e = model.e if e is None else np.asarray(e, dtype=float)
    phi_tilde = (model.phi_tilde if phi_tilde is None
                 else np.asarray(phi_tilde, dtype=float))
    if theta.size != model.dim or phi.size != model.dim:
        raise ValueError("theta / phi dimension mismatch")

    theta_err = theta - model.theta_star
    phi_hat = phi + phi_tilde
    e_dot = (model.A @ e + model.b * float(theta_err @ phi_hat)
             + model.b * float(model.theta_star @ phi_tilde))
    phi_tilde_dot = model.lam @ phi_tilde
    return e_dot, phi_tilde_dot, float(model.c @ e)
