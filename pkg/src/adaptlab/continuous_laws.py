"""Continuous-time parameter update laws.

Every law only evaluates derivatives; integration is owned by the
simulation engine so all laws share one fixed-step RK4 integrator. A law
object carries its hyperparameters plus the layout of any auxiliary state
(gain matrix, filter stage) packed into a flat vector:

    theta_dot, aux_dot = law.rates(t, theta, aux, grad, phi, e_y)

`grad` is the loss gradient already evaluated by the engine, `phi` the
regressor the law sees. Laws with auxiliary state expose ``aux0`` /
``aux_dim`` and may post-process the aux vector after each integrator step
(``post_step``), e.g. to re-symmetrize a gain matrix.

Defaults follow the shipped presets: gain=1, sigma=0.1, beta=1, mu=1,
forgetting=0.
"""

import numpy as np

from .signals import normalizing_signal

_EMPTY = np.zeros(0)


def gradient_flow(gain, grad):
    """Plain gradient flow theta_dot = -gain * grad."""
    if gain <= 0:
        raise ValueError("gain must be > 0")
    return -gain * np.asarray(grad, dtype=float)


def sigma_e_modification(gain, sigma, kind, grad, theta, e_y):
    """Leaky gradient flow theta_dot = -gain * (grad + sigma * G).

    kind 'sigma' uses G = theta; kind 'e-mod' uses G = |e_y| * theta, so the
    leakage fades as the output error does.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    theta = np.asarray(theta, dtype=float)
    if kind == "sigma":
        extra = theta
    elif kind == "e-mod":
        extra = abs(e_y) * theta
    else:
        raise ValueError(f"unknown modification kind {kind!r}")
    return -gain * (np.asarray(grad, dtype=float) + sigma * extra)


def deadzone(gain, d0, eps, grad, e_y):
    """Gradient flow frozen while |e_y| <= d0 + eps (boundary inclusive)."""
    if d0 < 0 or eps <= 0:
        raise ValueError("deadzone requires d0 >= 0 and eps > 0")
    grad = np.asarray(grad, dtype=float)
    if abs(e_y) > d0 + eps:
        return -gain * grad
    return np.zeros_like(grad)


def proj_operator(theta_i, zeta_i, theta_max, theta_inner):
    """Smooth projection of a proposed velocity, coordinatewise.

    Inside the boundary layer theta_inner <= |theta_i| <= theta_max and for
    outward motion (theta_i * zeta_i > 0) the velocity is scaled by
    (theta_max^2 - theta_i^2) / (theta_max^2 - theta_inner^2), reaching 0 at
    the outer boundary; inward motion passes through unchanged. `zeta_i` is
    the proposed velocity (for a gradient law, -gain * grad).
    """
    theta_i = np.asarray(theta_i, dtype=float)
    zeta_i = np.asarray(zeta_i, dtype=float)
    theta_max = np.asarray(theta_max, dtype=float)
    theta_inner = np.asarray(theta_inner, dtype=float)
    if np.any(theta_inner <= 0) or np.any(theta_inner >= theta_max):
        raise ValueError("projection bounds require 0 < theta_inner < theta_max")
    scale = (theta_max**2 - theta_i**2) / (theta_max**2 - theta_inner**2)
    attenuate = (np.abs(theta_i) >= theta_inner) & (theta_i * zeta_i > 0)
    return np.where(attenuate, scale * zeta_i, zeta_i)


def time_varying_gain(gain, forgetting, mu, gamma_max, Gamma, phi, grad):
    """Matrix-gain law theta_dot = -gain * Gamma * grad with Gamma dynamics.

    Gamma_dot = forgetting * Gamma - Gamma phi phi^T Gamma / N(t) while
    ||Gamma||_F <= gamma_max, else 0, with N(t) = 1 + mu phi^T phi.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta_dot = -gain * (Gamma @ np.asarray(grad, dtype=float))
    if np.linalg.norm(Gamma, "fro") <= gamma_max:
        gp = Gamma @ phi
        gamma_dot = forgetting * Gamma - np.outer(gp, gp) / normalizing_signal(phi, mu)
    else:
        gamma_dot = np.zeros_like(Gamma)
    return theta_dot, gamma_dot


def higher_order_tuner(gain, beta, mu, theta, vartheta, grad, phi):
    """Two-stage tuner: vartheta integrates the gradient, theta chases it.

    vartheta_dot = -gain * grad
    theta_dot    = -beta * (theta - vartheta) * N(t),  N = 1 + mu phi^T phi

    The regressor-based normalization is what keeps the filter stage stable
    when phi varies in time.
    """
    if beta <= 0 or mu < 0:
        raise ValueError("higher-order tuner requires beta > 0 and mu >= 0")
    vartheta_dot = -gain * np.asarray(grad, dtype=float)
    norm = normalizing_signal(phi, mu)
    theta_dot = -beta * (np.asarray(theta, dtype=float) - vartheta) * norm
    return theta_dot, vartheta_dot


class ContinuousLaw:
    """Shared derivative-evaluation contract; laws are per-run objects."""

    kind = None
    aux_dim = 0

    def aux0(self, theta0):
        return _EMPTY

    def aux_columns(self):
        return []

    def aux_log(self, aux):
        return []

    def post_step(self, aux):
        return aux

    def rates(self, t, theta, aux, grad, phi, e_y):
        raise NotImplementedError


class GradientFlow(ContinuousLaw):
    kind = "gradient-flow"

    def __init__(self, gain=1.0):
        if gain <= 0:
            raise ValueError("gain must be > 0")
        self.gain = float(gain)

    def rates(self, t, theta, aux, grad, phi, e_y):
        return -self.gain * grad, _EMPTY


class SigmaModification(ContinuousLaw):
    """Sigma- or e-modification leakage on top of gradient flow."""

    def __init__(self, gain=1.0, sigma=0.1, mod_kind="sigma"):
        self.gain = float(gain)
        self.sigma = float(sigma)
        if mod_kind not in ("sigma", "e-mod"):
            raise ValueError(f"unknown modification kind {mod_kind!r}")
        self.mod_kind = mod_kind
        self.kind = "sigma-mod" if mod_kind == "sigma" else "e-mod"

    def rates(self, t, theta, aux, grad, phi, e_y):
        return sigma_e_modification(self.gain, self.sigma, self.mod_kind,
                                    grad, theta, e_y), _EMPTY


class Deadzone(ContinuousLaw):
    kind = "deadzone"

    def __init__(self, gain=1.0, d0=0.1, eps=0.01):
        if d0 < 0 or eps <= 0:
            raise ValueError("deadzone requires d0 >= 0 and eps > 0")
        self.gain = float(gain)
        self.d0 = float(d0)
        self.eps = float(eps)

    def rates(self, t, theta, aux, grad, phi, e_y):
        return deadzone(self.gain, self.d0, self.eps, grad, e_y), _EMPTY


class ProjectionLaw(ContinuousLaw):
    """Gradient flow through the smooth projection operator (coordinatewise
    bounds |theta_i| <= theta_max_i with boundary layer from theta_inner_i)."""

    kind = "projection"

    def __init__(self, gain=1.0, theta_max=None, theta_inner=None):
        self.gain = float(gain)
        self.theta_max = np.atleast_1d(np.asarray(theta_max, dtype=float))
        self.theta_inner = np.atleast_1d(np.asarray(theta_inner, dtype=float))
        if np.any(self.theta_inner <= 0) or np.any(self.theta_inner >= self.theta_max):
            raise ValueError("projection bounds require 0 < theta_inner < theta_max")

    def rates(self, t, theta, aux, grad, phi, e_y):
        proposed = -self.gain * grad
        return proj_operator(theta, proposed, self.theta_max, self.theta_inner), _EMPTY


class TimeVaryingGain(ContinuousLaw):
    """Matrix gain with forgetting factor and Frobenius-norm cap."""

    kind = "time-varying-gain"

    def __init__(self, gain=1.0, forgetting=0.0, mu=1.0, gamma_max=10.0,
                 Gamma0=None, dim=None):
        self.gain = float(gain)
        self.forgetting = float(forgetting)
        self.mu = float(mu)
        self.gamma_max = float(gamma_max)
        if Gamma0 is None:
            Gamma0 = np.eye(int(dim))
        Gamma0 = np.atleast_2d(np.asarray(Gamma0, dtype=float))
        if not np.allclose(Gamma0, Gamma0.T, atol=1e-12):
            raise ValueError("Gamma0 must be symmetric")
        if np.min(np.linalg.eigvalsh(Gamma0)) <= 0:
            raise ValueError("Gamma0 must be positive definite")
        if np.linalg.norm(Gamma0, "fro") > self.gamma_max:
            raise ValueError("||Gamma0||_F must not exceed gamma_max")
        self.Gamma0 = Gamma0
        self.n = Gamma0.shape[0]
        self.aux_dim = self.n * self.n

    def aux0(self, theta0):
        return self.Gamma0.ravel().copy()

    def aux_columns(self):
        return ["gamma_fro"]

    def aux_log(self, aux):
        return [np.linalg.norm(aux.reshape(self.n, self.n), "fro")]

    def post_step(self, aux):
        G = aux.reshape(self.n, self.n)
        return (0.5 * (G + G.T)).ravel()

    def rates(self, t, theta, aux, grad, phi, e_y):
        Gamma = aux.reshape(self.n, self.n)
        theta_dot, gamma_dot = time_varying_gain(
            self.gain, self.forgetting, self.mu, self.gamma_max, Gamma, phi, grad)
        return theta_dot, gamma_dot.ravel()


class HigherOrderTuner(ContinuousLaw):
    """Normalized two-stage tuner; gains are empirical, not certified."""

    kind = "higher-order-tuner"

    def __init__(self, gain=1.0, beta=1.0, mu=1.0, vartheta0=None):
        if gain <= 0 or beta <= 0 or mu < 0:
            raise ValueError("higher-order tuner requires gain, beta > 0 and mu >= 0")
        self.gain = float(gain)
        self.beta = float(beta)
        self.mu = float(mu)
        self.vartheta0 = None if vartheta0 is None else np.asarray(vartheta0, dtype=float)

    def aux0(self, theta0):
        v0 = self.vartheta0 if self.vartheta0 is not None else np.asarray(theta0)
        self.aux_dim = v0.size
        return np.array(v0, dtype=float)

    def aux_columns(self):
        return [f"vartheta_{i}" for i in range(self.aux_dim)]

    def aux_log(self, aux):
        return list(aux)

    def rates(self, t, theta, aux, grad, phi, e_y):
        theta_dot, vartheta_dot = higher_order_tuner(
            self.gain, self.beta, self.mu, theta, aux, grad, phi)
        return theta_dot, vartheta_dot
