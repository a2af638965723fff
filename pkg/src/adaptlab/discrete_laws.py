"""Discrete-time optimizers: gradient descent, regularized follow-the-leader,
projected GD, the generic adaptive-stepsize family, and Nesterov's method.

Step functions are pure; iteration state (moment aggregates, previous
iterates) travels in small dataclasses so each run owns its own state.
Iteration counters start at k = 1 so decaying schedules are defined at the
first step.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DegenerateCurvatureError

SCHEDULE_KINDS = ("constant", "inverse-sqrt", "inverse")


@dataclass(frozen=True)
class StepSchedule:
    kind: str = "constant"
    gamma0: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.gamma0 <= 0:
            raise ValueError("gamma0 must be > 0")

    def gamma(self, k):
        if k < 1:
            raise ValueError("step index k starts at 1")
        if self.kind == "constant":
            return self.gamma0
        if self.kind == "inverse-sqrt":
            return self.gamma0 / np.sqrt(k)
        return self.gamma0 / k


@dataclass(frozen=True)
class RegularizerSpec:
    kind: str = "l2"  # l2: R = ||theta||^2 / 2, l1: R = ||theta||_1
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2", "l1"):
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def grad(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "l2":
            return theta
        return np.sign(theta)  # sign(0) = 0


class ConvexFeasibleSet:
    """Closed convex constraint set with an exact Euclidean projection.

    Supported kinds: 'box' (coordinatewise clamp) and 'euclidean-ball'
    (radial scaling). Both projections are exact closed forms.
    """

    def __init__(self, kind, lower=None, upper=None, center=None, radius=None):
        self.kind = kind
        if kind == "box":
            self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
            self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
            if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
                raise ValueError("box requires lower <= upper, same shape")
        elif kind == "euclidean-ball":
            self.center = np.atleast_1d(np.asarray(center, dtype=float))
            self.radius = float(radius)
            if self.radius <= 0:
                raise ValueError("ball radius must be > 0")
        else:
            raise ValueError(f"unknown set kind {kind!r}")

    @classmethod
    def box(cls, lower, upper):
        return cls("box", lower=lower, upper=upper)

    @classmethod
    def ball(cls, center, radius):
        return cls("euclidean-ball", center=center, radius=radius)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return np.clip(x, self.lower, self.upper)
        d = x - self.center
        norm = np.linalg.norm(d)
        if norm <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / norm)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def diameter(self):
        if self.kind == "box":
            return float(np.linalg.norm(self.upper - self.lower))
        return 2.0 * self.radius


def project(feasible_set, theta_bar):
    """Euclidean projection onto the set (closest point)."""
    return feasible_set.project(theta_bar)


def gd_step(theta, grad, schedule, k):
    """theta_{k+1} = theta_k - gamma_k grad."""
    return np.asarray(theta, dtype=float) - schedule.gamma(k) * np.asarray(grad, dtype=float)


def rftl_step(theta, grad, reg, schedule, k):
    """Regularized follow-the-leader: GD on loss + sigma * regularizer."""
    theta = np.asarray(theta, dtype=float)
    total = np.asarray(grad, dtype=float) + reg.sigma * reg.grad(theta)
    return theta - schedule.gamma(k) * total


def projected_gd_step(theta, grad, schedule, k, feasible_set):
    """Gradient step followed by exact Euclidean projection."""
    theta_bar = np.asarray(theta, dtype=float) - schedule.gamma(k) * np.asarray(grad, dtype=float)
    return feasible_set.project(theta_bar)


ADAPTIVE_PARAMETERIZATIONS = ("identity", "adagrad", "adam")


@dataclass(frozen=True)
class AdaptiveStepState:
    """Aggregates (m_k, V_k) of the generic adaptive-stepsize family.

    parameterization 'identity' reduces to projected gradient descent
    (m_k = g_k, V_k = I); 'adagrad' accumulates squared gradients
    (V_k = eps I + diag(sum g_i^2)); 'adam' uses exponentially weighted
    sums m_k = (1-b1) sum b1^{k-i} g_i, V_k = (1-b2) diag(sum b2^{k-i} g_i^2)
    with no bias correction and no epsilon inside the root, exactly as the
    cited parameterization states.
    """

    parameterization: str = "identity"
    beta1: float = 0.9
    beta2: float = 0.999
    eps_ada: float = 0.0
    m: np.ndarray = None
    v: np.ndarray = None  # adagrad: running sum of g^2; adam: EWMA of g^2

    def __post_init__(self):
        if self.parameterization not in ADAPTIVE_PARAMETERIZATIONS:
            raise ValueError(
                f"unknown parameterization {self.parameterization!r}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1, beta2 must lie in [0, 1)")
        if self.eps_ada < 0:
            raise ValueError("eps_ada must be >= 0")

    def v_diag(self, dim):
        """Current diagonal of V_k."""
        if self.parameterization == "identity":
            return np.ones(dim)
        if self.v is None:
            return np.zeros(dim)
        if self.parameterization == "adagrad":
            return self.eps_ada + self.v
        return self.v.copy()


def adaptive_step(state, theta, g, schedule, k, feasible_set):
    """One step of the generic adaptive-stepsize update.

    Updates (m_k, V_k) per the state's parameterization, then
    theta_bar = theta - gamma_k * m_k / sqrt(V_k) elementwise and projects.
    Returns (theta_next, new_state). A zero diagonal entry of V_k raises
    DegenerateCurvatureError rather than dividing by zero.
    """
    theta = np.asarray(theta, dtype=float)
    g = np.asarray(g, dtype=float)
    p = state.parameterization

    if p == "identity":
        m = g
        v_store = None
        v_diag = np.ones_like(g)
    elif p == "adagrad":
        v_store = (g * g) if state.v is None else state.v + g * g
        m = g
        v_diag = state.eps_ada + v_store
    else:  # adam
        m_prev = np.zeros_like(g) if state.m is None else state.m
        v_prev = np.zeros_like(g) if state.v is None else state.v
        m = state.beta1 * m_prev + (1.0 - state.beta1) * g
        v_store = state.beta2 * v_prev + (1.0 - state.beta2) * (g * g)
        v_diag = v_store

    if np.any(v_diag == 0.0):
        raise DegenerateCurvatureError(
            "V_k has a zero diagonal entry and eps_ada is 0")

    theta_bar = theta - schedule.gamma(k) * (m / np.sqrt(v_diag))
    theta_next = feasible_set.project(theta_bar) if feasible_set is not None else theta_bar
    return theta_next, replace(state, m=m, v=v_store)


@dataclass(frozen=True)
class NesterovState:
    theta: np.ndarray
    theta_prev: np.ndarray
    vartheta: np.ndarray = None  # last extrapolated point, for logging

    @classmethod
    def start(cls, theta0):
        theta0 = np.asarray(theta0, dtype=float)
        return cls(theta=theta0, theta_prev=theta0.copy())


def nesterov_step(state, grad_at, gamma, beta):
    """Accelerated step through the extrapolated point.

    vartheta = theta + beta (theta - theta_prev)
    theta'   = vartheta - gamma * grad_at(vartheta)
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    theta = np.asarray(state.theta, dtype=float)
    if beta == 0.0:
        vartheta = theta  # keeps the reduction to plain GD exact
    else:
        vartheta = theta + beta * (theta - np.asarray(state.theta_prev, dtype=float))
    theta_next = vartheta - gamma * np.asarray(grad_at(vartheta), dtype=float)
    return NesterovState(theta=theta_next, theta_prev=theta, vartheta=vartheta)
