"""Trajectory diagnostics: Lyapunov values, regret, and convergence fits."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .exceptions import BaselineFailure


@dataclass
class LyapunovSpec:
    """Weights and matrices of the composite Lyapunov function

        V = theta_err^T theta_err / gain + e^T P e + alpha phi_tilde^T P_bar phi_tilde.

    For the algebraic error model only the first term exists (P and P_bar
    are None). ``alpha_min`` is the floor 4 ||P b||^2 ||theta*||^2 /
    (min eig Q * min eig Q_bar) below which the derivative is not
    guaranteed nonpositive.
    """

    gain: float
    P: np.ndarray = None
    Q: np.ndarray = None
    P_bar: np.ndarray = None
    Q_bar: np.ndarray = None
    alpha: float = 0.0
    alpha_min: float = 0.0

    @classmethod
    def algebraic(cls, gain):
        return cls(gain=float(gain))

    @classmethod
    def for_dynamic_model(cls, model, gain, alpha=None):
        cert = model.cert
        bound = model.alpha_bound()
        if alpha is None:
            alpha = model.alpha_default()
        return cls(gain=float(gain), P=cert.P, Q=cert.Q, P_bar=cert.P_bar,
                   Q_bar=cert.Q_bar, alpha=float(alpha), alpha_min=bound)


def lyapunov_value(spec, theta_err, e=None, phi_tilde=None):
    """Composite Lyapunov value; e / phi_tilde terms only when supplied."""
    theta_err = np.asarray(theta_err, dtype=float)
    v = float(theta_err @ theta_err) / spec.gain
    if e is not None and spec.P is not None:
        e = np.atleast_1d(np.asarray(e, dtype=float))
        v += float(e @ (spec.P @ e))
    if phi_tilde is not None and spec.P_bar is not None:
        pt = np.atleast_1d(np.asarray(phi_tilde, dtype=float))
        v += spec.alpha * float(pt @ (spec.P_bar @ pt))
    return v


def lyapunov_derivative(spec, e, phi_tilde, delta, warn_only=False):
    """Analytic V_dot = -e^T Q e - alpha phi_tilde^T Q_bar phi_tilde + delta.

    Intended for cross-checking against finite differences of the logged V.
    Raises (or warns, with warn_only) when alpha is at or below its floor,
    since the sign guarantee is void there.
    """
    if spec.alpha <= spec.alpha_min:
        msg = (f"alpha = {spec.alpha:g} does not exceed its floor "
               f"{spec.alpha_min:g}; V_dot <= delta is not guaranteed")
        if warn_only:
            warnings.warn(msg, stacklevel=2)
        else:
            raise ValueError(msg)
    e = np.atleast_1d(np.asarray(e, dtype=float))
    pt = np.atleast_1d(np.asarray(phi_tilde, dtype=float))
    out = -float(e @ (spec.Q @ e)) - spec.alpha * float(pt @ (spec.Q_bar @ pt))
    return out + float(delta)


@dataclass(frozen=True)
class QuadraticCost:
    """Streaming squared cost C(theta) = (theta^T phi - y)^2 / 2."""

    phi: np.ndarray
    y: float

    def __call__(self, theta):
        return 0.5 * (float(np.dot(theta, self.phi)) - self.y) ** 2

    def grad(self, theta):
        return np.asarray(self.phi, dtype=float) * (
            float(np.dot(theta, self.phi)) - self.y)


@dataclass
class RegretRecord:
    horizon: int
    step_costs: np.ndarray
    theta_best: np.ndarray
    regret: float
    theta_bar: np.ndarray
    baseline_cost: float


def _ball_minimizer(gram, h, feasible_set):
    """Minimize the quadratic (gram, h) over a ball by a 1-D search on the
    Lagrange multiplier; ||u(lam)|| decreases monotonically, so bisection
    pins the active constraint exactly."""
    center, radius = feasible_set.center, feasible_set.radius
    h_c = h - gram @ center
    eye = np.eye(gram.shape[0])

    def u_norm(lam):
        return np.linalg.norm(np.linalg.solve(gram + lam * eye, h_c))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if u_norm(hi) <= radius:
            break
        hi *= 2.0
    else:
        raise BaselineFailure("ball-constrained baseline: multiplier bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if u_norm(mid) > radius:
            lo = mid
        else:
            hi = mid
    return center + np.linalg.solve(gram + hi * eye, h_c)


def _box_minimizer(phis, ys, feasible_set):
    res = scipy.optimize.lsq_linear(
        phis, ys, bounds=(feasible_set.lower, feasible_set.upper), tol=1e-14)
    if not res.success and res.status <= 0:
        raise BaselineFailure(f"bounded least squares failed: {res.message}")
    return res.x


def _best_static_quadratic(costs, feasible_set):
    """Exact constrained minimizer of a sum of QuadraticCost terms."""
    phis = np.array([c.phi for c in costs], dtype=float)
    ys = np.array([c.y for c in costs], dtype=float)
    gram = phis.T @ phis
    h = phis.T @ ys

    theta_u, *_ = np.linalg.lstsq(gram, h, rcond=None)  # min-norm on ties
    if feasible_set is None or feasible_set.contains(theta_u, tol=1e-12):
        return theta_u
    if feasible_set.kind == "box":
        return _box_minimizer(phis, ys, feasible_set)
    return _ball_minimizer(gram, h, feasible_set)


def _best_static_generic(costs, feasible_set, grid_points=101):
    """Dense grid over the set's bounding box, then local refinement."""
    if feasible_set is None:
        raise BaselineFailure("generic costs need a bounded feasible set")
    if feasible_set.kind == "box":
        lo, hi = feasible_set.lower, feasible_set.upper
    else:
        lo = feasible_set.center - feasible_set.radius
        hi = feasible_set.center + feasible_set.radius
    dim = lo.size
    if dim > 3:
        raise BaselineFailure("grid baseline supports at most 3 dimensions")

    axes = [np.linspace(lo[i], hi[i], grid_points) for i in range(dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)

    def total(theta):
        return sum(c(theta) for c in costs)

    feasible = np.array([feasible_set.contains(p, tol=1e-12) for p in mesh])
    values = np.array([total(p) if ok else np.inf
                       for p, ok in zip(mesh, feasible)])
    start = mesh[int(np.argmin(values))]

    res = scipy.optimize.minimize(
        lambda th: total(feasible_set.project(th)), start,
        method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    best = feasible_set.project(res.x)
    if not np.isfinite(total(best)):
        raise BaselineFailure("grid baseline refinement produced non-finite cost")
    return best if total(best) <= total(start) else start


def best_static_parameter(costs, feasible_set):
    """Minimizer over the set of the summed per-step costs."""
    if all(isinstance(c, QuadraticCost) for c in costs):
        return _best_static_quadratic(costs, feasible_set)
    return _best_static_generic(costs, feasible_set)


def discrete_regret(costs, iterates, feasible_set=None):
    """Cumulative cost of the iterates minus the best static choice.

    `costs` is a sequence of callables (QuadraticCost gets an exact
    baseline solve; anything else goes through grid + refinement).
    """
    costs = list(costs)
    iterates = [np.asarray(th, dtype=float) for th in iterates]
    horizon = len(costs)
    if horizon < 1 or len(iterates) != horizon:
        raise ValueError("need one iterate per cost, at least one of each")

    step_costs = np.array([c(th) for c, th in zip(costs, iterates)])
    theta_best = best_static_parameter(costs, feasible_set)
    baseline = float(sum(c(theta_best) for c in costs))
    return RegretRecord(
        horizon=horizon,
        step_costs=step_costs,
        theta_best=theta_best,
        regret=float(np.sum(step_costs)) - baseline,
        theta_bar=np.mean(iterates, axis=0),
        baseline_cost=baseline,
    )


def regret_curve(costs, iterates, feasible_set=None):
    """Per-horizon regret values regret_1 .. regret_T.

    Quadratic streams accumulate normal equations incrementally. For
    nonnegative costs with a (near) zero-cost comparator the curve is
    checked to be nondecreasing; other streams only warn on violations,
    since re-minimizing per horizon can legitimately dip.
    """
    costs = list(costs)
    iterates = [np.asarray(th, dtype=float) for th in iterates]
    T = len(costs)
    step_costs = np.array([c(th) for c, th in zip(costs, iterates)])

    regrets = np.empty(T)
    if all(isinstance(c, QuadraticCost) for c in costs):
        phis = np.array([c.phi for c in costs], dtype=float)
        ys = np.array([c.y for c in costs], dtype=float)
        dim = phis.shape[1]
        gram = np.zeros((dim, dim))
        h = np.zeros(dim)
        sum_y2 = 0.0
        running = 0.0
        for t in range(T):
            phi = phis[t]
            gram += np.outer(phi, phi)
            h += phi * ys[t]
            sum_y2 += ys[t] * ys[t]
            running += step_costs[t]
            theta_u, *_ = np.linalg.lstsq(gram, h, rcond=None)
            if feasible_set is None or feasible_set.contains(theta_u, tol=1e-12):
                theta_b = theta_u
            elif feasible_set.kind == "box":
                theta_b = _box_minimizer(phis[:t + 1], ys[:t + 1], feasible_set)
            else:
                theta_b = _ball_minimizer(gram, h, feasible_set)
            # total quadratic cost of theta_b, accumulated in O(1)
            base = 0.5 * float(theta_b @ gram @ theta_b) - float(h @ theta_b) \
                + 0.5 * sum_y2
            regrets[t] = running - base
    else:
        for t in range(T):
            regrets[t] = discrete_regret(costs[:t + 1], iterates[:t + 1],
                                         feasible_set).regret

    if np.all(step_costs >= 0):
        final_base = np.sum(step_costs) - regrets[-1]
        drops = np.diff(regrets) < -1e-9
        if np.any(drops):
            if final_base <= 1e-9 * max(1.0, float(np.sum(step_costs))):
                raise ValueError("regret curve decreased on a zero-baseline stream")
            warnings.warn("regret curve is not monotone (nonzero-cost comparator)",
                          stacklevel=2)
    return regrets


def continuous_regret(times, errors, Q, baseline_errors=None, baseline_times=None):
    """Running integral of e^T Q e minus the best-static baseline's.

    `errors` holds one state row per sample (scalars allowed); the baseline
    defaults to identically zero (the realizable regression case, where the
    best static parameter produces no error at all). Both trajectories must
    share the sample grid.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if errors.ndim == 1:
        errors = errors[:, None]
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    cost = np.einsum("ti,ij,tj->t", errors, Q, errors)

    if baseline_errors is not None:
        if baseline_times is not None and (
                baseline_times.shape != times.shape
                or not np.allclose(baseline_times, times, atol=1e-12, rtol=0)):
            raise ValueError("baseline trajectory grid does not match")
        be = np.asarray(baseline_errors, dtype=float)
        if be.ndim == 1:
            be = be[:, None]
        if be.shape[0] != cost.shape[0]:
            raise ValueError("baseline trajectory grid does not match")
        cost = cost - np.einsum("ti,ij,tj->t", be, Q, be)

    seg = 0.5 * np.diff(times) * (cost[1:] + cost[:-1])
    return np.concatenate([[0.0], np.cumsum(seg)])


def jensen_gap(cost, iterates, theta_star):
    """(lhs, rhs) of the averaged-iterate inequality for a constant convex cost.

    lhs = C(mean iterate) - C(theta_star); rhs = mean_k [C(theta_k) - C(theta_star)]
    = regret_T / T. Convexity makes lhs <= rhs.
    """
    iterates = [np.asarray(th, dtype=float) for th in iterates]
    if not iterates:
        raise ValueError("need at least one iterate")
    c_star = cost(np.asarray(theta_star, dtype=float))
    theta_bar = np.mean(iterates, axis=0)
    lhs = cost(theta_bar) - c_star
    rhs = float(np.mean([cost(th) - c_star for th in iterates]))
    return lhs, rhs


def convergence_fit(times, norms, tail_fraction=0.8):
    """Exponential-rate estimate from a log-linear fit of ||theta_err(t)||.

    Fits log(norms) against t over the final `tail_fraction` of the horizon
    and returns (slope, r_squared). Requires strictly positive norms.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if np.any(norms <= 0):
        raise ValueError("convergence_fit requires strictly positive norms")
    t0 = times[0] + (1.0 - tail_fraction) * (times[-1] - times[0])
    mask = times >= t0
    t = times[mask]
    y = np.log(norms[mask])
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-30 else 1.0 - ss_res / ss_tot
    return float(slope), float(r2)
