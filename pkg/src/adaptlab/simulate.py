"""Fixed-step simulation engine and trajectory records.

Continuous runs integrate the joint state (theta, law auxiliaries, error
model state) with classical RK4 at a fixed step. Discrete runs iterate the
optimizer directly, with the step index k playing the role of time (t = k).
Both produce the same Trajectory schema so the analysis code does not care
which lane produced a run.

Column conventions: `cost` is the quadratic regret cost (q_weight * e_y^2
for the algebraic model, e^T Q e with the certificate Q for the dynamic
one) on continuous runs and the loss value on discrete runs; `V` is the
Lyapunov value (for discrete runs, theta_err^T theta_err / gamma0).
"""

from dataclasses import dataclass, field

import numpy as np

from . import analysis as _analysis
from .discrete_laws import (NesterovState, adaptive_step, gd_step,
                            nesterov_step, projected_gd_step, rftl_step)
from .error_models import DynamicErrorModel, dynamic_derivatives
from .exceptions import DivergedError
from .losses import loss_grad, loss_value
from .signals import PEWindowConfig, pe_level

LYAP_STEP_TOL = 1e-8
LYAP_DELTA_TOL = 1e-6


def rk4_step(f, state, t, dt):
    """One classical 4th-order Runge-Kutta advance of x' = f(t, x).

    Raises DivergedError when the advanced state is not finite (a
    non-finite derivative propagates into the result).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    k1 = f(t, state)
    k2 = f(t + 0.5 * dt, state + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, state + (0.5 * dt) * k2)
    k4 = f(t + dt, state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergedError(f"non-finite state after step at t = {t:g}")
    return out


@dataclass
class Trajectory:
    """Uniform time-indexed record of a run; column 0 is t (or k)."""

    columns: list
    data: np.ndarray
    status: str = "ok"

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ValueError("trajectory data must be rows x columns")
        t = self.data[:, 0]
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("time column must be strictly increasing")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("trajectory rows must be finite")

    @property
    def times(self):
        return self.data[:, 0]

    def column(self, name):
        return self.data[:, self.columns.index(name)]

    def theta(self):
        idx = [i for i, c in enumerate(self.columns) if c.startswith("theta_")
               and not c.startswith("theta_err")]
        return self.data[:, idx]

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.data:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass
class AnalysisReport:
    """Per-run diagnostics, controlled by the config's analysis toggles."""

    name: str
    status: str
    final_theta_err: float
    final_abs_ey: float
    pe: float = None
    conv_slope: float = None
    conv_r2: float = None
    lyap_monotone: bool = None
    lyap_max_violation: float = None
    regret_curve: np.ndarray = None
    regret_final: float = None
    regret_bound_v0: float = None
    regret_within_bound: bool = None
    notes: list = field(default_factory=list)

    def to_text(self):
        lines = [f"name = {self.name}", f"status = {self.status}",
                 f"final_theta_err = {self.final_theta_err:.17g}",
                 f"final_abs_ey = {self.final_abs_ey:.17g}"]
        for key in ("pe", "conv_slope", "conv_r2", "lyap_max_violation",
                    "regret_final", "regret_bound_v0"):
            val = getattr(self, key)
            if val is not None:
                lines.append(f"{key} = {val:.17g}")
        for key in ("lyap_monotone", "regret_within_bound"):
            val = getattr(self, key)
            if val is not None:
                lines.append(f"{key} = {str(val).lower()}")
        for note in self.notes:
            lines.append(f"note = {note}")
        return "\n".join(lines) + "\n"


def _classification_target(model, phi):
    y = float(model.theta_star @ phi)
    return 1.0 if y >= 0 else -1.0


def _baseline_dynamic_errors(cfg, times):
    """Re-simulate the dynamic model with theta held at theta_star.

    The leftover transient from (e(0), phi_tilde(0)) is the decaying term
    the continuous regret subtracts from the algorithm's cost integral.
    """
    model = cfg.model
    theta = cfg.theta_star
    x = np.concatenate([np.asarray(cfg.raw["model"].get("e0", np.zeros(model.A.shape[0])),
                                   dtype=float).ravel(),
                        np.asarray(cfg.raw["model"].get("phi_tilde0",
                                                        np.zeros(model.dim)),
                                   dtype=float).ravel()])
    n_e = model.A.shape[0]

    def f(t, xv):
        e_dot, pt_dot, _ = dynamic_derivatives(model, theta, cfg.signal(t),
                                               e=xv[:n_e], phi_tilde=xv[n_e:])
        return np.concatenate([e_dot, pt_dot])

    rows = np.empty((times.size, n_e))
    rows[0] = x[:n_e]
    t = times[0]
    for i in range(1, times.size):
        # integrate at the run's dt, sampling on the logged grid
        span = times[i] - t
        steps = max(1, int(round(span / cfg.dt)))
        h = span / steps
        for _ in range(steps):
            x = rk4_step(f, x, t, h)
            t += h
        rows[i] = x[:n_e]
    return rows


def _target(loss, model, phi):
    if loss.kind in ("hinge", "logistic"):
        return _classification_target(model, phi)
    return float(model.theta_star @ phi)


def _run_continuous(cfg):
    sig, model, law, loss = cfg.signal, cfg.model, cfg.law, cfg.loss
    theta0 = cfg.theta0
    N = theta0.size
    dynamic = isinstance(model, DynamicErrorModel)

    aux0 = law.aux0(theta0)
    n_aux = aux0.size
    n_e = model.A.shape[0] if dynamic else 0
    if dynamic:
        x = np.concatenate([theta0, aux0, model.e, model.phi_tilde])
        lyap = _analysis.LyapunovSpec.for_dynamic_model(model, law.gain,
                                                        alpha=cfg.alpha)
    else:
        x = np.concatenate([theta0, aux0])
        lyap = _analysis.LyapunovSpec.algebraic(law.gain)

    def split(xv):
        theta = xv[:N]
        aux = xv[N:N + n_aux]
        if dynamic:
            e = xv[N + n_aux:N + n_aux + n_e]
            pt = xv[N + n_aux + n_e:]
            return theta, aux, e, pt
        return theta, aux, None, None

    def f(t, xv):
        theta, aux, e, pt = split(xv)
        phi = sig(t)
        if dynamic:
            e_dot, pt_dot, e_y = dynamic_derivatives(model, theta, phi, e, pt)
            phi_law = phi + pt
            grad = phi_law * e_y  # gradient-like law for the SPR model
        else:
            e_y = float((theta - model.theta_star) @ phi)
            grad = loss_grad(loss, theta, phi, _target(loss, model, phi))
            phi_law = phi
        theta_dot, aux_dot = law.rates(t, theta, aux, grad, phi_law, e_y)
        if dynamic:
            return np.concatenate([theta_dot, aux_dot, e_dot, pt_dot])
        return np.concatenate([theta_dot, aux_dot])

    columns = (["t"] + [f"theta_{i}" for i in range(N)]
               + ["e_y", "theta_err_norm", "V", "cost"] + law.aux_columns())
    if dynamic:
        columns += [f"e_{i}" for i in range(n_e)] + ["phi_tilde_norm", "delta"]

    def log_row(t, xv):
        theta, aux, e, pt = split(xv)
        theta_err = theta - model.theta_star
        if dynamic:
            e_y = float(model.c @ e)
            cost = float(e @ (model.cert.Q @ e))
            v = _analysis.lyapunov_value(lyap, theta_err, e, pt)
        else:
            e_y = float(theta_err @ sig(t))
            cost = cfg.q_weight * e_y * e_y
            v = _analysis.lyapunov_value(lyap, theta_err)
        row = ([t] + list(theta)
               + [e_y, float(np.linalg.norm(theta_err)), v, cost]
               + law.aux_log(aux))
        if dynamic:
            row += list(e) + [float(np.linalg.norm(pt)), model.delta(e, pt)]
        return row

    n_steps = int(round(cfg.horizon / cfg.dt))
    rows = []
    status = "ok"
    t = 0.0
    for i in range(n_steps + 1):
        if i % cfg.decimate == 0 or i == n_steps:
            row = log_row(t, x)
            if not all(np.isfinite(row)):
                status = "diverged"
                break
            rows.append(row)
        if i == n_steps:
            break
        try:
            x = rk4_step(f, x, t, cfg.dt)
        except DivergedError:
            status = "diverged"
            break
        if n_aux:
            x[N:N + n_aux] = law.post_step(x[N:N + n_aux])
        t = (i + 1) * cfg.dt

    if dynamic:
        _, _, e, pt = split(x)
        model.e = np.array(e)
        model.phi_tilde = np.array(pt)

    traj = Trajectory(columns, np.array(rows), status=status)
    return traj


class _GDRunner:
    aux_columns = ()

    def __init__(self, schedule):
        self.schedule = schedule

    def step(self, k, theta, grad, grad_at):
        return gd_step(theta, grad, self.schedule, k)

    def aux_log(self):
        return []


class _RFTLRunner(_GDRunner):
    def __init__(self, schedule, reg):
        super().__init__(schedule)
        self.reg = reg

    def step(self, k, theta, grad, grad_at):
        return rftl_step(theta, grad, self.reg, self.schedule, k)


class _ProjectedGDRunner(_GDRunner):
    def __init__(self, schedule, feasible_set):
        super().__init__(schedule)
        self.set = feasible_set

    def step(self, k, theta, grad, grad_at):
        return projected_gd_step(theta, grad, self.schedule, k, self.set)


class _AdaptiveRunner:
    def __init__(self, schedule, feasible_set, state, dim):
        self.schedule = schedule
        self.set = feasible_set
        self.state = state
        self.dim = dim
        self.aux_columns = tuple([f"m_{i}" for i in range(dim)]
                                 + [f"v_{i}" for i in range(dim)])

    def step(self, k, theta, grad, grad_at):
        theta_next, self.state = adaptive_step(self.state, theta, grad,
                                               self.schedule, k, self.set)
        return theta_next

    def aux_log(self):
        m = self.state.m if self.state.m is not None else np.zeros(self.dim)
        return list(m) + list(self.state.v_diag(self.dim))


class _NesterovRunner:
    def __init__(self, gamma, beta, theta0):
        self.gamma = gamma
        self.beta = beta
        self.state = NesterovState.start(theta0)
        self.aux_columns = tuple(f"vartheta_{i}" for i in range(theta0.size))

    def step(self, k, theta, grad, grad_at):
        self.state = nesterov_step(self.state, grad_at, self.gamma, self.beta)
        return self.state.theta

    def aux_log(self):
        v = self.state.vartheta
        if v is None:
            v = self.state.theta
        return list(v)


def _run_discrete(cfg):
    sig, model, loss = cfg.signal, cfg.model, cfg.loss
    runner = cfg.law
    theta = cfg.theta0.copy()
    N = theta.size
    gamma0 = cfg.v_gain

    columns = (["k"] + [f"theta_{i}" for i in range(N)]
               + ["e_y", "theta_err_norm", "V", "cost"]
               + list(runner.aux_columns))

    K = int(cfg.horizon)
    rows = []
    status = "ok"
    last_aux = [0.0] * len(runner.aux_columns)
    for k in range(1, K + 2):
        phi = sig(float(k))
        y = _target(loss, model, phi)
        theta_err = theta - model.theta_star
        e_y = float(theta_err @ phi)
        stepped = False
        try:
            cost = loss_value(loss, theta, phi, y)
            if k <= K:
                grad = loss_grad(loss, theta, phi, y)

                def grad_at(th, _phi=phi, _y=y):
                    return loss_grad(loss, th, _phi, _y)

                theta_next = runner.step(k, theta, grad, grad_at)
                last_aux = runner.aux_log()
                stepped = True
        except (OverflowError, FloatingPointError):
            status = "diverged"
            break

        row = ([float(k)] + list(theta)
               + [e_y, float(np.linalg.norm(theta_err)),
                  float(theta_err @ theta_err) / gamma0, cost]
               + last_aux)
        if not all(np.isfinite(row)):
            status = "diverged"
            break
        if (k - 1) % cfg.decimate == 0 or k == K + 1:
            rows.append(row)
        if not stepped:
            break
        if not np.all(np.isfinite(theta_next)):
            status = "diverged"
            break
        theta = theta_next

    traj = Trajectory(columns, np.array(rows), status=status)
    return traj


def _build_report(cfg, traj):
    times = traj.times
    theta_err = traj.column("theta_err_norm")
    report = AnalysisReport(
        name=cfg.name,
        status=traj.status,
        final_theta_err=float(theta_err[-1]),
        final_abs_ey=float(abs(traj.column("e_y")[-1])),
    )
    toggles = cfg.analysis
    dynamic = isinstance(cfg.model, DynamicErrorModel)

    if toggles.get("pe") and traj.status == "ok":
        window = float(toggles.get("pe_window", 2.0 * np.pi))
        span = times[-1] - times[0]
        if span > window:
            samples = np.array([cfg.signal(t) for t in times])
            step = float(times[1] - times[0]) if times.size > 1 else window / 100
            cfgw = PEWindowConfig(window=window, step=step,
                                  tol=float(toggles.get("pe_tol", 0.0)))
            report.pe = pe_level(times, samples, cfgw)
        else:
            report.notes.append("pe skipped: horizon shorter than the window")

    if toggles.get("convergence") and traj.status == "ok":
        if np.all(theta_err > 0):
            slope, r2 = _analysis.convergence_fit(times, theta_err)
            report.conv_slope, report.conv_r2 = slope, r2
        else:
            report.notes.append("convergence fit skipped: zero error norm")

    if toggles.get("lyapunov"):
        v = traj.column("V")
        dv = np.diff(v)
        if dynamic:
            delta = traj.column("delta")[:-1]
            dt_log = np.diff(times)
            slack = np.abs(delta) * dt_log + LYAP_DELTA_TOL
        else:
            slack = LYAP_STEP_TOL
        viol = dv - slack
        report.lyap_max_violation = float(np.max(viol)) if viol.size else 0.0
        report.lyap_monotone = bool(np.all(viol <= 0))

    if toggles.get("regret") and cfg.mode == "continuous" and traj.status == "ok":
        if dynamic:
            e_cols = np.column_stack(
                [traj.column(f"e_{i}") for i in range(cfg.model.A.shape[0])])
            # the best-static baseline still pays its decaying transient;
            # re-simulate it and subtract its cost integral
            base = _baseline_dynamic_errors(cfg, times)
            curve = _analysis.continuous_regret(times, e_cols, cfg.model.cert.Q,
                                                baseline_errors=base)
            bound = float(traj.column("V")[0])
        else:
            curve = _analysis.continuous_regret(
                times, traj.column("e_y"), np.array([[cfg.q_weight]]))
            # gradient flow gives V_dot = -2 e_y^2, so the cost integral is
            # bounded by q V(0) / 2
            bound = cfg.q_weight * float(traj.column("V")[0]) / 2.0
        report.regret_curve = curve
        report.regret_final = float(curve[-1])
        if cfg.law.kind == "gradient-flow":
            # quadrature slack: the bound is often an equality and the
            # trapezoid rule overshoots by O(dt^2) per unit time
            slack = 1e-9 + cfg.dt**2 * cfg.horizon * max(1.0, bound)
            report.regret_bound_v0 = bound
            report.regret_within_bound = bool(curve[-1] <= bound + slack)
            if not report.regret_within_bound:
                report.notes.append("measured regret exceeded the V(0) bound")
    return report


def run_experiment(cfg):
    """Run one configured experiment; returns (Trajectory, AnalysisReport).

    Deterministic given (cfg, seed): the only randomness is the seeded
    regressor stream. Diverged runs return the partial trajectory with
    status 'diverged' instead of raising.
    """
    if cfg.mode == "continuous":
        traj = _run_continuous(cfg)
    else:
        traj = _run_discrete(cfg)
    return traj, _build_report(cfg, traj)
