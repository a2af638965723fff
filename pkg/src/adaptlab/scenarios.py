"""Scenario presets: canned experiment bundles with pass/fail assertions.

Presets are TOML files shipped as package data (not code). Each defines one
or more runs (full experiment tables) plus a list of checks evaluated on
the resulting trajectories. `run_scenario` executes everything, writes the
per-run CSVs, reports, and a summary, and says whether every check passed.
"""

import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import tomli

from . import analysis as _analysis
from .config import validate_experiment
from .simulate import run_experiment

PRESET_NAMES = (
    "pe-convergence",
    "non-pe-stall",
    "regret-constant-vs-sqrt",
    "ht-vs-nesterov",
    "robustness-sigma-emod-deadzone",
    "spr-lyapunov",
)


@dataclass
class CheckResult:
    kind: str
    run_id: str
    passed: bool
    message: str


@dataclass
class RunResult:
    cfg: object
    trajectory: object
    report: object


@dataclass
class ScenarioResult:
    name: str
    passed: bool
    checks: list = field(default_factory=list)
    runs: dict = field(default_factory=dict)

    def summary_text(self):
        lines = [f"scenario = {self.name}",
                 f"passed = {str(self.passed).lower()}"]
        for ck in self.checks:
            word = "PASS" if ck.passed else "FAIL"
            lines.append(f"{word} {ck.kind} [{ck.run_id}]: {ck.message}")
        return "\n".join(lines) + "\n"


def load_preset(name):
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown scenario {name!r}; presets: {', '.join(PRESET_NAMES)}")
    ref = resources.files("adaptlab").joinpath(f"presets/{name}.toml")
    with ref.open("rb") as fh:
        return tomli.load(fh)


def _bound_norm(run, factor):
    cfg = run.cfg
    return factor * (np.linalg.norm(cfg.theta0) + np.linalg.norm(cfg.theta_star))


def _check_final_theta_error_below(run, params):
    val = run.report.final_theta_err
    limit = params["value"]
    return val < limit, f"final ||theta_err|| = {val:.3e} (limit {limit:g})"


def _check_final_theta_error_between(run, params):
    val = run.report.final_theta_err
    lo, hi = params["lo"], params["hi"]
    return lo <= val <= hi, f"final ||theta_err|| = {val:.6f} (range [{lo}, {hi}])"


def _check_final_abs_output_error_below(run, params):
    val = run.report.final_abs_ey
    limit = params["value"]
    return val < limit, f"final |e_y| = {val:.3e} (limit {limit:g})"


def _check_final_column_abs_below(run, params):
    col = params["column"]
    val = abs(run.trajectory.column(col)[-1])
    limit = params["value"]
    return val < limit, f"final |{col}| = {val:.3e} (limit {limit:g})"


def _check_convergence_fit(run, params):
    slope, r2 = run.report.conv_slope, run.report.conv_r2
    if slope is None:
        return False, "no convergence fit available (toggle analysis.convergence)"
    ok = slope < params["max_slope"] and r2 > params["min_r2"]
    return ok, (f"slope = {slope:.4f} (< {params['max_slope']}), "
                f"R^2 = {r2:.4f} (> {params['min_r2']})")


def _check_lyapunov_nonincreasing(run, params):
    ok = bool(run.report.lyap_monotone)
    viol = run.report.lyap_max_violation
    return ok, f"max step violation = {viol:.3e}"


def _check_continuous_regret_plateau(run, params):
    traj = run.trajectory
    cfg = run.cfg
    curve = _analysis.continuous_regret(
        traj.times, traj.column("e_y"), np.array([[cfg.q_weight]]))
    t1, t2, ratio = params["t1"], params["t2"], params["ratio"]
    i1 = int(np.searchsorted(traj.times, t1))
    i2 = int(np.searchsorted(traj.times, t2))
    if i2 >= curve.size:
        return False, f"horizon shorter than t2 = {t2}"
    growth = curve[i2] - curve[i1]
    limit = ratio * curve[i1]
    return growth <= limit, (f"regret({t2:g}) - regret({t1:g}) = {growth:.3e} "
                             f"(limit {limit:.3e})")


def _check_ogd_regret_bound(run, params):
    cfg = run.cfg
    if cfg.decimate != 1:
        return False, "ogd-regret-bound needs decimate = 1"
    traj = run.trajectory
    ks = traj.times.astype(int)
    thetas = traj.theta()
    iterates = thetas[:-1] if ks[-1] == int(cfg.horizon) + 1 else thetas
    K = iterates.shape[0]
    phis = np.array([cfg.signal(float(k)) for k in range(1, K + 1)])
    ys = phis @ cfg.theta_star
    grads = phis * (np.einsum("ki,ki->k", iterates, phis) - ys)[:, None]
    g_obs = float(np.max(np.linalg.norm(grads, axis=1)))
    diameter = cfg.law.set.diameter()
    costs = [_analysis.QuadraticCost(phi=p, y=y) for p, y in zip(phis, ys)]
    curve = _analysis.regret_curve(costs, list(iterates), cfg.law.set)
    horizon = np.arange(1, K + 1)
    bound = params["factor"] * g_obs * diameter * np.sqrt(horizon)
    ratio = float(np.max(curve / bound))
    return ratio <= 1.0, (f"max regret/bound = {ratio:.4f} over T <= {K} "
                          f"(G = {g_obs:.3f}, D = {diameter:g})")


def _check_theta_norm_bounded(run, params):
    bound = _bound_norm(run, params["factor"])
    norms = np.linalg.norm(run.trajectory.theta(), axis=1)
    worst = float(np.max(norms))
    return worst <= bound, f"max ||theta|| = {worst:.3f} (bound {bound:.3f})"


def _check_theta_norm_exceeds_before(run, params):
    bound = _bound_norm(run, params["factor"])
    traj = run.trajectory
    norms = np.linalg.norm(traj.theta(), axis=1)
    over = np.nonzero(norms > bound)[0]
    if over.size == 0:
        return False, f"||theta|| never exceeded {bound:.3f} (status {traj.status})"
    k_over = traj.times[over[0]]
    ok = k_over < params["before"]
    return ok, f"||theta|| exceeded {bound:.3f} at k = {int(k_over)} (< {params['before']})"


def _check_frozen_after_zone_entry(run, params):
    law = run.cfg.law
    edge = law.d0 + law.eps
    traj = run.trajectory
    ey = np.abs(traj.column("e_y"))
    inside = ey <= edge
    # first index from which the error stays inside the zone for good
    outside_idx = np.nonzero(~inside)[0]
    start = 0 if outside_idx.size == 0 else int(outside_idx[-1]) + 1
    if start >= ey.size:
        return False, "output error never settled inside the deadzone"
    theta = run.trajectory.theta()
    frozen = bool(np.all(theta[start:] == theta[start]))
    return frozen, (f"theta bitwise constant over t >= {traj.times[start]:g} "
                    f"(|e_y| <= {edge:g})")


def _check_projection_containment(run, params):
    law = run.cfg.law
    tol = params.get("tol", 1e-6)
    theta = np.abs(run.trajectory.theta())
    excess = float(np.max(theta - law.theta_max[None, :]))
    return excess <= tol, f"max |theta_i| - theta_max_i = {excess:.3e} (tol {tol:g})"


CHECKS = {
    "final-theta-error-below": _check_final_theta_error_below,
    "final-theta-error-between": _check_final_theta_error_between,
    "final-abs-output-error-below": _check_final_abs_output_error_below,
    "final-column-abs-below": _check_final_column_abs_below,
    "convergence-fit": _check_convergence_fit,
    "lyapunov-nonincreasing": _check_lyapunov_nonincreasing,
    "continuous-regret-plateau": _check_continuous_regret_plateau,
    "ogd-regret-bound": _check_ogd_regret_bound,
    "theta-norm-bounded": _check_theta_norm_bounded,
    "theta-norm-exceeds-before": _check_theta_norm_exceeds_before,
    "frozen-after-zone-entry": _check_frozen_after_zone_entry,
    "projection-containment": _check_projection_containment,
}


def run_scenario(name, out_dir=None, overrides=None):
    """Execute a preset's runs and checks; write CSVs and a summary.

    Returns a ScenarioResult whose `passed` is True only if every check
    passed. Runs that diverge still contribute their partial trajectories
    (some checks expect divergence).
    """
    preset = load_preset(name)
    out_dir = out_dir or os.environ.get("ADAPTLAB_OUT", "runs")
    os.makedirs(out_dir, exist_ok=True)

    result = ScenarioResult(name=name, passed=True)
    for run_tbl in preset.get("runs", []):
        run_id = run_tbl["id"]
        raw = {k: v for k, v in run_tbl.items() if k != "id"}
        if overrides:
            for dotted, value in overrides.items():
                tbl = raw
                parts = dotted.split(".")
                for part in parts[:-1]:
                    tbl = tbl.setdefault(part, {})
                tbl[parts[-1]] = value
        cfg = validate_experiment(raw, name=f"{name}-{run_id}")
        traj, report = run_experiment(cfg)
        result.runs[run_id] = RunResult(cfg=cfg, trajectory=traj, report=report)
        traj.to_csv(os.path.join(out_dir, f"{name}-{run_id}.csv"))
        with open(os.path.join(out_dir, f"{name}-{run_id}-report.txt"), "w") as fh:
            fh.write(report.to_text())

    for check_tbl in preset.get("checks", []):
        kind = check_tbl["kind"]
        run_id = check_tbl["run"]
        fn = CHECKS.get(kind)
        if fn is None:
            result.checks.append(CheckResult(kind, run_id, False,
                                             f"unknown check kind {kind!r}"))
            result.passed = False
            continue
        run = result.runs[run_id]
        params = {k: v for k, v in check_tbl.items() if k not in ("kind", "run")}
        try:
            passed, message = fn(run, params)
        except Exception as exc:
            passed, message = False, f"check raised {type(exc).__name__}: {exc}"
        result.checks.append(CheckResult(kind, run_id, passed, message))
        result.passed = result.passed and passed

    with open(os.path.join(out_dir, f"{name}-summary.txt"), "w") as fh:
        fh.write(result.summary_text())
    return result
