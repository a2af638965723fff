"""Acceptance suite.

One test per acceptance criterion, each printing a PASS/FAIL line with the
measured quantity at the stated tolerance. Scenario-backed criteria run the
shipped presets once (module-scoped fixture) and assert their checks.
"""

import math

import numpy as np
import pytest

from adaptlab.analysis import QuadraticCost, discrete_regret, jensen_gap
from adaptlab.config import validate_experiment
from adaptlab.discrete_laws import (AdaptiveStepState, ConvexFeasibleSet,
                                    NesterovState, StepSchedule,
                                    adaptive_step, gd_step, nesterov_step,
                                    projected_gd_step)
from adaptlab.losses import LossSpec, loss_grad, loss_value
from adaptlab.scenarios import PRESET_NAMES, run_scenario
from adaptlab.simulate import run_experiment

HALF_PI = math.pi / 2


def report(num, ok, detail):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def scenarios(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario-artifacts")
    return {name: run_scenario(name, out_dir=str(out / name))
            for name in PRESET_NAMES}


def check_of(result, kind, run_id):
    for ck in result.checks:
        if ck.kind == kind and ck.run_id == run_id:
            return ck
    raise KeyError(f"{kind} [{run_id}] not found")


def test_criterion_1_pe_convergence(scenarios):
    res = scenarios["pe-convergence"]
    err = check_of(res, "final-theta-error-below", "main")
    fit = check_of(res, "convergence-fit", "main")
    ok = err.passed and fit.passed
    report(1, ok, f"{err.message}; {fit.message}")


def test_criterion_2_non_pe_stall(scenarios):
    res = scenarios["non-pe-stall"]
    ey = check_of(res, "final-abs-output-error-below", "main")
    stall = check_of(res, "final-theta-error-between", "main")
    report(2, ey.passed and stall.passed, f"{ey.message}; {stall.message}")


def test_criterion_3_constant_regret(scenarios):
    ck = check_of(scenarios["regret-constant-vs-sqrt"],
                  "continuous-regret-plateau", "gf-long")
    report(3, ck.passed, ck.message)


def test_criterion_4_ogd_regret_bound(scenarios):
    ck = check_of(scenarios["regret-constant-vs-sqrt"], "ogd-regret-bound", "ogd")
    report(4, ck.passed, ck.message)


def test_criterion_5_lyapunov_monotone_all_gf_runs(scenarios):
    # every continuous gradient-flow run on the algebraic model:
    # V = ||theta_err||^2 / gain never rises by more than 1e-8 per step
    checked = 0
    worst = -np.inf
    for res in scenarios.values():
        for run_id, run in res.runs.items():
            cfg = run.cfg
            if cfg.mode != "continuous" or cfg.law.kind != "gradient-flow":
                continue
            if cfg.model.__class__.__name__ != "AlgebraicErrorModel":
                continue
            v = run.trajectory.column("theta_err_norm") ** 2 / cfg.law.gain
            worst = max(worst, float(np.max(np.diff(v))))
            checked += 1
    ok = checked >= 3 and worst <= 1e-8
    report(5, ok, f"{checked} gradient-flow runs, worst step increase {worst:.3e}")


def test_criterion_6_spr_kyp(scenarios):
    res = scenarios["spr-lyapunov"]
    lyap = check_of(res, "lyapunov-nonincreasing", "main")
    e0 = check_of(res, "final-column-abs-below", "main")
    checks = [ck for ck in res.checks if ck.run_id == "main"]
    ok = all(ck.passed for ck in checks)
    report(6, ok, "; ".join(ck.message for ck in (lyap, e0)))


def test_criterion_7_optimizer_reductions():
    rng = np.random.default_rng(2024)
    box = ConvexFeasibleSet.box([-2.0, -2.0], [2.0, 2.0])
    sched = StepSchedule("inverse-sqrt", 0.2)
    state = AdaptiveStepState(parameterization="identity")
    th_a = np.array([0.3, -0.1])
    th_b = th_a.copy()
    identity_ok = True
    for k in range(1, 1001):
        g = rng.normal(size=2)
        th_a, state = adaptive_step(state, th_a, g, sched, k, box)
        th_b = projected_gd_step(th_b, g, sched, k, box)
        identity_ok = identity_ok and np.array_equal(th_a, th_b)

    nes = NesterovState.start(np.array([0.5, 0.5]))
    th_gd = np.array([0.5, 0.5])
    beta_zero_ok = True
    for k in range(1, 1001):
        g = rng.normal(size=2)
        nes = nesterov_step(nes, lambda th: g, 0.05, 0.0)
        th_gd = gd_step(th_gd, g, StepSchedule("constant", 0.05), k)
        beta_zero_ok = beta_zero_ok and np.array_equal(nes.theta, th_gd)

    ok = identity_ok and beta_zero_ok
    report(7, ok, f"identity==projected-gd bitwise: {identity_ok}; "
                  f"nesterov(beta=0)==gd bitwise: {beta_zero_ok} (1000 steps each)")


def test_criterion_8_ht_vs_nesterov(scenarios):
    res = scenarios["ht-vs-nesterov"]
    ht = check_of(res, "theta-norm-bounded", "ht")
    nv = check_of(res, "theta-norm-exceeds-before", "nesterov")
    report(8, ht.passed and nv.passed, f"{ht.message}; {nv.message}")


def test_criterion_9_projection_containment():
    raw = {
        "experiment": {"mode": "continuous", "horizon": 20.0, "dt": 1e-3,
                       "theta0": [0.0, 0.0], "theta_star": [1.0, -1.0]},
        "signal": {"kind": "sinusoid-bank", "amplitudes": [1.0, 1.0],
                   "frequencies": [1.0, 1.0], "phases": [0.0, HALF_PI]},
        "law": {"kind": "projection", "gain": 2.0,
                "theta_max": [0.8, 0.8], "theta_inner": [0.6, 0.6]},
        "model": {"kind": "algebraic"},
        "loss": {"kind": "squared"},
        "analysis": {},
    }
    traj, _ = run_experiment(validate_experiment(raw))
    excess = float(np.max(np.abs(traj.theta()) - 0.8))
    contained = excess <= 1e-6

    rng = np.random.default_rng(99)
    sets = [ConvexFeasibleSet.box([-1.0, -1.0], [1.0, 1.0]),
            ConvexFeasibleSet.ball([0.0, 0.0], 1.0)]
    props_ok = True
    for s in sets:
        for _ in range(1000):
            x, y = rng.normal(scale=4, size=2), rng.normal(scale=4, size=2)
            px, py = s.project(x), s.project(y)
            props_ok = props_ok and np.allclose(s.project(px), px, atol=1e-12)
            props_ok = props_ok and (np.linalg.norm(px - py)
                                     <= np.linalg.norm(x - y) + 1e-12)
    ok = contained and props_ok
    report(9, ok, f"law containment excess {excess:.2e} (tol 1e-6); "
                  f"projection idempotent+nonexpansive on 1000 pairs: {props_ok}")


def test_criterion_10_gradient_correctness():
    specs = [LossSpec("squared"), LossSpec("lp", p=4), LossSpec("logistic"),
             LossSpec("hinge")]
    rng = np.random.default_rng(7)
    h = 1e-5
    worst = 0.0
    for spec in specs:
        checked = 0
        while checked < 100:
            theta = rng.normal(size=3)
            phi = rng.normal(size=3)
            if spec.kind in ("hinge", "logistic"):
                y = 1 if rng.uniform() < 0.5 else -1
                if spec.kind == "hinge" and abs(1 - y * float(theta @ phi)) < 5e-2:
                    continue  # kink excluded
            else:
                y = rng.normal()
                if abs(float(theta @ phi) - y) < 1e-2:
                    continue  # fd noise dominates at the flat minimum
            an = loss_grad(spec, theta, phi, y)
            fd = np.array([
                (loss_value(spec, theta + h * e, phi, y)
                 - loss_value(spec, theta - h * e, phi, y)) / (2 * h)
                for e in np.eye(3)])
            denom = max(float(np.linalg.norm(an)), 1e-9)
            worst = max(worst, float(np.linalg.norm(fd - an)) / denom)
            assert np.allclose(fd, an, rtol=1e-6, atol=1e-9)
            checked += 1
    report(10, worst <= 1e-6 * 10,
           f"4 losses x 100 points, worst relative error {worst:.2e}")


def test_criterion_11_jensen_bound():
    # constant convex cost runs: GD at several stepsizes plus a projected run
    cost = QuadraticCost(phi=np.array([1.0]), y=1.0)
    theta_star = np.array([1.0])
    worst_gap = -np.inf
    for gamma in (0.1, 0.5, 1.5):
        th = np.array([0.0])
        iterates = []
        for k in range(1, 21):
            iterates.append(th.copy())
            th = gd_step(th, cost.grad(th), StepSchedule("constant", gamma), k)
        lhs, rhs = jensen_gap(cost, iterates, theta_star)
        worst_gap = max(worst_gap, lhs - rhs)
        assert lhs <= rhs + 1e-9
    report(11, worst_gap <= 1e-9,
           f"lhs - rhs at most {worst_gap:.3e} over 3 constant-cost runs (tol 1e-9)")


def test_criterion_12_regret_lattice_oracle():
    box = ConvexFeasibleSet.box([-1.0, -1.0], [1.0, 1.0])
    grid = np.linspace(-1.0, 1.0, 2001)
    xs, ys_m = np.meshgrid(grid, grid, indexing="ij")
    pts = np.column_stack([xs.ravel(), ys_m.ravel()])
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        costs = [QuadraticCost(phi=rng.normal(size=2), y=rng.normal())
                 for _ in range(5)]
        iterates = [rng.uniform(-1, 1, size=2) for _ in range(5)]
        rec = discrete_regret(costs, iterates, box)

        total = np.zeros(pts.shape[0])
        for c in costs:
            total += 0.5 * (pts @ c.phi - c.y) ** 2
        oracle = float(np.sum(rec.step_costs)) - float(total.min())
        worst = max(worst, abs(rec.regret - oracle))
        assert abs(rec.regret - oracle) <= 1e-3
    report(12, worst <= 1e-3,
           f"20 seeded 5-step streams, worst |regret - lattice| = {worst:.2e}")


def test_all_scenarios_pass(scenarios):
    failing = [f"{name}: {ck.kind}[{ck.run_id}]"
               for name, res in scenarios.items() if not res.passed
               for ck in res.checks if not ck.passed]
    assert not failing, f"scenario checks failed: {failing}"
