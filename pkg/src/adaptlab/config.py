"""Experiment configuration: TOML ingestion, validation, object building.

A config file is TOML with tables [experiment], [signal], [model], [law],
[loss], [analysis]. Matrices appear as row-major nested arrays. Validation
collects every problem (annotated with its field path) before raising one
ConfigError, so a file can be repaired in a single pass.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import tomli

from . import continuous_laws as claws
from . import simulate as _sim
from .discrete_laws import (AdaptiveStepState, ConvexFeasibleSet,
                            RegularizerSpec, StepSchedule)
from .error_models import AlgebraicErrorModel, DynamicErrorModel
from .exceptions import ConfigError
from .losses import LossSpec
from .signals import SIGNAL_KINDS, RegressorSignal

CONTINUOUS_LAWS = ("gradient-flow", "sigma-mod", "e-mod", "deadzone",
                   "projection", "time-varying-gain", "higher-order-tuner")
DISCRETE_LAWS = ("gd", "rftl", "projected-gd", "adagrad", "adam", "nesterov")


@dataclass
class ExperimentConfig:
    name: str
    mode: str
    horizon: float
    dt: float
    seed: int
    decimate: int
    theta0: np.ndarray
    theta_star: np.ndarray
    q_weight: float
    alpha: float
    analysis: dict
    signal: RegressorSignal
    model: object
    loss: LossSpec
    law: object
    v_gain: float  # gamma used for the logged Lyapunov column
    raw: dict = field(repr=False, default=None)


def load_toml(path):
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _vector(raw, path, problems, required=True):
    val = raw
    if val is None:
        if required:
            problems.append(f"{path}: required")
        return None
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"{path}: must be a numeric array")
        return None
    if not np.all(np.isfinite(arr)):
        problems.append(f"{path}: entries must be finite")
        return None
    return arr


def _build_signal(tbl, problems, prefix="signal"):
    kind = tbl.get("kind")
    if kind not in SIGNAL_KINDS:
        problems.append(f"{prefix}.kind: must be one of {SIGNAL_KINDS}, got {kind!r}")
        return None
    kwargs = {}
    try:
        if kind == "constant":
            kwargs["value"] = tbl.get("value")
        elif kind == "sinusoid-bank":
            for key in ("amplitudes", "frequencies", "phases"):
                kwargs[key] = tbl.get(key)
        elif kind == "rbf-map":
            kwargs["centers"] = tbl.get("centers")
            kwargs["width"] = tbl.get("width")
            inner = tbl.get("input")
            if inner is None:
                problems.append(f"{prefix}.input: rbf-map needs an inner signal table")
                return None
            kwargs["input_signal"] = _build_signal(inner, problems,
                                                   prefix=f"{prefix}.input")
            if kwargs["input_signal"] is None:
                return None
        elif kind == "piecewise-switching":
            kwargs["values"] = tbl.get("values")
            kwargs["period"] = tbl.get("period")
        else:  # seeded-random
            kwargs["dim"] = tbl.get("dim")
            kwargs["seed"] = tbl.get("seed", 0)
            kwargs["hold"] = tbl.get("hold", 1.0)
            kwargs["amplitude"] = tbl.get("amplitude", 1.0)
        if "dim" in tbl and kind != "seeded-random":
            kwargs["dim"] = tbl["dim"]
        return RegressorSignal(kind, **kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"{prefix}: {exc}")
        return None


def _build_model(tbl, theta_star, problems):
    kind = tbl.get("kind", "algebraic")
    if kind == "algebraic":
        return AlgebraicErrorModel(theta_star)
    if kind != "dynamic":
        problems.append(f"model.kind: must be 'algebraic' or 'dynamic', got {kind!r}")
        return None
    try:
        return DynamicErrorModel(
            A=tbl.get("A"), b=tbl.get("b"), c=tbl.get("c"), lam=tbl.get("lam"),
            theta_star=theta_star,
            e0=tbl.get("e0"), phi_tilde0=tbl.get("phi_tilde0"))
    except Exception as exc:  # construction enforces Hurwitz + SPR
        problems.append(f"model: {exc}")
        return None


def _build_loss(tbl, problems):
    try:
        return LossSpec(kind=tbl.get("kind", "squared"), p=int(tbl.get("p", 2)))
    except ValueError as exc:
        problems.append(f"loss: {exc}")
        return None


def _build_continuous_law(tbl, dim, problems):
    kind = tbl.get("kind")
    gain = float(tbl.get("gain", 1.0))
    try:
        if kind == "gradient-flow":
            return claws.GradientFlow(gain=gain)
        if kind in ("sigma-mod", "e-mod"):
            return claws.SigmaModification(
                gain=gain, sigma=float(tbl.get("sigma", 0.1)),
                mod_kind="sigma" if kind == "sigma-mod" else "e-mod")
        if kind == "deadzone":
            return claws.Deadzone(gain=gain, d0=float(tbl.get("d0", 0.1)),
                                  eps=float(tbl.get("eps", 0.01)))
        if kind == "projection":
            return claws.ProjectionLaw(gain=gain,
                                       theta_max=tbl.get("theta_max"),
                                       theta_inner=tbl.get("theta_inner"))
        if kind == "time-varying-gain":
            return claws.TimeVaryingGain(
                gain=gain, forgetting=float(tbl.get("forgetting", 0.0)),
                mu=float(tbl.get("mu", 1.0)),
                gamma_max=float(tbl.get("gamma_max", 10.0)),
                Gamma0=tbl.get("Gamma0"), dim=dim)
        # higher-order-tuner
        return claws.HigherOrderTuner(
            gain=gain, beta=float(tbl.get("beta", 1.0)),
            mu=float(tbl.get("mu", 1.0)), vartheta0=tbl.get("vartheta0"))
    except (TypeError, ValueError) as exc:
        problems.append(f"law: {exc}")
        return None


def _build_set(tbl, problems):
    if tbl is None:
        return None
    try:
        kind = tbl.get("kind")
        if kind == "box":
            return ConvexFeasibleSet.box(tbl.get("lower"), tbl.get("upper"))
        if kind == "euclidean-ball":
            return ConvexFeasibleSet.ball(tbl.get("center"), tbl.get("radius"))
        problems.append(f"law.set.kind: must be 'box' or 'euclidean-ball', got {kind!r}")
    except (TypeError, ValueError) as exc:
        problems.append(f"law.set: {exc}")
    return None


def _build_discrete_runner(tbl, theta0, problems):
    kind = tbl.get("kind")
    try:
        schedule = StepSchedule(kind=tbl.get("schedule", "constant"),
                                gamma0=float(tbl.get("gamma0", 1.0)))
    except ValueError as exc:
        problems.append(f"law.schedule: {exc}")
        return None, 1.0
    feasible = _build_set(tbl.get("set"), problems)
    try:
        if kind == "gd":
            return _sim._GDRunner(schedule), schedule.gamma0
        if kind == "rftl":
            reg = RegularizerSpec(kind=tbl.get("reg_kind", "l2"),
                                  sigma=float(tbl.get("sigma", 0.0)))
            return _sim._RFTLRunner(schedule, reg), schedule.gamma0
        if kind == "projected-gd":
            if feasible is None:
                problems.append("law.set: projected-gd requires a feasible set")
                return None, schedule.gamma0
            return _sim._ProjectedGDRunner(schedule, feasible), schedule.gamma0
        if kind in ("adagrad", "adam"):
            state = AdaptiveStepState(
                parameterization=kind,
                beta1=float(tbl.get("beta1", 0.9)),
                beta2=float(tbl.get("beta2", 0.999)),
                eps_ada=float(tbl.get("eps_ada", 0.0)))
            return (_sim._AdaptiveRunner(schedule, feasible, state, theta0.size),
                    schedule.gamma0)
        # nesterov
        return (_sim._NesterovRunner(gamma=schedule.gamma0,
                                     beta=float(tbl.get("beta", 0.0)),
                                     theta0=theta0),
                schedule.gamma0)
    except (TypeError, ValueError) as exc:
        problems.append(f"law: {exc}")
        return None, schedule.gamma0


def validate_experiment(raw, name=None):
    """Build an ExperimentConfig from a raw dict, or raise ConfigError
    listing every violated field."""
    problems = []
    exp = raw.get("experiment", {})

    mode = exp.get("mode")
    if mode not in ("continuous", "discrete"):
        problems.append("experiment.mode: must be 'continuous' or 'discrete', "
                        f"got {mode!r}")

    horizon = exp.get("horizon")
    if horizon is None or not horizon > 0:
        problems.append(f"experiment.horizon: must be > 0, got {horizon!r}")
        horizon = 1.0

    dt = float(exp.get("dt", 1e-3))
    if mode == "continuous":
        if dt <= 0:
            problems.append(f"experiment.dt: must be > 0, got {dt}")
        elif dt > horizon / 100.0:
            problems.append(
                f"experiment.dt: must be <= horizon/100 = {horizon / 100.0:g}, got {dt}")
    if mode == "discrete":
        if int(horizon) != horizon or horizon < 1:
            problems.append("experiment.horizon: discrete mode needs a positive "
                            f"integer step count, got {horizon!r}")

    seed = int(exp.get("seed", 0))
    decimate = int(exp.get("decimate", 1))
    if decimate < 1:
        problems.append(f"experiment.decimate: must be >= 1, got {decimate}")

    theta0 = _vector(exp.get("theta0"), "experiment.theta0", problems)
    theta_star = _vector(exp.get("theta_star"), "experiment.theta_star", problems)
    if theta0 is not None and theta_star is not None and theta0.shape != theta_star.shape:
        problems.append("experiment.theta0: shape differs from theta_star")

    q_weight = float(exp.get("q_weight", 1.0))
    alpha = exp.get("alpha")
    allow_unsafe = bool(exp.get("allow_unsafe_pairing", False))

    signal_tbl = dict(raw.get("signal", {}))
    if signal_tbl.get("kind") == "seeded-random" and "seed" not in signal_tbl:
        signal_tbl["seed"] = seed  # experiment seed drives the stream by default
    signal = _build_signal(signal_tbl, problems)
    if signal is not None and theta0 is not None and signal.dim != theta0.size:
        problems.append(
            f"signal: dimension {signal.dim} does not match theta0 ({theta0.size})")

    loss = _build_loss(raw.get("loss", {}), problems)

    model = None
    if theta_star is not None:
        model = _build_model(raw.get("model", {}), theta_star, problems)

    law_tbl = raw.get("law", {})
    law_kind = law_tbl.get("kind")
    law = None
    v_gain = 1.0
    if law_kind in CONTINUOUS_LAWS:
        if mode == "discrete":
            problems.append(f"law.kind: {law_kind!r} is a continuous law; "
                            "continuous laws pair only with continuous simulation")
        elif theta0 is not None:
            law = _build_continuous_law(law_tbl, theta0.size, problems)
            if law is not None:
                v_gain = law.gain
    elif law_kind in DISCRETE_LAWS:
        if mode == "continuous":
            problems.append(f"law.kind: {law_kind!r} is a discrete optimizer; "
                            "it pairs only with discrete simulation")
        elif theta0 is not None:
            law, v_gain = _build_discrete_runner(law_tbl, theta0, problems)
    else:
        problems.append(f"law.kind: unknown kind {law_kind!r}; continuous kinds "
                        f"{CONTINUOUS_LAWS}, discrete kinds {DISCRETE_LAWS}")

    if isinstance(model, DynamicErrorModel):
        if mode == "discrete":
            problems.append("model.kind: the dynamic error model pairs only with "
                            "continuous simulation")
        if loss is not None and loss.kind != "squared":
            problems.append("loss.kind: the dynamic error model supports only the "
                            "squared loss (gradient-like law)")
        if law_kind == "time-varying-gain" and not allow_unsafe:
            problems.append(
                "law.kind: time-varying-gain with the dynamic error model is not "
                "proven stable; set experiment.allow_unsafe_pairing = true to force")

    if problems:
        raise ConfigError(problems)

    return ExperimentConfig(
        name=name or exp.get("name", "experiment"),
        mode=mode, horizon=float(horizon), dt=dt, seed=seed, decimate=decimate,
        theta0=theta0, theta_star=theta_star, q_weight=q_weight,
        alpha=None if alpha is None else float(alpha),
        analysis=dict(raw.get("analysis", {})),
        signal=signal, model=model, loss=loss, law=law, v_gain=v_gain, raw=raw)


def load_experiment(path, overrides=None):
    """Load and validate a single-experiment TOML file.

    `overrides` maps dotted paths ('experiment.dt') to replacement values,
    applied before validation (used by the CLI flags).
    """
    raw = load_toml(path)
    if overrides:
        for dotted, value in overrides.items():
            tbl = raw
            parts = dotted.split(".")
            for part in parts[:-1]:
                tbl = tbl.setdefault(part, {})
            tbl[parts[-1]] = value
    name = raw.get("experiment", {}).get("name")
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]
    return validate_experiment(raw, name=name)
