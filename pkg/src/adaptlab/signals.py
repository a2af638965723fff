"""Regressor signal generators and excitation diagnostics.

A regressor signal maps time t >= 0 to a vector phi(t) of length ``dim``.
Generators are immutable after construction, so one instance can be shared
by concurrent experiment workers.
"""

import numpy as np

from .exceptions import InsufficientDataError

SIGNAL_KINDS = (
    "constant",
    "sinusoid-bank",
    "rbf-map",
    "piecewise-switching",
    "seeded-random",
)


def rbf_features(centers, width, x):
    """Gaussian radial-basis feature vector for input x.

    Component i is exp(-||x - centers[i]||^2 / (2 width^2)), so every
    component lies in (0, 1] and equals 1 exactly at the center.
    """
    if width <= 0:
        raise ValueError(f"rbf width must be > 0, got {width}")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.size == 0:
        raise ValueError("rbf centers must be nonempty")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d2 = np.sum((centers - x[None, :]) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * width**2))


def normalizing_signal(phi, mu):
    """Regressor-based normalization 1 + mu * phi^T phi (always >= 1)."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    phi = np.asarray(phi, dtype=float)
    return 1.0 + mu * float(phi @ phi)


class RegressorSignal:
    """Deterministic time-indexed regressor phi(t).

    kind 'constant':            phi(t) = value
    kind 'sinusoid-bank':       phi_i(t) = amplitudes[i] * sin(frequencies[i] t + phases[i])
    kind 'rbf-map':             phi(t) = rbf_features(centers, width, x(t)) for an
                                inner input signal x
    kind 'piecewise-switching': phi(t) = values[floor(t / period) mod n_segments]
    kind 'seeded-random':       piecewise-constant standard-normal draws held for
                                `hold` seconds, generated by a Philox counter-based
                                stream keyed by `seed` (identical on every platform)

    Instances are immutable; arrays are copied and marked read-only.
    """

    def __init__(self, kind, dim=None, *, value=None, amplitudes=None,
                 frequencies=None, phases=None, centers=None, width=None,
                 input_signal=None, values=None, period=None, seed=0,
                 hold=1.0, amplitude=1.0):
        if kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {kind!r}; choose from {SIGNAL_KINDS}")
        self.kind = kind

        if kind == "constant":
            self.value = self._frozen(value, "value")
            self.dim = self.value.size
        elif kind == "sinusoid-bank":
            self.amplitudes = self._frozen(amplitudes, "amplitudes")
            self.frequencies = self._frozen(frequencies, "frequencies")
            self.phases = self._frozen(phases, "phases")
            if not (self.amplitudes.size == self.frequencies.size == self.phases.size):
                raise ValueError("amplitudes, frequencies, phases must share a length")
            self.dim = self.amplitudes.size
        elif kind == "rbf-map":
            if width is None or width <= 0:
                raise ValueError("rbf-map requires width > 0")
            self.centers = np.atleast_2d(np.asarray(centers, dtype=float)).copy()
            self.centers.setflags(write=False)
            self.width = float(width)
            if input_signal is None:
                raise ValueError("rbf-map requires an input_signal")
            self.input_signal = input_signal
            if input_signal.dim != self.centers.shape[1]:
                raise ValueError("input_signal dim must match center dimension")
            self.dim = self.centers.shape[0]
        elif kind == "piecewise-switching":
            self.values = np.atleast_2d(np.asarray(values, dtype=float)).copy()
            self.values.setflags(write=False)
            if period is None or period <= 0:
                raise ValueError("piecewise-switching requires period > 0")
            self.period = float(period)
            self.dim = self.values.shape[1]
        else:  # seeded-random
            if dim is None or dim < 1:
                raise ValueError("seeded-random requires dim >= 1")
            if hold <= 0:
                raise ValueError("hold must be > 0")
            self.dim = int(dim)
            self.seed = int(seed)
            self.hold = float(hold)
            self.amplitude = float(amplitude)

        if dim is not None and int(dim) != self.dim:
            raise ValueError(f"declared dim {dim} != inferred dim {self.dim}")

    @staticmethod
    def _frozen(arr, name):
        if arr is None:
            raise ValueError(f"missing required parameter {name!r}")
        out = np.atleast_1d(np.asarray(arr, dtype=float)).copy()
        if not np.all(np.isfinite(out)):
            raise ValueError(f"{name} must be finite")
        out.setflags(write=False)
        return out

    def __call__(self, t):
        return evaluate_regressor(self, t)


def evaluate_regressor(sig, t):
    """Evaluate phi(t); total for t >= 0 and deterministic given (sig, t)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    kind = sig.kind
    if kind == "constant":
        return sig.value.copy()
    if kind == "sinusoid-bank":
        return sig.amplitudes * np.sin(sig.frequencies * t + sig.phases)
    if kind == "rbf-map":
        x = evaluate_regressor(sig.input_signal, t)
        return rbf_features(sig.centers, sig.width, x)
    if kind == "piecewise-switching":
        seg = int(t / sig.period) % sig.values.shape[0]
        return sig.values[seg].copy()
    # seeded-random: draw the segment's block from a counter-based stream so
    # evaluation at arbitrary t needs no stored state
    seg = int(t / sig.hold)
    bg = np.random.Philox(key=sig.seed)
    bg.advance(2 * seg * sig.dim)  # normals consume up to 2 draws each
    return sig.amplitude * np.random.Generator(bg).standard_normal(sig.dim)


class PEWindowConfig:
    """Sliding-window setup for the excitation level.

    window: integration window length T_w (seconds); step: quadrature grid
    spacing; tol: eigenvalue floor above which the signal counts as
    persistently exciting at the returned level.
    """

    def __init__(self, window, step, tol=0.0):
        if window <= 0:
            raise ValueError("window length must be > 0")
        if not step < window:
            raise ValueError("quadrature step must be < window length")
        if tol < 0:
            raise ValueError("eigenvalue tolerance must be >= 0")
        self.window = float(window)
        self.step = float(step)
        self.tol = float(tol)


def pe_level(times, samples, cfg):
    """Worst-window excitation level of a sampled regressor.

    Returns min over sliding windows [t, t + T_w] of the smallest
    eigenvalue of the Gram integral of phi phi^T, computed with the
    trapezoidal rule on the sample grid. A level above cfg.tol certifies
    persistence of excitation at that level; rank-deficient signals give 0.
    """
    times = np.asarray(times, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if times.size != samples.shape[0]:
        raise ValueError("times and samples must align")
    if times.size < 2 or times[-1] - times[0] < cfg.window:
        raise InsufficientDataError(
            f"samples span {times[-1] - times[0] if times.size else 0.0:g} s "
            f"but one window needs {cfg.window:g} s")

    dt = float(times[1] - times[0])
    if not np.allclose(np.diff(times), dt, rtol=0, atol=1e-9 * max(dt, 1.0)):
        raise ValueError("pe_level expects a uniform sample grid")

    w = int(round(cfg.window / dt))
    if w < 1 or w >= times.size:
        raise InsufficientDataError("window does not fit the sample grid")

    outer = np.einsum("ti,tj->tij", samples, samples)
    # trapezoid cumulative integral of the outer-product stream
    seg = 0.5 * dt * (outer[1:] + outer[:-1])
    cums = np.concatenate([np.zeros((1,) + outer.shape[1:]), np.cumsum(seg, axis=0)])
    grams = cums[w:] - cums[:-w]

    eigs = np.linalg.eigvalsh(grams)
    return float(np.min(eigs[:, 0]))
