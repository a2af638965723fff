"""Losses on the scalar output error and their parameter gradients.

All losses act on the linear prediction yhat = theta^T phi against a target
y (a real value for regression kinds, a label in {-1, +1} for
classification kinds). Pure functions; shared by the continuous and
discrete update laws.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LOSS_KINDS = ("squared", "lp", "hinge", "logistic")
_CLASSIFICATION = ("hinge", "logistic")


@dataclass(frozen=True)
class LossSpec:
    kind: str = "squared"
    p: int = 2  # only read for kind 'lp'; must be a positive even integer

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "lp" and (self.p <= 0 or self.p % 2 != 0):
            raise ValueError(f"lp loss requires even p > 0, got p={self.p}")


@dataclass(frozen=True)
class ERMBatch:
    """m regressor/target pairs averaged into one empirical-risk gradient."""

    phis: np.ndarray  # (m, N)
    ys: np.ndarray    # (m,)

    def __post_init__(self):
        phis = np.atleast_2d(np.asarray(self.phis, dtype=float))
        ys = np.atleast_1d(np.asarray(self.ys, dtype=float))
        if phis.shape[0] == 0:
            raise ValueError("ERM batch must contain at least one sample")
        if phis.shape[0] != ys.shape[0]:
            raise ValueError("batch phis and ys must align")
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "ys", ys)

    @property
    def m(self):
        return self.phis.shape[0]


def _check_label(spec, y):
    if spec.kind in _CLASSIFICATION and y not in (-1, 1):
        raise ValueError(f"{spec.kind} loss requires y in {{-1, +1}}, got {y}")


def loss_value(spec, theta, phi, y):
    """Nonnegative loss at prediction theta^T phi against target y."""
    _check_label(spec, y)
    yhat = float(np.dot(theta, phi))
    if spec.kind == "squared":
        return 0.5 * (yhat - y) ** 2
    if spec.kind == "lp":
        return abs(yhat - y) ** spec.p / spec.p
    if spec.kind == "hinge":
        return max(0.0, 1.0 - y * yhat)
    # logistic, in overflow-safe form
    return float(np.logaddexp(0.0, -y * yhat))


def loss_grad(spec, theta, phi, y):
    """Gradient (subgradient for hinge) of loss_value w.r.t. theta."""
    _check_label(spec, y)
    phi = np.asarray(phi, dtype=float)
    yhat = float(np.dot(theta, phi))
    e = yhat - y
    if spec.kind == "squared":
        return phi * e
    if spec.kind == "lp":
        # |e|^{p-2} e is the sign-correct form of e^{p-1} for even p
        return phi * (abs(e) ** (spec.p - 2) * e)
    if spec.kind == "hinge":
        if 1.0 - y * yhat > 0.0:
            return -y * phi
        return np.zeros_like(phi)  # kink decided as the inactive branch
    s = expit(-y * yhat)  # exp(-y yhat) / (1 + exp(-y yhat)), stable
    return -y * phi * s


def erm_grad(spec, theta, batch):
    """Average of loss_grad over the batch (empirical-risk gradient)."""
    grads = [loss_grad(spec, theta, batch.phis[i], batch.ys[i])
             for i in range(batch.m)]
    return np.mean(grads, axis=0)
