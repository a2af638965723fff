import math
import warnings

import numpy as np
import pytest

from adaptlab.error_models import (AlgebraicErrorModel, DynamicErrorModel,
                                   algebraic_output, check_spr,
                                   dynamic_derivatives, lyapunov_pair)
from adaptlab.exceptions import NotSPRError, NotStableError

# controllable-canonical realization of W(s) = (s + 1) / ((s + 2)(s + 3)):
# Re W(j w) = (6 + 4 w^2) / |6 - w^2 + 5 j w|^2 > 0 with w^2 Re W -> 4,
# so a positive definite KYP pair exists
A2 = np.array([[0.0, 1.0], [-6.0, -5.0]])
B2 = np.array([0.0, 1.0])
C2 = np.array([1.0, 1.0])


class TestAlgebraicOutput:
    def test_direct_arithmetic(self):
        model = AlgebraicErrorModel([1.0, 2.0])
        assert algebraic_output([0.0, 0.0], model, [1.0, 1.0]) == pytest.approx(-3.0)

    def test_zero_parameter_error(self):
        model = AlgebraicErrorModel([0.3, -0.7])
        rng = np.random.default_rng(0)
        for _ in range(10):
            phi = rng.normal(size=2)
            assert algebraic_output(model.theta_star, model, phi) == 0.0

    def test_zero_regressor(self):
        model = AlgebraicErrorModel([1.0, 2.0])
        assert algebraic_output([5.0, -5.0], model, [0.0, 0.0]) == 0.0

    def test_dimension_mismatch(self):
        model = AlgebraicErrorModel([1.0, 2.0])
        with pytest.raises(ValueError):
            algebraic_output([1.0], model, [1.0, 2.0])

    def test_linear_in_theta(self):
        model = AlgebraicErrorModel([1.0, -2.0, 0.5])
        rng = np.random.default_rng(2)
        for _ in range(50):
            th1, th2 = rng.normal(size=3), rng.normal(size=3)
            phi = rng.normal(size=3)
            a = rng.uniform()
            mix = algebraic_output(a * th1 + (1 - a) * th2, model, phi)
            parts = (a * algebraic_output(th1, model, phi)
                     + (1 - a) * algebraic_output(th2, model, phi))
            assert mix == pytest.approx(parts, abs=1e-12)


class TestCheckSPR:
    def test_scalar_certificate(self):
        cert = check_spr(-1.0, 1.0, 1.0)
        assert cert.P[0, 0] == pytest.approx(1.0, abs=1e-10)
        assert cert.Q[0, 0] == pytest.approx(2.0, abs=1e-10)

    def test_unstable_rejected(self):
        with pytest.raises(NotStableError):
            check_spr(1.0, 1.0, 1.0)

    def test_relative_degree_two_rejected(self):
        # W(s) = 1 / (s^2 + s + 1); oracle on the frequency grid shows
        # Re W(j w) = (1 - w^2) / |.|^2 < 0 at high frequency
        A = np.array([[0.0, 1.0], [-1.0, -1.0]])
        b = np.array([0.0, 1.0])
        c = np.array([1.0, 0.0])
        ws = np.logspace(-3, 3, 200)
        re = [np.real(c @ np.linalg.solve(1j * w * np.eye(2) - A, b)) for w in ws]
        assert min(re) < 0
        with pytest.raises(NotSPRError):
            check_spr(A, b, c)

    def test_second_order_certificate_residuals(self):
        cert = check_spr(A2, B2, C2, lam=-np.eye(2))
        assert np.linalg.norm(A2.T @ cert.P + cert.P @ A2 + cert.Q) <= 1e-8
        assert np.linalg.norm(cert.P @ B2 - C2) <= 1e-8
        assert np.min(np.linalg.eigvalsh(cert.P)) > 0
        assert np.min(np.linalg.eigvalsh(cert.Q)) > 0
        lam = -np.eye(2)
        assert np.linalg.norm(lam.T @ cert.P_bar + cert.P_bar @ lam + cert.Q_bar) <= 1e-8

    def test_nonminimal_warns(self):
        # b in the kernel of the second mode: uncontrollable
        A = np.diag([-1.0, -2.0])
        b = np.array([1.0, 0.0])
        c = np.array([1.0, 0.0])
        with pytest.warns(UserWarning):
            try:
                check_spr(A, b, c)
            except NotSPRError:
                pass

    def test_lyapunov_pair_requires_hurwitz(self):
        with pytest.raises(NotStableError):
            lyapunov_pair(np.eye(2))
        p_bar, q_bar = lyapunov_pair(-2.0 * np.eye(3))
        assert np.allclose(p_bar, np.eye(3) / 4.0)
        assert np.allclose(q_bar, np.eye(3))


def rk4(f, x, t, dt):
    k1 = f(t, x)
    k2 = f(t + dt / 2, x + dt / 2 * k1)
    k3 = f(t + dt / 2, x + dt / 2 * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class TestDynamicDerivatives:
    def make_model(self, **kw):
        return DynamicErrorModel(A=[[-1.0]], b=[1.0], c=[1.0],
                                 lam=-np.eye(2), theta_star=[1.0, -1.0], **kw)

    def test_equilibrium(self):
        model = self.make_model()
        e_dot, pt_dot, e_y = dynamic_derivatives(
            model, model.theta_star, [0.3, 0.4], e=[0.0], phi_tilde=[0.0, 0.0])
        assert np.all(e_dot == 0) and np.all(pt_dot == 0) and e_y == 0.0

    def test_first_order_step_response(self):
        # theta_err^T phi_hat == 1 held constant: e(t) = 1 - exp(-t);
        # the integrator cross-checks the closed form
        model = DynamicErrorModel(A=[[-1.0]], b=[1.0], c=[1.0],
                                  lam=[[-1.0]], theta_star=[0.0])
        theta = np.array([1.0])
        phi = np.array([1.0])

        def f(t, e):
            e_dot, _, _ = dynamic_derivatives(model, theta, phi, e=e,
                                              phi_tilde=np.zeros(1))
            return e_dot

        e = np.zeros(1)
        dt = 1e-3
        for i in range(1000):
            e = rk4(f, e, i * dt, dt)
        assert e[0] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)

    def test_filter_error_decay(self):
        model = self.make_model(phi_tilde0=[0.6, -0.8])
        pt = model.phi_tilde.copy()
        dt = 1e-3

        def f(t, x):
            _, pt_dot, _ = dynamic_derivatives(model, model.theta_star,
                                               [0.0, 0.0], e=[0.0], phi_tilde=x)
            return pt_dot

        for i in range(2000):
            pt = rk4(f, pt, i * dt, dt)
        assert np.linalg.norm(pt) == pytest.approx(math.exp(-2.0), abs=1e-8)

    def test_true_parameter_transient_dies(self):
        # theta held at theta_star, phi_tilde(0) = 0: e decays exponentially
        # and the output-error energy integral is finite
        model = self.make_model(e0=[1.0])
        state = np.concatenate([model.e, model.phi_tilde])
        phi = np.array([0.5, 0.5])

        def f(t, x):
            e_dot, pt_dot, _ = dynamic_derivatives(model, model.theta_star, phi,
                                                   e=x[:1], phi_tilde=x[1:])
            return np.concatenate([e_dot, pt_dot])

        dt = 1e-3
        energy = 0.0
        prev = float(model.c @ state[:1]) ** 2
        for i in range(10000):
            state = rk4(f, state, i * dt, dt)
            cur = float(model.c @ state[:1]) ** 2
            energy += 0.5 * dt * (prev + cur)
            prev = cur
        assert abs(state[0]) < 1e-4
        assert energy < 1.0

    def test_alpha_default(self):
        model = self.make_model()
        pb = model.cert.P @ model.b
        bound = (4 * float(pb @ pb) * 2.0
                 / (np.min(np.linalg.eigvalsh(model.cert.Q))
                    * np.min(np.linalg.eigvalsh(model.cert.Q_bar))))
        assert model.alpha_bound() == pytest.approx(bound)
        assert model.alpha_default() == pytest.approx(2 * bound)
        trivial = DynamicErrorModel(A=[[-1.0]], b=[1.0], c=[1.0],
                                    lam=[[-1.0]], theta_star=[0.0])
        assert trivial.alpha_default() == 1.0

    def test_construction_rejects_unstable_lambda(self):
        with pytest.raises(NotStableError):
            DynamicErrorModel(A=[[-1.0]], b=[1.0], c=[1.0],
                              lam=np.eye(2), theta_star=[1.0, -1.0])

    def test_delta_formula(self):
        model = self.make_model(e0=[0.5], phi_tilde0=[0.5, -0.5])
        pb = float((model.cert.P @ model.b)[0])
        expected = 2 * 0.5 * pb * float(model.theta_star @ model.phi_tilde)
        assert model.delta() == pytest.approx(expected)
