import math

import numpy as np
import pytest

from adaptlab.losses import ERMBatch, LossSpec, erm_grad, loss_grad, loss_value

SQ = LossSpec("squared")
LP4 = LossSpec("lp", p=4)
HINGE = LossSpec("hinge")
LOGISTIC = LossSpec("logistic")


def fd_grad(spec, theta, phi, y, h=1e-5):
    """Central finite-difference oracle, independent of loss_grad."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        out[i] = (loss_value(spec, up, phi, y) - loss_value(spec, dn, phi, y)) / (2 * h)
    return out


class TestLossValue:
    def test_squared_zero_at_target(self):
        assert loss_value(SQ, [0.5, 0.5], [1.0, 1.0], 1.0) == 0.0

    def test_hinge_margin_boundary(self):
        assert loss_value(HINGE, [1.0], [1.0], 1) == 0.0

    def test_logistic_at_zero_margin(self):
        assert loss_value(LOGISTIC, [0.0], [1.0], 1) == pytest.approx(math.log(2))

    def test_lp_requires_even_p(self):
        with pytest.raises(ValueError):
            LossSpec("lp", p=3)
        with pytest.raises(ValueError):
            LossSpec("lp", p=0)

    def test_classification_label_checked(self):
        for spec in (HINGE, LOGISTIC):
            with pytest.raises(ValueError):
                loss_value(spec, [1.0], [1.0], 0.5)

    def test_nonnegative_and_zero_iff(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            theta = rng.normal(size=3)
            phi = rng.normal(size=3)
            y = rng.normal()
            for spec in (SQ, LP4):
                v = loss_value(spec, theta, phi, y)
                assert v >= 0
                assert (v == 0) == (float(theta @ phi) == y)
            yl = 1 if rng.uniform() < 0.5 else -1
            assert loss_value(HINGE, theta, phi, yl) >= 0
            assert loss_value(LOGISTIC, theta, phi, yl) >= 0

    def test_logistic_no_overflow(self):
        assert np.isfinite(loss_value(LOGISTIC, [1000.0], [1.0], -1))
        assert loss_value(LOGISTIC, [1000.0], [1.0], 1) == pytest.approx(0.0, abs=1e-300)


class TestLossGrad:
    def test_squared_formula(self):
        # e_y = 2 with phi = (1, 0)
        np.testing.assert_allclose(loss_grad(SQ, [2.0, 5.0], [1.0, 0.0], 0.0),
                                   [2.0, 0.0])

    def test_hinge_kink_inactive(self):
        g = loss_grad(HINGE, [1.0], [1.0], 1)  # 1 - y yhat == 0 exactly
        np.testing.assert_array_equal(g, [0.0])

    def test_hinge_active_branch(self):
        np.testing.assert_allclose(loss_grad(HINGE, [0.0, 0.0], [2.0, 1.0], 1),
                                   [-2.0, -1.0])

    def test_logistic_matches_fd_at_spec_point(self):
        theta, phi, y = np.array([0.3, -0.7]), np.array([1.0, 2.0]), 1
        an = loss_grad(LOGISTIC, theta, phi, y)
        fd = fd_grad(LOGISTIC, theta, phi, y)
        np.testing.assert_allclose(an, fd, rtol=1e-6)

    def test_all_gradients_match_fd(self):
        # 100 random points per loss; relative error 1e-6; hinge kink excluded
        rng = np.random.default_rng(42)
        for spec in (SQ, LP4, LOGISTIC, HINGE):
            checked = 0
            while checked < 100:
                theta = rng.normal(size=3)
                phi = rng.normal(size=3)
                if spec.kind in ("hinge", "logistic"):
                    y = 1 if rng.uniform() < 0.5 else -1
                    if spec.kind == "hinge" and abs(1 - y * float(theta @ phi)) < 5e-2:
                        continue
                else:
                    y = rng.normal()
                    if spec.kind == "lp" and abs(float(theta @ phi) - y) < 1e-2:
                        continue  # fd loses digits near the flat minimum
                an = loss_grad(spec, theta, phi, y)
                fd = fd_grad(spec, theta, phi, y)
                np.testing.assert_allclose(an, fd, rtol=1e-6, atol=1e-9)
                checked += 1

    def test_lp_sign_correct(self):
        g_pos = loss_grad(LP4, [2.0], [1.0], 0.0)
        g_neg = loss_grad(LP4, [-2.0], [1.0], 0.0)
        assert g_pos[0] == pytest.approx(8.0)   # e^3 = 8
        assert g_neg[0] == pytest.approx(-8.0)


class TestERM:
    def test_singleton_equals_loss_grad(self):
        batch = ERMBatch(phis=[[1.0, 2.0]], ys=[0.5])
        theta = np.array([0.3, 0.4])
        np.testing.assert_array_equal(erm_grad(SQ, theta, batch),
                                      loss_grad(SQ, theta, [1.0, 2.0], 0.5))

    def test_duplicates_idempotent(self):
        theta = np.array([0.2, -0.1])
        once = erm_grad(SQ, theta, ERMBatch(phis=[[1.0, 1.0]], ys=[1.0]))
        twice = erm_grad(SQ, theta,
                         ERMBatch(phis=[[1.0, 1.0], [1.0, 1.0]], ys=[1.0, 1.0]))
        np.testing.assert_allclose(once, twice)

    def test_opposite_gradients_cancel(self):
        theta = np.zeros(2)
        batch = ERMBatch(phis=[[1.0, 0.0], [1.0, 0.0]], ys=[1.0, -1.0])
        np.testing.assert_allclose(erm_grad(SQ, theta, batch), [0.0, 0.0],
                                   atol=1e-15)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            ERMBatch(phis=np.zeros((0, 2)), ys=np.zeros(0))
