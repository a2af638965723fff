import math

import numpy as np
import pytest

from adaptlab.exceptions import InsufficientDataError
from adaptlab.signals import (PEWindowConfig, RegressorSignal,
                              evaluate_regressor, normalizing_signal,
                              pe_level, rbf_features)

HALF_PI = math.pi / 2


def sin_cos_signal():
    return RegressorSignal("sinusoid-bank", amplitudes=[1.0, 1.0],
                           frequencies=[1.0, 1.0], phases=[0.0, HALF_PI])


class TestEvaluateRegressor:
    def test_sinusoid_bank_at_zero(self):
        sig = sin_cos_signal()
        np.testing.assert_allclose(sig(0.0), [0.0, 1.0], atol=1e-15)

    def test_constant(self):
        sig = RegressorSignal("constant", value=[1.0, 0.0])
        for t in (0.0, 1.0, 123.4):
            np.testing.assert_array_equal(sig(t), [1.0, 0.0])

    def test_rbf_peak_at_center(self):
        inner = RegressorSignal("constant", value=[0.7])
        sig = RegressorSignal("rbf-map", centers=[[0.7]], width=0.3,
                              input_signal=inner)
        assert sig(5.0)[0] == pytest.approx(1.0)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            sin_cos_signal()(-1.0)

    def test_deterministic(self):
        sig = sin_cos_signal()
        np.testing.assert_array_equal(sig(2.37), sig(2.37))

    def test_piecewise_switching_cycles(self):
        sig = RegressorSignal("piecewise-switching",
                              values=[[1.0, 0.0], [10.0, 0.0]], period=2.0)
        np.testing.assert_array_equal(sig(0.5), [1.0, 0.0])
        np.testing.assert_array_equal(sig(2.5), [10.0, 0.0])
        np.testing.assert_array_equal(sig(4.5), [1.0, 0.0])

    def test_seeded_random_reproducible(self):
        a = RegressorSignal("seeded-random", dim=3, seed=11)
        b = RegressorSignal("seeded-random", dim=3, seed=11)
        ts = [0.0, 0.5, 1.0, 7.9]
        for t in ts:
            np.testing.assert_array_equal(a(t), b(t))
        c = RegressorSignal("seeded-random", dim=3, seed=12)
        assert not np.array_equal(a(1.0), c(1.0))

    def test_seeded_random_held_within_segment(self):
        sig = RegressorSignal("seeded-random", dim=2, seed=0, hold=1.0)
        np.testing.assert_array_equal(sig(0.1), sig(0.9))
        assert not np.array_equal(sig(0.5), sig(1.5))

    def test_finite_everywhere(self):
        sigs = [sin_cos_signal(),
                RegressorSignal("seeded-random", dim=4, seed=3)]
        for sig in sigs:
            for t in np.linspace(0, 50, 30):
                out = sig(float(t))
                assert out.shape == (sig.dim,)
                assert np.all(np.isfinite(out))

    def test_arrays_read_only(self):
        sig = sin_cos_signal()
        with pytest.raises(ValueError):
            sig.amplitudes[0] = 5.0


class TestRBFFeatures:
    def test_unit_at_center(self):
        out = rbf_features([[1.0, 2.0], [0.0, 0.0]], 0.5, [1.0, 2.0])
        assert out[0] == pytest.approx(1.0)

    def test_gaussian_tail_vanishes(self):
        out = rbf_features([[0.0]], 1.0, [50.0])
        assert out[0] < 1e-300

    def test_two_centers_symmetric_point(self):
        # direct evaluation oracle: exp(-1/2) on both sides
        expected = math.exp(-0.5)
        out = rbf_features([[0.0], [2.0]], 1.0, [1.0])
        np.testing.assert_allclose(out, [expected, expected], rtol=1e-15)

    def test_range(self):
        rng = np.random.default_rng(0)
        centers = rng.normal(size=(5, 3))
        for _ in range(20):
            out = rbf_features(centers, 0.7, rng.normal(size=3))
            assert np.all(out > 0) and np.all(out <= 1)

    def test_bad_width(self):
        with pytest.raises(ValueError):
            rbf_features([[0.0]], 0.0, [1.0])
        with pytest.raises(ValueError):
            rbf_features([[0.0]], -1.0, [1.0])


class TestNormalizingSignal:
    def test_mu_zero(self):
        assert normalizing_signal([3.0, -4.0], 0.0) == 1.0

    def test_unit_mu(self):
        assert normalizing_signal([1.0, 1.0], 1.0) == pytest.approx(3.0)

    def test_zero_regressor(self):
        assert normalizing_signal([0.0, 0.0], 0.5) == 1.0

    def test_at_least_one(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            phi = rng.normal(size=4)
            mu = rng.uniform(0, 5)
            assert normalizing_signal(phi, mu) >= 1.0

    def test_negative_mu_rejected(self):
        with pytest.raises(ValueError):
            normalizing_signal([1.0], -0.1)


def _sample(sig, t0, t1, dt):
    ts = t0 + dt * np.arange(int(round((t1 - t0) / dt)) + 1)
    return ts, np.array([sig(float(t)) for t in ts])


class TestPELevel:
    # grid chosen so the window is a whole number of steps
    DT = 2 * math.pi / 6000

    def test_sin_cos_level_is_pi(self):
        sig = sin_cos_signal()
        ts, samples = _sample(sig, 0.0, 6 * math.pi, self.DT)
        cfg = PEWindowConfig(window=2 * math.pi, step=self.DT)
        assert pe_level(ts, samples, cfg) == pytest.approx(math.pi, abs=1e-6)

    def test_constant_rank_deficient(self):
        sig = RegressorSignal("constant", value=[1.0, 0.0])
        ts, samples = _sample(sig, 0.0, 6 * math.pi, self.DT)
        cfg = PEWindowConfig(window=2 * math.pi, step=self.DT)
        assert pe_level(ts, samples, cfg) == pytest.approx(0.0, abs=1e-9)

    def test_collinear_components(self):
        ts = self.DT * np.arange(int(6 * math.pi / self.DT))
        samples = np.column_stack([np.sin(ts), np.sin(ts)])
        cfg = PEWindowConfig(window=2 * math.pi, step=self.DT)
        assert pe_level(ts, samples, cfg) == pytest.approx(0.0, abs=1e-9)

    def test_insufficient_samples(self):
        sig = sin_cos_signal()
        ts, samples = _sample(sig, 0.0, 1.0, 0.01)
        cfg = PEWindowConfig(window=2 * math.pi, step=0.01)
        with pytest.raises(InsufficientDataError):
            pe_level(ts, samples, cfg)

    def test_time_shift_invariance(self):
        # periodic signal shifted by its period gives the same level
        sig = sin_cos_signal()
        cfg = PEWindowConfig(window=2 * math.pi, step=self.DT)
        ts0, s0 = _sample(sig, 0.0, 8 * math.pi, self.DT)
        ts1, s1 = _sample(sig, 2 * math.pi, 10 * math.pi, self.DT)
        lvl0 = pe_level(ts0, s0, cfg)
        lvl1 = pe_level(ts1, s1, cfg)
        assert lvl1 == pytest.approx(lvl0, abs=1e-6)

    def test_quadratic_scaling(self):
        sig = sin_cos_signal()
        ts, samples = _sample(sig, 0.0, 6 * math.pi, self.DT)
        cfg = PEWindowConfig(window=2 * math.pi, step=self.DT)
        base = pe_level(ts, samples, cfg)
        for c in (0.5, 2.0, 3.0):
            scaled = pe_level(ts, c * samples, cfg)
            assert scaled == pytest.approx(c**2 * base, rel=1e-9)

    def test_window_config_validation(self):
        with pytest.raises(ValueError):
            PEWindowConfig(window=0.0, step=0.01)
        with pytest.raises(ValueError):
            PEWindowConfig(window=1.0, step=2.0)
