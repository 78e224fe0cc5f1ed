import math

import numpy as np
import pytest

from geoslide.analysis import (
    SimTrace,
    certify_bound,
    driven_decay_solution,
    fit_exponential,
    forward_dini,
    integrate_scalar_ode,
    overshoot_envelope,
    separable_ode_loose_bound,
    separable_ode_solution,
)


class TestFitExponential:
    def test_exact_exponential(self):
        t = np.linspace(0, 5, 400)
        fit = fit_exponential(t, 5.0 * np.exp(-2.0 * t))
        assert fit.rate == pytest.approx(2.0, abs=1e-6)
        assert fit.overshoot == pytest.approx(1.0, abs=1e-9)
        assert fit.residual < 1e-10
        assert fit.amplitude == pytest.approx(5.0, rel=1e-6)

    def test_perturbed_exponential(self):
        t = np.linspace(0, 5, 2000)
        v = 5.0 * np.exp(-2.0 * t) * (1.0 + 0.01 * np.sin(10.0 * t))
        fit = fit_exponential(t, v)
        assert fit.rate == pytest.approx(2.0, abs=2e-2)
        assert fit.overshoot >= 1.0

    def test_constant_series(self):
        t = np.linspace(0, 3, 100)
        fit = fit_exponential(t, np.full_like(t, 0.7))
        assert abs(fit.rate) < 1e-9

    def test_window_selection(self):
        t = np.linspace(0, 10, 1000)
        v = np.where(t < 5, 1.0, np.exp(-3.0 * (t - 5)))
        fit = fit_exponential(t, v, window=(6.0, 10.0))
        assert fit.rate == pytest.approx(3.0, abs=1e-6)
        assert fit.fit_window[0] >= 6.0

    def test_too_few_samples(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(ValueError):
            fit_exponential(t, np.exp(-t))


class TestSeparableOde:
    def test_zero_initial_condition(self):
        t = np.linspace(0, 10, 50)
        np.testing.assert_allclose(separable_ode_solution(0.0, 1.0, t), np.zeros(50))

    def test_initial_condition_recovered(self):
        for x0 in (0.1, 0.5, 0.9, 0.99):
            assert separable_ode_solution(x0, 1.3, 0.0) == pytest.approx(x0, abs=1e-12)

    @pytest.mark.parametrize("x0", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_matches_numeric_integration(self, x0, sigma):
        t = np.linspace(0.0, 10.0, 2001)
        exact = separable_ode_solution(x0, sigma, t)
        numeric = integrate_scalar_ode(
            lambda _t, x: -sigma * x * math.sqrt(max(0.0, 1.0 - x)), x0, t
        )
        assert np.max(np.abs(exact - numeric)) < 1e-8

    def test_loose_bound_dominates(self):
        t = np.linspace(0.0, 10.0, 500)
        for x0 in (0.1, 0.9):
            exact = separable_ode_solution(x0, 1.0, t)
            loose = separable_ode_loose_bound(x0, 1.0, t)
            assert np.all(exact <= loose * (1.0 + 1e-12))

    def test_satisfies_its_own_ode(self):
        # finite differences of the closed form match the right-hand side
        h = 1e-6
        for t in (0.3, 1.0, 4.0):
            x = float(separable_ode_solution(0.7, 1.2, t))
            xp = float(separable_ode_solution(0.7, 1.2, t + h))
            xm = float(separable_ode_solution(0.7, 1.2, t - h))
            fd = (xp - xm) / (2 * h)
            assert fd == pytest.approx(-1.2 * x * math.sqrt(1.0 - x), abs=1e-8)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            separable_ode_solution(1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            separable_ode_solution(-0.1, 1.0, 0.0)
        with pytest.raises(ValueError):
            separable_ode_solution(0.5, 0.0, 0.0)


class TestCertifyBound:
    def test_exponential_envelope_pass(self):
        t = np.linspace(0, 5, 500)
        v = 1.8 * np.exp(-2.0 * t)
        cert = certify_bound(t, v, lambda tt: 2.0 * np.exp(-2.0 * tt), 1e-6)
        assert cert.passed
        assert cert.worst_ratio <= 0.9 + 1e-9
        assert cert.first_violation_time is None

    def test_initial_value_envelope_pass(self):
        t = np.linspace(0, 3, 300)
        v = 0.7 * np.exp(-1.5 * t)
        cert = certify_bound(t, v, lambda tt: v[0] * np.exp(-1.5 * tt), 1e-6)
        assert cert.passed

    def test_wrong_bound_fails_with_location(self):
        t = np.linspace(0, 5, 500)
        v = 2.0 * np.exp(-1.0 * t)
        cert = certify_bound(t, v, lambda tt: 2.0 * np.exp(-10.0 * tt), 1e-6)
        assert not cert.passed
        assert cert.first_violation_time is not None
        assert cert.first_violation_time > 0.0

    def test_monotone_in_slack(self):
        t = np.linspace(0, 2, 100)
        v = np.exp(-t) * (1.0 + 1e-4)
        for eps in (1e-6, 1e-5, 1e-4):
            if certify_bound(t, v, lambda tt: np.exp(-tt), eps).passed:
                for larger in (1e-3, 1e-2):
                    assert certify_bound(t, v, lambda tt: np.exp(-tt), larger).passed


class TestDrivenDecay:
    def test_zero_input(self):
        t = np.linspace(0, 4, 100)
        np.testing.assert_allclose(
            driven_decay_solution(2.0, 1.5, 0.0, 3.0, t), 2.0 * np.exp(-1.5 * t)
        )

    @pytest.mark.parametrize("lam,p", [(2.0, 1.0), (1.0, 2.0)])
    def test_matches_numeric_integration(self, lam, p):
        t = np.linspace(0.0, 10.0, 2001)
        exact = driven_decay_solution(1.0, lam, 1.0, p, t)
        numeric = integrate_scalar_ode(
            lambda tt, v: -lam * v + math.exp(-p * tt), 1.0, t
        )
        assert np.max(np.abs(exact - numeric)) < 1e-8

    @pytest.mark.parametrize("lam,p", [(2.0, 1.0), (1.0, 2.0)])
    def test_tail_rate_is_slower_exponent(self, lam, p):
        t = np.linspace(0.0, 12.0, 2401)
        v = driven_decay_solution(1.0, lam, 1.0, p, t)
        fit = fit_exponential(t, v, window=(6.0, 12.0))
        expected = min(lam, p)
        assert abs(fit.rate - expected) <= 0.02 * expected

    def test_resonant_case_rejected(self):
        with pytest.raises(ValueError):
            driven_decay_solution(1.0, 2.0, 1.0, 2.0, 0.0)


class TestOvershootEnvelope:
    def test_zero_perturbation(self):
        env = overshoot_envelope(1.0, 2.0, 0.0, 1.0)
        assert env.overshoot == pytest.approx(1.0)
        t = np.linspace(0, 5, 100)
        np.testing.assert_allclose(env.tight(t), np.exp(-2.0 * t))
        np.testing.assert_allclose(env.loose(t), np.exp(-2.0 * t))

    def test_equality_ode_on_tight_envelope(self):
        lam, c, p = 2.0, 1.5, 1.0
        env = overshoot_envelope(1.0, lam, c, p)
        t = np.linspace(0.0, 10.0, 2001)
        numeric = integrate_scalar_ode(
            lambda tt, v: (-lam + c * math.exp(-p * tt)) * v, 1.0, t
        )
        assert np.max(np.abs(numeric - env.tight(t))) < 1e-9

    def test_tight_below_loose(self):
        env = overshoot_envelope(0.7, 1.0, 2.0, 0.5)
        t = np.linspace(0.0, 20.0, 500)
        assert np.all(env.tight(t) <= env.loose(t) * (1.0 + 1e-12))
        assert env.overshoot == pytest.approx(math.exp(2.0 / 0.5))

    def test_negative_perturbation_rejected(self):
        with pytest.raises(ValueError):
            overshoot_envelope(1.0, 1.0, -0.1, 1.0)


class TestForwardDini:
    def test_linear_series(self):
        t = np.linspace(0, 1, 11)
        v = 3.0 * t
        td, dv = forward_dini(t, v)
        assert td.shape == (10,)
        np.testing.assert_allclose(dv, np.full(10, 3.0))


class TestSimTrace:
    @staticmethod
    def _arrays(n):
        return dict(
            time=np.linspace(0, 1, n),
            position=np.zeros((n, 3)),
            position_ref=np.zeros((n, 3)),
            velocity=np.zeros((n, 3)),
            attitude=np.tile([1.0, 0, 0, 0], (n, 1)),
            attitude_ref=np.tile([1.0, 0, 0, 0], (n, 1)),
            omega=np.zeros((n, 3)),
            thrust=np.zeros(n),
            torque=np.zeros((n, 3)),
            norm_qe_vec=np.zeros(n),
            norm_s_att=np.zeros(n),
            norm_r_e=np.zeros(n),
            norm_s_pos=np.zeros(n),
            delta1=np.zeros(n),
            delta2=np.zeros(n),
        )

    def test_valid_construction(self):
        trace = SimTrace(**self._arrays(10))
        assert len(trace) == 10
        assert trace.rows().shape == (10, 31)

    def test_nonincreasing_time_rejected(self):
        arrays = self._arrays(10)
        arrays["time"] = np.zeros(10)
        with pytest.raises(ValueError):
            SimTrace(**arrays)

    def test_length_mismatch_rejected(self):
        arrays = self._arrays(10)
        arrays["thrust"] = np.zeros(9)
        with pytest.raises(ValueError):
            SimTrace(**arrays)

    def test_csv_round_trip(self, tmp_path):
        trace = SimTrace(**self._arrays(6))
        path = tmp_path / "trace.csv"
        trace.write_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0].count(",") == 30
        assert len(lines) == 7
        values = np.array([float(x) for x in lines[1].split(",")])
        np.testing.assert_allclose(values, trace.rows()[0])
