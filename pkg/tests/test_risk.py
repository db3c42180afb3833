import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcareg.errors import SingularityError
from pcareg.risk import (
    ModelParams,
    TestSpike,
    TestSpikeSpec,
    estimation_error,
    generalisation_error,
    risk_limits_gamma_l_zero,
    risk_limits_gamma_u_zero,
    training_error,
)

from _reference import e_gen_alpha0, e_gen_alpha1, matched_spikes


def params(**kw):
    base = dict(gamma_u=1.0, gamma_l=2.0, alpha=1.0, lam=5.0, eta=1.0,
                w_star_norm_sq=9.0, noise_var=1.0)
    base.update(kw)
    return ModelParams(**base)


class TestEstimationError:
    def test_full_retention_oversampled_is_pure_noise_variance(self):
        p = params(alpha=1.0, gamma_l=0.5, eta=0.7)
        b = estimation_error(p)
        assert b.e_est == pytest.approx(0.5 / 0.5 * 1.0, rel=1e-10)
        assert b.missing_signal == pytest.approx(0.0, abs=1e-12)
        assert b.leaked_signal == pytest.approx(0.0, abs=1e-12)

    def test_infinite_pretraining_closed_form(self):
        # underparameterized branch of the infinite-pretraining limit
        eta, alpha, gl = 0.6, 0.5, 0.8
        p = params(gamma_u=1e-8, alpha=alpha, gamma_l=gl, eta=eta)
        geff = alpha * gl
        expected = 9.0 * (1 - eta) * (1 - alpha) + geff / (1 - geff) * (
            9.0 * (1 - eta) * (1 - alpha) + 1.0
        )
        assert estimation_error(p).e_est == pytest.approx(expected, abs=1e-3)

    def test_single_component_endpoint_value(self):
        # closed endpoint algebra: missing 9(1-0.75), leak 9(0.25)^2(0.75)
        b = estimation_error(params(alpha=0.0))
        assert b.e_est == pytest.approx(2.671875, rel=1e-10)
        assert b.variance == 0.0

    def test_guard_band_raises(self):
        with pytest.raises(SingularityError):
            estimation_error(params(alpha=0.5, gamma_l=2.0 + 1e-9))


class TestGeneralisationError:
    def test_full_retention_aligned_example(self):
        p = params()
        b = generalisation_error(p, TestSpikeSpec.matched(p))
        assert b.e_gen == pytest.approx(4.5, rel=1e-10)

    def test_single_component_aligned_example(self):
        p = params(alpha=0.0)
        b = generalisation_error(p, TestSpikeSpec.matched(p))
        assert b.e_gen == pytest.approx(3.8125, rel=1e-10)

    def test_isotropic_test_covariance(self):
        p = params(alpha=0.4, eta=0.5)
        b = generalisation_error(p, TestSpikeSpec.isotropic())
        assert b.e_gen == pytest.approx(b.e_est + 1.0, rel=1e-12)
        assert b.test_spike_bias == 0.0

    def test_endpoints_match_closed_assembly(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            lam = rng.uniform(1.1, 10.0)
            eta = rng.uniform(0.0, 1.0)
            gu = rng.uniform(0.05, 6.0)
            gl = rng.uniform(1.05, 6.0)
            w_sq = rng.uniform(0.5, 20.0)
            noise = rng.uniform(0.2, 3.0)
            p = params(lam=lam, eta=eta, gamma_u=gu, gamma_l=gl,
                       w_star_norm_sq=w_sq, noise_var=noise)
            spikes = matched_spikes(lam, eta)
            b0 = generalisation_error(p.with_alpha(0.0), TestSpikeSpec.matched(p))
            assert b0.e_gen == pytest.approx(
                e_gen_alpha0(lam, eta, gu, w_sq, noise, spikes), rel=1e-9
            )
            b1 = generalisation_error(p.with_alpha(1.0), TestSpikeSpec.matched(p))
            assert b1.e_gen == pytest.approx(
                e_gen_alpha1(lam, eta, gl, w_sq, noise, spikes), rel=1e-9
            )

    def test_double_descent_divergence(self):
        p = params(gamma_l=2.0, eta=0.8)
        b = generalisation_error(p.with_alpha(0.5 * 1.01), TestSpikeSpec.matched(p))
        assert b.e_gen > 50.0 * p.noise_var
        b = generalisation_error(p.with_alpha(0.5 * 0.99), TestSpikeSpec.matched(p))
        assert b.e_gen > 50.0 * p.noise_var


class TestTrainingError:
    def test_zero_above_interpolation(self):
        assert training_error(params(alpha=1.0, gamma_l=2.0)) == 0.0
        assert training_error(params(alpha=0.75, gamma_l=2.0)) == 0.0

    def test_defined_at_interpolation_threshold(self):
        assert training_error(params(alpha=0.5, gamma_l=2.0)) == 0.0

    def test_full_retention_undersampled(self):
        assert training_error(params(alpha=1.0, gamma_l=0.5, eta=0.3)) == pytest.approx(
            0.5, rel=1e-12
        )

    def test_infinite_pretraining_aligned(self):
        p = params(gamma_u=1e-8, alpha=0.5, gamma_l=1.0, eta=1.0)
        assert training_error(p) == pytest.approx(0.5, abs=1e-4)


class TestLimits:
    def test_gamma_u_zero_matches_general(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            p = params(
                gamma_u=1e-8,
                gamma_l=rng.uniform(0.1, 5.0),
                alpha=float(rng.uniform(0.0, 1.0)),
                lam=rng.uniform(1.1, 10.0),
                eta=rng.uniform(0.0, 1.0),
                w_star_norm_sq=rng.uniform(0.5, 15.0),
            )
            if abs(p.gamma_eff - 1.0) < 0.05:
                continue
            general = generalisation_error(p, TestSpikeSpec.matched(p))
            closed = risk_limits_gamma_u_zero(p)
            assert general.e_gen == pytest.approx(closed.e_gen, abs=1e-4)
            assert general.e_est == pytest.approx(closed.e_est, abs=1e-4)
            assert general.e_train == pytest.approx(closed.e_train, abs=1e-4)

    def test_gamma_u_zero_branch_examples(self):
        p = params(gamma_u=1e-8, gamma_l=2.0, alpha=0.25)
        assert risk_limits_gamma_u_zero(p).test_spike_bias == 0.0  # gamma_eff < 1
        p = params(gamma_u=1e-8, gamma_l=4.0, alpha=0.5)  # gamma_eff = 2
        assert risk_limits_gamma_u_zero(p).test_spike_bias == pytest.approx(
            9.0 * 4.0 * (1.0 / 6.0) ** 2, rel=1e-12
        )

    def test_gamma_l_zero_matches_general(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            p = params(
                gamma_u=rng.uniform(0.05, 6.0),
                gamma_l=1e-8,
                alpha=float(rng.uniform(0.01, 1.0)),
                lam=rng.uniform(1.1, 10.0),
                eta=rng.uniform(0.0, 1.0),
                w_star_norm_sq=rng.uniform(0.5, 15.0),
            )
            test = TestSpikeSpec.matched(p)
            general = generalisation_error(p, test)
            closed = risk_limits_gamma_l_zero(p, test)
            assert general.e_gen == pytest.approx(closed.e_gen, abs=1e-4)
            assert general.e_train == pytest.approx(closed.e_train, abs=1e-4)

    def test_gamma_l_zero_full_retention(self):
        p = params(alpha=1.0, eta=0.4)
        closed = risk_limits_gamma_l_zero(p, TestSpikeSpec.matched(p))
        assert closed.e_gen == pytest.approx(1.0, abs=1e-12)
        assert closed.e_train == pytest.approx(1.0, abs=1e-12)

    def test_gamma_l_zero_single_component_endpoint(self):
        p = params(alpha=0.0)
        closed = risk_limits_gamma_l_zero(p, TestSpikeSpec.matched(p))
        assert closed.e_gen == pytest.approx(3.8125, rel=1e-10)

    def test_gamma_l_zero_training_floor(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = params(
                gamma_u=rng.uniform(0.05, 6.0),
                alpha=float(rng.uniform(0.0, 1.0)),
                eta=rng.uniform(0.0, 1.0),
            )
            closed = risk_limits_gamma_l_zero(p, TestSpikeSpec.matched(p))
            assert closed.e_train >= p.noise_var - 1e-12


_params_strategy = st.builds(
    params,
    gamma_u=st.floats(0.05, 8.0),
    gamma_l=st.floats(0.05, 8.0),
    alpha=st.floats(0.0, 1.0),
    lam=st.floats(1.05, 15.0),
    eta=st.floats(0.0, 1.0),
    w_star_norm_sq=st.floats(0.1, 25.0),
    noise_var=st.floats(0.1, 5.0),
)


class TestInvariants:
    @settings(max_examples=60, deadline=None)
    @given(_params_strategy)
    def test_breakdown_additivity_and_bounds(self, p):
        if abs(p.gamma_eff - 1.0) < 1e-3:
            return
        b = generalisation_error(p, TestSpikeSpec.matched(p))
        scale = max(abs(b.e_est), 1.0)
        assert abs(b.e_est - (b.missing_signal + b.leaked_signal + b.variance)) <= 1e-12 * scale
        assert abs(b.e_gen - (b.e_est + b.test_spike_bias + b.irreducible)) <= 1e-12 * max(
            abs(b.e_gen), 1.0
        )
        assert b.e_gen >= p.noise_var - 1e-10
        assert b.e_train >= -1e-12
        assert b.missing_signal >= -1e-9
        assert b.leaked_signal >= -1e-12
        assert b.variance >= -1e-12

    @settings(max_examples=30, deadline=None)
    @given(_params_strategy, st.floats(1.05, 8.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
    def test_general_spikes_keep_gen_above_noise(self, p, nu, a, b_coef):
        if abs(p.gamma_eff - 1.0) < 1e-3:
            return
        # alignments from an explicit unit-vector construction, always feasible
        b_val = b_coef * math.sqrt(max(0.0, 1.0 - a * a))
        spike = TestSpike(
            nu=nu,
            rho_w_new=math.sqrt(p.eta) * a + math.sqrt(1 - p.eta) * b_val,
            rho_v_new=a,
        )
        out = generalisation_error(p, TestSpikeSpec(spikes=(spike,)))
        assert out.e_gen >= p.noise_var - 1e-10
        assert out.test_spike_bias >= -1e-12
