import math

import numpy as np
import pytest

from pcareg.errors import DomainError
from pcareg.risk import ModelParams, TestSpike, TestSpikeSpec, generalisation_error
from pcareg.simulate import (
    FiniteInstance,
    baselines,
    generate_instance,
    matched_test_spec,
    run_alpha_sweep,
    run_trials,
)


def instance(**kw):
    base = dict(p=120, n_u=90, n_l=90, m=40, lam=5.0, eta=1.0,
                w_star_norm=3.0, noise_sd=1.0, seed=123)
    base.update(kw)
    return FiniteInstance(**base)


class TestGeneration:
    def test_same_seed_is_bit_identical(self):
        a = generate_instance(instance())
        b = generate_instance(instance())
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_aligned_signal_is_spike_direction(self):
        _, _, w_star, v, _ = generate_instance(instance(eta=1.0))
        assert np.array_equal(w_star, 3.0 * v)

    def test_alignment_is_exact(self):
        _, _, w_star, v, _ = generate_instance(instance(eta=0.37))
        assert (w_star @ v) ** 2 / (w_star @ w_star) == pytest.approx(0.37, rel=1e-12)
        assert w_star @ w_star == pytest.approx(9.0, rel=1e-12)

    def test_spike_variance_concentrates(self):
        inst = instance(p=20, n_u=10_000, m=10, lam=5.0)
        X_u, _, _, v, _ = generate_instance(inst)
        emp = v @ (X_u.T @ X_u / inst.n_u) @ v
        assert abs(emp - 5.0) <= 3.0 * math.sqrt(2.0 / inst.n_u) * 5.0

    def test_labels_use_noise(self):
        X_u, X_l, w_star, _, y = generate_instance(instance(eta=0.5))
        resid = y - X_l @ w_star
        assert 0.5 < resid.std() < 2.0

    def test_m_bounds_validated(self):
        with pytest.raises(DomainError):
            instance(m=200)


class TestRunTrials:
    def test_reproducible_single_trial(self):
        test = matched_test_spec(5.0, 1.0)
        a = run_trials(instance(), 1, test=test)
        b = run_trials(instance(), 1, test=test)
        assert a == b

    def test_thread_invariance_bitwise(self):
        test = matched_test_spec(5.0, 1.0)
        a = run_trials(instance(), 12, test=test, threads=1)
        b = run_trials(instance(), 12, test=test, threads=4)
        assert a == b

    def test_interpolation_regime_zero_training_error(self):
        # gamma_eff = m / n_l > 1: the projected design interpolates
        agg = run_trials(instance(n_l=30, m=60), 6)
        assert agg.mean.e_train_emp < 1e-8

    def test_estimate_stays_in_basis_span(self):
        # with m = p and a well-posed design, exact recovery (noiseless)
        inst = instance(p=40, n_u=60, n_l=120, m=40, noise_sd=1e-8)
        agg = run_trials(inst, 3)
        assert agg.mean.e_est_emp < 1e-10

    def test_matches_theory_loosely(self):
        inst = instance(p=300, n_u=240, n_l=240, m=90, lam=5.0, eta=1.0, seed=9)
        test = matched_test_spec(5.0, 1.0)
        agg = run_trials(inst, 60, test=test)
        params = ModelParams(gamma_u=inst.gamma_u, gamma_l=inst.gamma_l,
                             alpha=inst.alpha, lam=5.0, eta=1.0,
                             w_star_norm_sq=9.0, noise_var=1.0)
        th = generalisation_error(params, TestSpikeSpec.matched(params))
        tol = max(0.07 * th.e_gen, 3.5 * agg.se("e_gen_emp"))
        assert abs(agg.mean.e_gen_emp - th.e_gen) <= tol
        tol_t = max(0.07 * th.e_train, 3.5 * agg.se("e_train_emp"))
        assert abs(agg.mean.e_train_emp - th.e_train) <= tol_t

    def test_general_test_spike_matches_theory(self):
        # a misaligned, multi-spike test covariance exercises the bilinear path
        eta = 0.5
        spikes = TestSpikeSpec(spikes=(
            TestSpike(nu=3.0, rho_w_new=math.sqrt(eta) * 0.8, rho_v_new=0.8),
            TestSpike(nu=2.0, rho_w_new=0.3, rho_v_new=0.1),
        ))
        inst = instance(p=300, n_u=200, n_l=450, m=120, eta=eta, seed=21)
        agg = run_trials(inst, 60, test=spikes)
        params = ModelParams(gamma_u=inst.gamma_u, gamma_l=inst.gamma_l,
                             alpha=inst.alpha, lam=5.0, eta=eta,
                             w_star_norm_sq=9.0, noise_var=1.0)
        th = generalisation_error(params, spikes)
        tol = max(0.07 * th.e_gen, 3.5 * agg.se("e_gen_emp"))
        assert abs(agg.mean.e_gen_emp - th.e_gen) <= tol

    def test_infeasible_spike_alignments_rejected(self):
        bad = TestSpikeSpec(spikes=(TestSpike(nu=2.0, rho_w_new=-0.9, rho_v_new=0.9),))
        with pytest.raises(DomainError):
            run_trials(instance(eta=1.0), 1, test=bad)


class TestAlphaSweep:
    def test_matches_run_trials_per_m(self):
        test = matched_test_spec(5.0, 1.0)
        inst = instance()
        sweep = run_alpha_sweep(inst, [10, 40], 8, test=test)
        # same seeds and basis path: the m = inst.m entry equals run_trials
        single = run_trials(instance(m=40), 8, test=test)
        assert sweep[1] == single

    def test_spike_overlap_tracks_bbp(self):
        from pcareg.measures import bbp_overlap

        inst = instance(p=250, n_u=250, m=1, lam=5.0, seed=4)
        agg = run_trials(inst, 30)
        assert abs(agg.mean.spike_overlap_sq - bbp_overlap(5.0, 1.0)) < 0.06


class TestBaselines:
    def test_full_basis_identity(self):
        # m = p: PR, PCR and OLS are the same estimator
        test = matched_test_spec(5.0, 1.0)
        inst = instance(p=50, n_u=70, n_l=90, m=50)
        base = baselines(inst, 4, test=test)
        pr = run_trials(inst, 4, test=test)
        assert base["ols"].mean.e_gen_emp == pytest.approx(pr.mean.e_gen_emp, abs=1e-10)
        assert base["pcr"].mean.e_gen_emp == pytest.approx(pr.mean.e_gen_emp, abs=1e-10)

    def test_pretraining_advantage_when_unlabelled_data_dominates(self):
        # n_u >> n_l and a single retained component: PR's subspace estimate
        # is much better than PCR's
        test = matched_test_spec(5.0, 1.0)
        inst = instance(p=150, n_u=1200, n_l=60, m=1, seed=8)
        base = baselines(inst, 15, test=test)
        pr = run_trials(inst, 15, test=test)
        assert pr.mean.e_gen_emp < base["pcr"].mean.e_gen_emp
