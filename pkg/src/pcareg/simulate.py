"""Finite-sample Monte Carlo oracle for the asymptotic formulas.

Data follow the spiked Gaussian model: rows ``x = z + (sqrt(lam) - 1)(z^T v) v``
with standard normal ``z``, which applies ``Sigma^{1/2}`` structurally in
O(n p) without forming the covariance.  The spike direction is the first
coordinate axis and the signal is built as
``w* = |w*| (sqrt(eta) v + sqrt(1 - eta) v_perp)`` so its squared alignment is
exactly ``eta``.

Per-trial randomness derives from ``SeedSequence(seed).spawn(n_trials)``;
trials are independent, may run in a thread pool (the heavy linear algebra
releases the GIL), and are aggregated from an index-ordered array, so the
results are bit-identical across runs and thread counts.

The empirical generalisation error is the closed quadratic form
``(w* - w_hat)^T Sigma_new (w* - w_hat) + noise`` rather than a sampled test
set: the population expectation has no test-set variance to average away.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .estimators import pca_eigenbasis, min_norm_lstsq, pretrained_regression, RANK_RTOL
from .risk import TestSpike, TestSpikeSpec
from .validation import check_positive, check_positive_int, check_spike, check_unit_interval


@dataclass(frozen=True)
class FiniteInstance:
    """Concrete problem sizes for one Monte Carlo configuration."""

    p: int
    n_u: int
    n_l: int
    m: int
    lam: float
    eta: float
    w_star_norm: float
    noise_sd: float
    seed: int

    def __post_init__(self):
        check_positive_int(self.p, "p")
        check_positive_int(self.n_u, "n_u")
        check_positive_int(self.n_l, "n_l")
        check_positive_int(self.m, "m")
        if self.m > self.p:
            raise DomainError(f"m = {self.m} exceeds p = {self.p}")
        check_spike(self.lam)
        check_unit_interval(self.eta, "eta")
        check_positive(self.w_star_norm, "w_star_norm")
        check_positive(self.noise_sd, "noise_sd")

    @property
    def gamma_u(self) -> float:
        return self.p / self.n_u

    @property
    def gamma_l(self) -> float:
        return self.p / self.n_l

    @property
    def alpha(self) -> float:
        return self.m / self.p


@dataclass(frozen=True)
class TrialResult:
    e_est_emp: float
    e_gen_emp: float
    e_train_emp: float
    spike_overlap_sq: float


@dataclass(frozen=True)
class TrialAggregate:
    """Componentwise mean and standard deviation over trials."""

    mean: TrialResult
    sd: TrialResult
    n_trials: int

    def se(self, field: str) -> float:
        return getattr(self.sd, field) / math.sqrt(self.n_trials)


def _spiked_sample(rng: np.random.Generator, n: int, p: int, lam: float) -> np.ndarray:
    z = rng.standard_normal((n, p))
    z[:, 0] *= math.sqrt(lam)  # spike direction is e_1
    return z


def _signal_vector(p: int, eta: float, norm: float) -> np.ndarray:
    if p < 2 and eta < 1.0:
        raise DomainError("p >= 2 required for a misaligned signal")
    w = np.zeros(p)
    w[0] = math.sqrt(eta)
    if eta < 1.0:
        w[1] = math.sqrt(1.0 - eta)
    return norm * w


def generate_instance(
    inst: FiniteInstance, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``(X_u, X_l, w_star, v, labels)`` for one trial."""
    rng = rng if rng is not None else np.random.default_rng(inst.seed)
    X_u = _spiked_sample(rng, inst.n_u, inst.p, inst.lam)
    X_l = _spiked_sample(rng, inst.n_l, inst.p, inst.lam)
    v = np.zeros(inst.p)
    v[0] = 1.0
    w_star = _signal_vector(inst.p, inst.eta, inst.w_star_norm)
    labels = X_l @ w_star + inst.noise_sd * rng.standard_normal(inst.n_l)
    return X_u, X_l, w_star, v, labels


def _test_spike_vectors(test: TestSpikeSpec, p: int, eta: float) -> list[tuple[float, np.ndarray]]:
    """Unit vectors realizing each test spike's alignments exactly.

    Built in span{e1, e2, e3}: e1 is the spike, e2 the misaligned signal
    component, e3 absorbs the remaining mass.  Raises for infeasible
    alignment triples.
    """
    out = []
    for spike in test.spikes:
        a = spike.rho_v_new
        if eta == 1.0:
            if abs(spike.rho_w_new - a) > 1e-12:
                raise DomainError("eta = 1 forces rho_w_new = rho_v_new")
            b = 0.0
        else:
            b = (spike.rho_w_new - math.sqrt(eta) * a) / math.sqrt(1.0 - eta)
        c_sq = 1.0 - a * a - b * b
        if c_sq < -1e-9:
            raise DomainError(
                f"infeasible test-spike alignments (rho_w_new={spike.rho_w_new}, "
                f"rho_v_new={spike.rho_v_new})"
            )
        if (b != 0.0 and p < 2) or (c_sq > 1e-9 and p < 3):
            raise DomainError("p too small to realize the requested test spikes")
        v_new = np.zeros(p)
        v_new[0] = a
        if p > 1:
            v_new[1] = b
        if p > 2:
            v_new[2] = math.sqrt(max(0.0, c_sq))
        out.append((spike.nu, v_new))
    return out


def _errors(
    inst: FiniteInstance,
    w_star: np.ndarray,
    w_hat: np.ndarray,
    X_l: np.ndarray,
    labels: np.ndarray,
    spikes: list[tuple[float, np.ndarray]],
    u1: np.ndarray,
    v: np.ndarray,
) -> TrialResult:
    d = w_star - w_hat
    e_est = float(d @ d)
    e_gen = e_est + inst.noise_sd**2
    for nu, v_new in spikes:
        e_gen += (nu - 1.0) * float(d @ v_new) ** 2
    resid = labels - X_l @ w_hat
    e_train = float(resid @ resid) / inst.n_l
    return TrialResult(
        e_est_emp=e_est,
        e_gen_emp=e_gen,
        e_train_emp=e_train,
        spike_overlap_sq=float(v @ u1) ** 2,
    )


def _trial_rngs(seed: int, n_trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trials)]


def run_trials(
    inst: FiniteInstance,
    n_trials: int,
    test: TestSpikeSpec | None = None,
    threads: int = 1,
) -> TrialAggregate:
    """Monte Carlo aggregate of the pretrained-regression errors."""
    check_positive_int(n_trials, "n_trials")
    test = test if test is not None else TestSpikeSpec.isotropic()
    spikes_proto = _test_spike_vectors(test, inst.p, inst.eta)
    rngs = _trial_rngs(inst.seed, n_trials)
    rows = np.empty((n_trials, 4))

    def one(i: int) -> None:
        rng = rngs[i]
        X_u, X_l, w_star, v, labels = generate_instance(inst, rng=rng)
        _, basis = pca_eigenbasis(X_u, rng=rng)
        U_m = basis[:, : inst.m]
        w_hat = pretrained_regression(X_l, labels, U_m, rank_rtol=RANK_RTOL)
        r = _errors(inst, w_star, w_hat, X_l, labels, spikes_proto, basis[:, 0], v)
        rows[i] = (r.e_est_emp, r.e_gen_emp, r.e_train_emp, r.spike_overlap_sq)

    _run_indexed(one, n_trials, threads)
    return _aggregate(rows)


def run_alpha_sweep(
    inst: FiniteInstance,
    m_values: list[int],
    n_trials: int,
    test: TestSpikeSpec | None = None,
    threads: int = 1,
) -> list[TrialAggregate]:
    """Aggregates for several retained dimensions, sharing data and PCA
    per trial (``inst.m`` is ignored)."""
    check_positive_int(n_trials, "n_trials")
    for m in m_values:
        if not 1 <= m <= inst.p:
            raise DomainError(f"m = {m} outside [1, p = {inst.p}]")
    test = test if test is not None else TestSpikeSpec.isotropic()
    spikes_proto = _test_spike_vectors(test, inst.p, inst.eta)
    rngs = _trial_rngs(inst.seed, n_trials)
    rows = np.empty((n_trials, len(m_values), 4))

    def one(i: int) -> None:
        rng = rngs[i]
        X_u, X_l, w_star, v, labels = generate_instance(inst, rng=rng)
        _, basis = pca_eigenbasis(X_u, rng=rng)
        proj = X_l @ basis  # project once; column slices give every X_l U_m
        for j, m in enumerate(m_values):
            latent = min_norm_lstsq(proj[:, :m], labels, rank_rtol=RANK_RTOL)
            w_hat = basis[:, :m] @ latent
            r = _errors(inst, w_star, w_hat, X_l, labels, spikes_proto, basis[:, 0], v)
            rows[i, j] = (r.e_est_emp, r.e_gen_emp, r.e_train_emp, r.spike_overlap_sq)

    _run_indexed(one, n_trials, threads)
    return [_aggregate(rows[:, j]) for j in range(len(m_values))]


def baselines(
    inst: FiniteInstance,
    n_trials: int = 1,
    test: TestSpikeSpec | None = None,
    threads: int = 1,
) -> dict[str, TrialAggregate]:
    """Min-norm OLS on the raw inputs and PCR (PCA fitted on ``X_l`` itself).

    Shares the per-trial data with :func:`run_trials` (same seed derivation),
    so the three estimators are compared on identical draws.
    """
    check_positive_int(n_trials, "n_trials")
    test = test if test is not None else TestSpikeSpec.isotropic()
    spikes_proto = _test_spike_vectors(test, inst.p, inst.eta)
    rngs = _trial_rngs(inst.seed, n_trials)
    rows = {name: np.empty((n_trials, 4)) for name in ("ols", "pcr")}

    def one(i: int) -> None:
        rng = rngs[i]
        X_u, X_l, w_star, v, labels = generate_instance(inst, rng=rng)
        _, basis_u = pca_eigenbasis(X_u, rng=rng)
        w_ols = min_norm_lstsq(X_l, labels, rank_rtol=RANK_RTOL)
        _, basis_l = pca_eigenbasis(X_l, rng=rng)
        w_pcr = pretrained_regression(X_l, labels, basis_l[:, : inst.m], rank_rtol=RANK_RTOL)
        for name, w_hat, u1 in (("ols", w_ols, basis_u[:, 0]), ("pcr", w_pcr, basis_l[:, 0])):
            r = _errors(inst, w_star, w_hat, X_l, labels, spikes_proto, u1, v)
            rows[name][i] = (r.e_est_emp, r.e_gen_emp, r.e_train_emp, r.spike_overlap_sq)

    _run_indexed(one, n_trials, threads)
    return {name: _aggregate(arr) for name, arr in rows.items()}


def baseline_sweep(
    inst: FiniteInstance,
    m_values: list[int],
    n_trials: int,
    test: TestSpikeSpec | None = None,
    threads: int = 1,
) -> dict[str, list[TrialAggregate]]:
    """OLS and PCR aggregates over several retained dimensions.

    OLS ignores ``m`` (its list repeats the single aggregate) but is reported
    per entry so the three methods line up; PCR refits the projection from
    ``X_l`` at each ``m``, reusing one eigendecomposition per trial.
    """
    check_positive_int(n_trials, "n_trials")
    test = test if test is not None else TestSpikeSpec.isotropic()
    spikes_proto = _test_spike_vectors(test, inst.p, inst.eta)
    rngs = _trial_rngs(inst.seed, n_trials)
    ols_rows = np.empty((n_trials, 4))
    pcr_rows = np.empty((n_trials, len(m_values), 4))

    def one(i: int) -> None:
        rng = rngs[i]
        _, X_l, w_star, v, labels = generate_instance(inst, rng=rng)
        w_ols = min_norm_lstsq(X_l, labels, rank_rtol=RANK_RTOL)
        _, basis_l = pca_eigenbasis(X_l, rng=rng)
        r = _errors(inst, w_star, w_ols, X_l, labels, spikes_proto, basis_l[:, 0], v)
        ols_rows[i] = (r.e_est_emp, r.e_gen_emp, r.e_train_emp, r.spike_overlap_sq)
        proj = X_l @ basis_l
        for j, m in enumerate(m_values):
            latent = min_norm_lstsq(proj[:, :m], labels, rank_rtol=RANK_RTOL)
            w_pcr = basis_l[:, :m] @ latent
            r = _errors(inst, w_star, w_pcr, X_l, labels, spikes_proto, basis_l[:, 0], v)
            pcr_rows[i, j] = (r.e_est_emp, r.e_gen_emp, r.e_train_emp, r.spike_overlap_sq)

    _run_indexed(one, n_trials, threads)
    ols = _aggregate(ols_rows)
    return {
        "ols": [ols for _ in m_values],
        "pcr": [_aggregate(pcr_rows[:, j]) for j in range(len(m_values))],
    }


def _run_indexed(fn, n: int, threads: int) -> None:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fn, range(n)))
    else:
        for i in range(n):
            fn(i)


def _aggregate(rows: np.ndarray) -> TrialAggregate:
    mean = rows.mean(axis=0)
    sd = rows.std(axis=0, ddof=1) if rows.shape[0] > 1 else np.zeros(4)
    return TrialAggregate(
        mean=TrialResult(*mean.tolist()),
        sd=TrialResult(*sd.tolist()),
        n_trials=rows.shape[0],
    )


def matched_test_spec(lam: float, eta: float) -> TestSpikeSpec:
    """Test covariance equal to the training covariance."""
    return TestSpikeSpec(spikes=(TestSpike(nu=lam, rho_w_new=math.sqrt(eta), rho_v_new=1.0),))
