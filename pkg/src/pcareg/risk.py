"""Asymptotic estimation, generalisation and training errors.

The estimation error of the pretrained-regression estimator decomposes as

    e_est = w * (1 - pi_ww)                                 [missing signal]
          + w * ((lam - 1)^2 / lambda_bar^2) * p_perp_wv^2 * pi_vv
                                                            [leaked signal]
          + (min(gamma_eff, 1) / |gamma_eff - 1|) * (w * sigma_eff_sq + noise)
                                                            [variance]

with ``w`` the squared signal norm, ``lambda_bar`` the compressed spike
eigenvalue and ``sigma_eff_sq`` the effective extra label-noise variance from
the unrecoverable signal component.  The leaked-signal term carries the
*square* of ``p_perp_wv``: only that form is consistent with the closed
single-component endpoint and with the finite-sample simulations.

The generalisation error adds, per test-covariance spike ``(nu_i, r_i, q_i)``
with ``r_i`` the signal/test-spike and ``q_i`` the spike/test-spike
alignments,

    w * (nu_i - 1) * (r_i - pi_{w,vnew_i}
                      - ((lam - 1)/lambda_bar) * p_perp_wv * pi_{v,vnew_i})^2

plus the irreducible ``noise_var``; the training error is

    (w * sigma_eff_sq + noise_var) * max(0, 1 - gamma_eff).

``risk_limits_gamma_u_zero`` and ``risk_limits_gamma_l_zero`` are the
closed-form infinite-pretraining / infinite-downstream-data limits; the
general formulas reduce to them as the corresponding aspect ratio vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .projections import (
    ProjectionLimits,
    effective_projection,
    perp_bundle,
    projection_bundle,
)
from .mp import pseudoinverse_trace_limit
from .measures import tail_mass_from_weights
from .validation import (
    check_positive,
    check_signed_unit,
    check_spike,
    check_unit_interval,
    check_aspect_ratio,
)


@dataclass(frozen=True)
class ModelParams:
    """One asymptotic problem instance.

    ``eta`` is the squared alignment of the signal with the covariance spike;
    the signed alignment convention is ``rho_{w*,v} = +sqrt(eta)``.
    """

    gamma_u: float
    gamma_l: float
    alpha: float
    lam: float
    eta: float
    w_star_norm_sq: float = 1.0
    noise_var: float = 1.0

    def __post_init__(self):
        check_aspect_ratio(self.gamma_u, "gamma_u")
        check_aspect_ratio(self.gamma_l, "gamma_l")
        check_unit_interval(self.alpha, "alpha")
        check_spike(self.lam)
        check_unit_interval(self.eta, "eta")
        check_positive(self.w_star_norm_sq, "w_star_norm_sq")
        check_positive(self.noise_var, "noise_var")

    @property
    def gamma_eff(self) -> float:
        return self.alpha * self.gamma_l

    @property
    def snr(self) -> float:
        return self.w_star_norm_sq / self.noise_var

    def with_alpha(self, alpha: float) -> "ModelParams":
        return replace(self, alpha=alpha)


@dataclass(frozen=True)
class TestSpike:
    """One spike of the test covariance: eigenvalue and alignments."""

    __test__ = False  # not a pytest class

    nu: float
    rho_w_new: float  # limit of w*^T v_new / |w*|
    rho_v_new: float  # limit of v^T v_new

    def __post_init__(self):
        check_spike(self.nu, "nu")
        check_signed_unit(self.rho_w_new, "rho_w_new")
        check_signed_unit(self.rho_v_new, "rho_v_new")


@dataclass(frozen=True)
class TestSpikeSpec:
    """Spiked test covariance ``Sigma_new = I + sum_i (nu_i - 1) v_new,i v_new,i^T``."""

    __test__ = False  # not a pytest class

    spikes: tuple[TestSpike, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "spikes", tuple(self.spikes))

    @classmethod
    def matched(cls, params: ModelParams) -> "TestSpikeSpec":
        """Test covariance equal to the training covariance."""
        return cls(
            spikes=(TestSpike(nu=params.lam, rho_w_new=math.sqrt(params.eta), rho_v_new=1.0),)
        )

    @classmethod
    def isotropic(cls) -> "TestSpikeSpec":
        return cls(spikes=())


@dataclass(frozen=True)
class RiskBreakdown:
    e_est: float
    e_gen: float
    e_train: float
    missing_signal: float
    leaked_signal: float
    variance: float
    test_spike_bias: float
    irreducible: float


def variance_factor(gamma_eff: float) -> float:
    """``min(gamma_eff, 1) / |gamma_eff - 1|``; 0 at the alpha = 0 endpoint."""
    return pseudoinverse_trace_limit(gamma_eff)


def _pi_pair_new(
    spike: TestSpike, params: ModelParams, lim: ProjectionLimits, rho_wv: float
) -> tuple[float, float]:
    """Row-space limits (pi_{w,vnew}, pi_{v,vnew}) for one test spike."""
    q = spike.rho_v_new
    r = spike.rho_w_new
    # pair (w*, v_new): spike mass rho_wv * q, bulk mass r - rho_wv * q
    perp_w_new = tail_mass_from_weights(
        rho_wv * q, r - rho_wv * q, params.gamma_u, params.lam, params.alpha
    )
    p_w_new = r - perp_w_new
    # pair (v, v_new): all mass rides on the spike component
    p_v_new = q * lim.p_vv
    pi_w_new = effective_projection(
        p_w_new,
        p_av=lim.p_wv,
        p_bv=p_v_new,
        p_vv=lim.p_vv,
        lambda_bar=lim.lambda_bar,
        gamma_eff=lim.gamma_eff,
    )
    pi_v_new = effective_projection(
        p_v_new,
        p_av=lim.p_vv,
        p_bv=p_v_new,
        p_vv=lim.p_vv,
        lambda_bar=lim.lambda_bar,
        gamma_eff=lim.gamma_eff,
    )
    return pi_w_new, pi_v_new


def _assemble(params: ModelParams, test: TestSpikeSpec | None) -> RiskBreakdown:
    lim = projection_bundle(params)
    w = params.w_star_norm_sq
    noise = params.noise_var
    lam = params.lam

    missing = w * (1.0 - lim.pi_ww)
    leaked = (
        w * ((lam - 1.0) ** 2 / lim.lambda_bar**2) * lim.p_perp_wv**2 * lim.pi_vv
    )
    variance = variance_factor(lim.gamma_eff) * (w * lim.sigma_eff_sq + noise)

    test_bias = 0.0
    if test is not None:
        rho_wv = math.sqrt(params.eta)
        for spike in test.spikes:
            pi_w_new, pi_v_new = _pi_pair_new(spike, params, lim, rho_wv)
            mismatch = (
                spike.rho_w_new
                - pi_w_new
                - (lam - 1.0) / lim.lambda_bar * lim.p_perp_wv * pi_v_new
            )
            test_bias += w * (spike.nu - 1.0) * mismatch**2

    e_est = missing + leaked + variance
    e_train = (w * lim.sigma_eff_sq + noise) * max(0.0, 1.0 - lim.gamma_eff)
    return RiskBreakdown(
        e_est=e_est,
        e_gen=e_est + test_bias + noise,
        e_train=e_train,
        missing_signal=missing,
        leaked_signal=leaked,
        variance=variance,
        test_spike_bias=test_bias,
        irreducible=noise,
    )


def estimation_error(params: ModelParams) -> RiskBreakdown:
    """Asymptotic estimation error with its component breakdown.

    The returned breakdown also reports ``e_gen`` for an isotropic test
    covariance (``e_est + noise_var``) and the training error.
    """
    return _assemble(params, test=None)


def generalisation_error(params: ModelParams, test: TestSpikeSpec) -> RiskBreakdown:
    """Asymptotic generalisation error under the spiked test covariance."""
    return _assemble(params, test=test)


def training_error(params: ModelParams) -> float:
    """Asymptotic training error; well-defined for every gamma_eff (0 above 1)."""
    factor = max(0.0, 1.0 - params.gamma_eff)
    if factor == 0.0:
        return 0.0
    sigma_eff_sq = perp_bundle(params)[7]
    return (params.w_star_norm_sq * sigma_eff_sq + params.noise_var) * factor


def risk_limits_gamma_u_zero(params: ModelParams) -> RiskBreakdown:
    """Infinite-pretraining-data limit, matched test covariance.

    The empirical spike matches the population spike exactly; the leak
    vanishes and every projection limit is elementary in (eta, alpha,
    gamma_eff).  ``params.gamma_u`` is ignored.
    """
    w, noise = params.w_star_norm_sq, params.noise_var
    eta, alpha, lam = params.eta, params.alpha, params.lam
    gamma_eff = params.gamma_eff

    if gamma_eff < 1.0:
        pi_ww = eta + (1.0 - eta) * alpha
        test_bias = 0.0
    else:
        pi_ww = eta * lam / (gamma_eff - 1.0 + lam) + (1.0 - eta) * alpha / gamma_eff
        test_bias = (
            w * (lam - 1.0) * eta * ((gamma_eff - 1.0) / (gamma_eff - 1.0 + lam)) ** 2
        )
    missing = w * (1.0 - pi_ww)
    residual = w * (1.0 - eta) * (1.0 - alpha)
    variance = variance_factor(gamma_eff) * (residual + noise)
    e_est = missing + variance
    e_train = (noise + residual) * max(0.0, 1.0 - gamma_eff)
    return RiskBreakdown(
        e_est=e_est,
        e_gen=e_est + test_bias + noise,
        e_train=e_train,
        missing_signal=missing,
        leaked_signal=0.0,
        variance=variance,
        test_spike_bias=test_bias,
        irreducible=noise,
    )


def risk_limits_gamma_l_zero(params: ModelParams, test: TestSpikeSpec) -> RiskBreakdown:
    """Infinite-downstream-data limit for fixed ``alpha``.

    Every downstream variance term vanishes and the row-space projections
    reduce to the retained-subspace projections.  ``params.gamma_l`` is
    ignored.
    """
    w, noise, lam = params.w_star_norm_sq, params.noise_var, params.lam
    p_ww, p_vv, p_wv, _, _, perp_wv, lambda_bar, sigma_eff_sq = perp_bundle(params)

    missing = w * (1.0 - p_ww)
    leaked = w * ((lam - 1.0) ** 2 / lambda_bar**2) * perp_wv**2 * p_vv
    rho_wv = math.sqrt(params.eta)
    test_bias = 0.0
    for spike in test.spikes:
        q, r = spike.rho_v_new, spike.rho_w_new
        perp_w_new = tail_mass_from_weights(
            rho_wv * q, r - rho_wv * q, params.gamma_u, lam, params.alpha
        )
        p_w_new = r - perp_w_new
        p_v_new = q * p_vv
        mismatch = r - p_w_new - (lam - 1.0) / lambda_bar * perp_wv * p_v_new
        test_bias += w * (spike.nu - 1.0) * mismatch**2

    e_est = missing + leaked
    return RiskBreakdown(
        e_est=e_est,
        e_gen=e_est + test_bias + noise,
        e_train=noise + w * sigma_eff_sq,
        missing_signal=missing,
        leaked_signal=leaked,
        variance=0.0,
        test_spike_bias=test_bias,
        irreducible=noise,
    )
