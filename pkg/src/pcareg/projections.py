"""Deterministic limits of the retained/discarded and row-space projections.

For fixed directions ``a, b`` and the rank-``m`` PCA projector ``P_m`` learned
from the pretraining sample covariance, the normalized bilinear overlaps

    a^T P_perp b / (|a| |b|)  ->  p_perp(a, b)
    a^T P_m    b / (|a| |b|)  ->  p(a, b) = rho_{a,b} - p_perp(a, b)

are the tail / retained masses of the limiting sample spectral measure of the
pair (see :mod:`pcareg.measures`).  The compressed downstream design
``X_l P_m`` then sees those retained directions through its row-space
projector, whose limit is

    pi(a, b) = p(a, b)                                    (gamma_eff < 1)
    pi(a, b) = (p(a, b) - h) / gamma_eff
               + h * lambda_bar / (gamma_eff - 1 + lambda_bar)
               with h = p(a, v) p(b, v) / p(v, v)         (gamma_eff > 1),

where ``lambda_bar = 1 + (lam - 1) p(v, v)`` is the spike eigenvalue of the
compressed covariance.  The ``gamma_eff > 1`` branch integrates the two-point
compressed measure on {1, lambda_bar}; its spike weight is normalized so that
the measure's total mass equals the normalized retained overlap, which makes
the ``sqrt(p(a,a) p(b,b))`` prefactors cancel exactly.

The ``alpha = 0`` endpoint (retaining a single component, the empirical spike
direction) uses the exact closed forms

    p(a, b)(0) = rho_{a,v} rho_{b,v} c(gamma_u),   pi = p,

rather than a zero-width quadrature limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .measures import bbp_overlap, tail_mass_from_weights
from .validation import (
    GAMMA_EFF_GUARD,
    check_gamma_eff,
    check_positive,
    check_signed_unit,
)


@dataclass(frozen=True)
class VectorSpec:
    """Asymptotic description of a fixed direction: spike alignment and norm."""

    rho_with_spike: float
    norm_sq: float = 1.0

    def __post_init__(self):
        check_signed_unit(self.rho_with_spike, "rho_with_spike")
        check_positive(self.norm_sq, "norm_sq")


SPIKE = VectorSpec(rho_with_spike=1.0, norm_sq=1.0)


def resolve_rho(a: VectorSpec, b: VectorSpec, rho_ab: float | None) -> float:
    """Normalized overlap rho_{a,b}; inferred when determined, else required.

    It is determined when a == b (1) or when either vector is (anti)parallel
    to the spike (Cauchy-Schwarz pins a^T b to the product of alignments).
    """
    if rho_ab is not None:
        return check_signed_unit(rho_ab, "rho_ab")
    if a == b:
        return 1.0
    if abs(a.rho_with_spike) == 1.0 or abs(b.rho_with_spike) == 1.0:
        return a.rho_with_spike * b.rho_with_spike
    raise DomainError(
        "rho_ab is not determined by the spike alignments; pass it explicitly"
    )


@dataclass(frozen=True)
class ProjectionLimits:
    """All deterministic projection limits of (w*, v) for one problem instance."""

    p_ww: float
    p_vv: float
    p_wv: float
    p_perp_ww: float
    p_perp_vv: float
    p_perp_wv: float
    lambda_bar: float
    sigma_eff_sq: float
    pi_ww: float
    pi_vv: float
    pi_wv: float
    gamma_eff: float


def perp_projection(a: VectorSpec, b: VectorSpec, params, rho_ab: float | None = None) -> float:
    """Limit of ``a^T P_perp b / (|a| |b|)`` under ``params``.

    ``params`` carries ``gamma_u``, ``lam`` and ``alpha``
    (see :class:`pcareg.risk.ModelParams`).
    """
    rho_ab = resolve_rho(a, b, rho_ab)
    spike_w = a.rho_with_spike * b.rho_with_spike
    bulk_w = rho_ab - spike_w
    alpha = params.alpha
    if alpha == 1.0:
        return 0.0
    if alpha == 0.0:
        return rho_ab - spike_w * bbp_overlap(params.lam, params.gamma_u)
    return tail_mass_from_weights(spike_w, bulk_w, params.gamma_u, params.lam, alpha)


def effective_projection(
    p_ab: float,
    *,
    p_av: float,
    p_bv: float,
    p_vv: float,
    lambda_bar: float,
    gamma_eff: float,
) -> float:
    """Limit of the row-space overlap ``a^T Pi b / (|a| |b|)``.

    Inputs are retained-projection limits of the pair and of each vector with
    the spike.  Quadratic case: ``p_ab = p(a, a)`` with ``p_bv = p_av``.
    """
    gamma_eff = check_gamma_eff(gamma_eff)
    if gamma_eff < 1.0:
        return p_ab
    if p_av * p_bv == 0.0:
        h = 0.0
    else:
        if p_vv <= 0.0:
            raise DomainError("p_vv = 0 with nonzero spike overlaps is infeasible")
        h = p_av * p_bv / p_vv
    return (p_ab - h) / gamma_eff + h * lambda_bar / (gamma_eff - 1.0 + lambda_bar)


def _perp_triple(params) -> tuple[float, float, float]:
    """(p_perp_ww, p_perp_vv, p_perp_wv) for the signal/spike pair."""
    rho = math.sqrt(params.eta)  # sign convention: rho_{w*,v} = +sqrt(eta)
    w = VectorSpec(rho_with_spike=rho, norm_sq=params.w_star_norm_sq)
    perp_ww = perp_projection(w, w, params)
    perp_vv = perp_projection(SPIKE, SPIKE, params)
    perp_wv = perp_projection(w, SPIKE, params)
    return perp_ww, perp_vv, perp_wv


def perp_bundle(params) -> tuple[float, float, float, float, float, float, float, float]:
    """Retained/discarded limits plus lambda_bar and sigma_eff_sq.

    Independent of gamma_l, hence well-defined even at gamma_eff = 1.
    Returns (p_ww, p_vv, p_wv, perp_ww, perp_vv, perp_wv, lambda_bar,
    sigma_eff_sq).
    """
    rho = math.sqrt(params.eta)
    perp_ww, perp_vv, perp_wv = _perp_triple(params)
    p_ww = 1.0 - perp_ww
    p_vv = 1.0 - perp_vv
    p_wv = rho - perp_wv
    lambda_bar = 1.0 + (params.lam - 1.0) * p_vv
    sigma_eff_sq = perp_ww + (params.lam - 1.0) / lambda_bar * perp_wv**2
    return p_ww, p_vv, p_wv, perp_ww, perp_vv, perp_wv, lambda_bar, sigma_eff_sq


def projection_bundle(params) -> ProjectionLimits:
    """All projection limits of one instance; requires gamma_eff outside the
    guard band ``|gamma_eff - 1| < GAMMA_EFF_GUARD``."""
    p_ww, p_vv, p_wv, perp_ww, perp_vv, perp_wv, lambda_bar, sigma_eff_sq = perp_bundle(
        params
    )
    gamma_eff = check_gamma_eff(params.gamma_eff)
    pi_ww = effective_projection(
        p_ww, p_av=p_wv, p_bv=p_wv, p_vv=p_vv, lambda_bar=lambda_bar, gamma_eff=gamma_eff
    )
    pi_vv = effective_projection(
        p_vv, p_av=p_vv, p_bv=p_vv, p_vv=p_vv, lambda_bar=lambda_bar, gamma_eff=gamma_eff
    )
    pi_wv = effective_projection(
        p_wv, p_av=p_wv, p_bv=p_vv, p_vv=p_vv, lambda_bar=lambda_bar, gamma_eff=gamma_eff
    )
    return ProjectionLimits(
        p_ww=p_ww,
        p_vv=p_vv,
        p_wv=p_wv,
        p_perp_ww=perp_ww,
        p_perp_vv=perp_vv,
        p_perp_wv=perp_wv,
        lambda_bar=lambda_bar,
        sigma_eff_sq=sigma_eff_sq,
        pi_ww=pi_ww,
        pi_vv=pi_vv,
        pi_wv=pi_wv,
        gamma_eff=gamma_eff,
    )


__all__ = [
    "GAMMA_EFF_GUARD",
    "SPIKE",
    "ProjectionLimits",
    "VectorSpec",
    "effective_projection",
    "perp_bundle",
    "perp_projection",
    "projection_bundle",
    "resolve_rho",
]
