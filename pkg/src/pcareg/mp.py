"""Marchenko-Pastur law utilities.

The MP law with aspect ratio ``gamma`` (features per sample) has bulk density

    f(theta) = sqrt((lp - theta) (theta - lm)) / (2 pi theta gamma)

on ``[lm, lp]`` with edges ``lm = (1 - sqrt(gamma))^2``,
``lp = (1 + sqrt(gamma))^2``, plus a point mass ``1 - 1/gamma`` at zero when
``gamma > 1``.

All bulk integrals in this package are evaluated after the change of variable

    theta(t) = 1 + gamma - 2 sqrt(gamma) cos(t),   t in [0, pi],

which removes the square-root singularities at both edges:
``sqrt((lp - theta)(theta - lm)) = 2 sqrt(gamma) sin(t)`` and
``d theta = 2 sqrt(gamma) sin(t) dt``, so for any integrand ``h``

    int h(theta) f(theta) d theta = (2/pi) int h(theta(t)) sin(t)^2 / theta(t) dt.

For ``h = 1`` the angle integral has an exact antiderivative, which this
module uses for the CDF and its quantile: with ``a = 1 + gamma``,
``b = 2 sqrt(gamma)``,

    (2/pi) [ sin(t)/b + a t / b^2
             - (|1 - gamma| / (2 gamma)) arctan(sqrt(lp/lm) tan(t/2)) ],

degenerating to ``(t + sin t)/pi`` at gamma = 1.  Quadrature is reserved for
weighted integrals (see :mod:`pcareg.measures`), which keeps this module an
independent closed form that the test suite cross-checks against adaptive
quadrature of the density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SingularityError
from .validation import (
    check_aspect_ratio,
    check_finite,
    check_unit_interval,
)

# Absolute tolerance, in CDF value, for the bulk-threshold quantile.
QUANTILE_F_TOL = 1e-10


@dataclass(frozen=True)
class MPSupport:
    """Support of the MP law: bulk edges plus the weight of the zero atom."""

    lambda_minus: float
    lambda_plus: float
    atom_at_zero: float

    @classmethod
    def from_gamma(cls, gamma: float) -> "MPSupport":
        gamma = check_aspect_ratio(gamma)
        s = math.sqrt(gamma)
        return cls(
            lambda_minus=(1.0 - s) ** 2,
            lambda_plus=(1.0 + s) ** 2,
            atom_at_zero=max(0.0, 1.0 - 1.0 / gamma),
        )


def theta_from_angle(gamma: float, t: float) -> float:
    """Bulk location at angle ``t`` in [0, pi] (t=0 lower edge, t=pi upper)."""
    return 1.0 + gamma - 2.0 * math.sqrt(gamma) * math.cos(t)


def angle_from_theta(gamma: float, theta: float) -> float:
    """Inverse of :func:`theta_from_angle`, clipped onto the bulk."""
    c = (1.0 + gamma - theta) / (2.0 * math.sqrt(gamma))
    return math.acos(min(1.0, max(-1.0, c)))


def bulk_cdf_angle(gamma: float, t: float) -> float:
    """Continuous bulk mass between the lower edge and angle ``t`` in [0, pi]."""
    if t <= 0.0:
        return 0.0
    t = min(t, math.pi)
    if gamma == 1.0:
        return (t + math.sin(t)) / math.pi
    a = 1.0 + gamma
    b = 2.0 * math.sqrt(gamma)
    # atan2 form stays finite at t = pi where tan(t/2) diverges
    ratio = (1.0 + math.sqrt(gamma)) / abs(1.0 - math.sqrt(gamma))
    arct = math.atan2(ratio * math.sin(0.5 * t), math.cos(0.5 * t))
    val = (
        math.sin(t) / b
        + a * t / (b * b)
        - (abs(1.0 - gamma) / (2.0 * gamma)) * arct
    )
    return (2.0 / math.pi) * val


def mp_density(gamma: float, theta: float) -> float:
    """Bulk density of the MP law at ``theta``; zero outside the open bulk.

    The zero atom (gamma > 1) is never part of the return value.
    """
    gamma = check_aspect_ratio(gamma)
    theta = check_finite(theta, "theta")
    sup = MPSupport.from_gamma(gamma)
    if theta <= sup.lambda_minus or theta >= sup.lambda_plus:
        return 0.0
    disc = (sup.lambda_plus - theta) * (theta - sup.lambda_minus)
    return math.sqrt(disc) / (2.0 * math.pi * theta * gamma)


def mp_cdf(gamma: float, theta: float) -> float:
    """CDF of the MP law at ``theta >= 0``, zero atom included."""
    gamma = check_aspect_ratio(gamma)
    theta = check_finite(theta, "theta")
    if theta < 0.0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    sup = MPSupport.from_gamma(gamma)
    if theta >= sup.lambda_plus:
        return 1.0
    if theta <= sup.lambda_minus:
        return sup.atom_at_zero
    return sup.atom_at_zero + bulk_cdf_angle(gamma, angle_from_theta(gamma, theta))


def mp_bulk_threshold(gamma_u: float, alpha: float) -> float:
    """Quantile ``lambda_t`` with ``F(lambda_t) = 1 - alpha``.

    Retaining the top ``alpha`` fraction of directions discards everything
    below ``lambda_t``.  Bisection runs in the angle variable (the CDF
    derivative vanishes at the edges in theta, but not in t) until the CDF
    residual is below ``QUANTILE_F_TOL``.

    For ``gamma_u > 1`` and ``1 - alpha <= atom_at_zero`` the target falls on
    the zero atom and the threshold collapses to 0; projection formulas handle
    that regime through the nullspace fraction instead.
    """
    gamma_u = check_aspect_ratio(gamma_u, "gamma_u")
    alpha = check_unit_interval(alpha, "alpha")
    sup = MPSupport.from_gamma(gamma_u)
    target = 1.0 - alpha
    if gamma_u > 1.0 and target <= sup.atom_at_zero:
        return 0.0
    bulk_target = target - sup.atom_at_zero
    if bulk_target <= 0.0:
        return sup.lambda_minus
    lo, hi = 0.0, math.pi
    f_hi = bulk_cdf_angle(gamma_u, hi)
    if bulk_target >= f_hi:
        return sup.lambda_plus
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = bulk_cdf_angle(gamma_u, mid)
        if abs(f_mid - bulk_target) <= QUANTILE_F_TOL:
            return theta_from_angle(gamma_u, mid)
        if f_mid < bulk_target:
            lo = mid
        else:
            hi = mid
    return theta_from_angle(gamma_u, 0.5 * (lo + hi))


def mp_inverse_moment(gamma: float) -> float:
    """``int (1/x) dF_gamma(x)`` over the nonzero spectrum.

    Equals ``1/(1 - gamma)`` below 1 and ``1/(gamma (gamma - 1))`` above.
    """
    gamma = check_aspect_ratio(gamma)
    if abs(gamma - 1.0) < 1e-6:
        raise SingularityError(f"inverse moment diverges at gamma = 1 (got {gamma})")
    if gamma < 1.0:
        return 1.0 / (1.0 - gamma)
    return 1.0 / (gamma * (gamma - 1.0))


def pseudoinverse_trace_limit(gamma_eff: float) -> float:
    """Limit of ``Tr[(X^T X)^+]`` for an n x m Gaussian design, m/n -> gamma_eff.

    ``gamma_eff / (1 - gamma_eff)`` below 1, ``1 / (gamma_eff - 1)`` above;
    equivalently ``min(gamma_eff, 1) / |gamma_eff - 1|``.  Defined as 0 at
    ``gamma_eff = 0``.
    """
    gamma_eff = check_finite(gamma_eff, "gamma_eff")
    if gamma_eff < 0.0:
        raise DomainError(f"gamma_eff must be >= 0, got {gamma_eff}")
    if gamma_eff == 0.0:
        return 0.0
    if abs(gamma_eff - 1.0) < 1e-6:
        raise SingularityError(
            f"pseudoinverse trace diverges at gamma_eff = 1 (got {gamma_eff})"
        )
    return min(gamma_eff, 1.0) / abs(gamma_eff - 1.0)
