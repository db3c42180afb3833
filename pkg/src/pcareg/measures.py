"""Limiting spectral measures of the pretraining sample covariance.

A fixed direction ``a`` (or a pair ``a, b``) has a population mass measure on
the eigenbasis of the spiked covariance ``Sigma = I + (lam - 1) v v^T``:

    G = bulk_weight * delta_1 + spike_weight * delta_lam,

with ``spike_weight = rho_{a,v} rho_{b,v}`` and
``bulk_weight = rho_{a,b} - rho_{a,v} rho_{b,v}`` (quadratic case: a = b,
weights nonnegative and summing to 1; signed case: the bulk weight may be
negative).  In the high-dimensional limit the matching mass measure on the
eigenbasis of ``S_u = X_u^T X_u / n_u`` consists of

* a bulk density ``g(theta) = H(theta) f_{gamma_u}(theta)`` with

      H(theta) = bulk_weight + spike_weight * K(lam, theta),
      K(tau, theta) = tau gamma_u / (tau^2 - tau (1 - gamma_u + theta) + theta),

  where the ``tau = 1`` kernel is identically 1 and the ``tau = lam`` kernel
  has its only pole at the spike location ``theta_star``, always at or above
  the bulk edge;
* above the BBP transition (``gamma_u < (lam - 1)^2``), an atom of weight
  ``c(gamma_u) * spike_weight`` at ``theta_star = lam (lam - 1 + gamma_u) / (lam - 1)``;
* for ``gamma_u > 1``, an atom at zero of weight
  ``spike_weight (gamma_u - 1)/(gamma_u - 1 + lam) + bulk_weight (gamma_u - 1)/gamma_u``.

The population measure being two-point means every integral against the bulk
reduces to the exact MP bulk CDF plus one weighted quadrature of the
``tau = lam`` kernel; no integration over a general population spectrum is
ever performed.  Note the spike's population mass **not** captured by the atom
is already carried by the bulk density through the ``tau = lam`` kernel term,
so no explicit redistribution happens below the BBP transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import quad

from .errors import DomainError, NumericError
from .mp import (
    MPSupport,
    angle_from_theta,
    bulk_cdf_angle,
    mp_bulk_threshold,
    mp_density,
    theta_from_angle,
)
from .validation import (
    check_aspect_ratio,
    check_spike,
    check_unit_interval,
)

# Tolerances for the weighted bulk quadrature (angle variable, smooth
# integrand); anything worse than ACCEPT_ABS is treated as non-convergence.
_QUAD_EPSABS = 1e-11
_QUAD_EPSREL = 1e-10
_QUAD_ACCEPT_ABS = 1e-8


@dataclass(frozen=True)
class PopulationMassSpec:
    """Two-point (possibly signed) population mass measure on {1, lam}."""

    spike_weight: float
    bulk_weight: float
    lam: float

    def __post_init__(self):
        check_spike(self.lam)
        if abs(self.spike_weight) > 1.0 + 1e-12:
            raise DomainError(f"|spike_weight| must be <= 1, got {self.spike_weight}")
        if abs(self.total_mass) > 1.0 + 1e-12:
            raise DomainError(
                f"|spike_weight + bulk_weight| must be <= 1, got {self.total_mass}"
            )

    @property
    def total_mass(self) -> float:
        return self.spike_weight + self.bulk_weight

    @classmethod
    def quadratic(cls, eta: float, lam: float) -> "PopulationMassSpec":
        eta = check_unit_interval(eta, "eta")
        return cls(spike_weight=eta, bulk_weight=1.0 - eta, lam=lam)


def spike_location(lam: float, gamma_u: float) -> float:
    """Location of the spike in the sample covariance spectrum (above BBP)."""
    lam = check_spike(lam)
    gamma_u = check_aspect_ratio(gamma_u, "gamma_u")
    if gamma_u >= (lam - 1.0) ** 2:
        raise DomainError(
            f"spike absorbed into bulk: gamma_u = {gamma_u} >= (lam - 1)^2 = "
            f"{(lam - 1.0) ** 2}"
        )
    return lam * (lam - 1.0 + gamma_u) / (lam - 1.0)


def bbp_overlap(lam: float, gamma_u: float) -> float:
    """Squared overlap between the population and sample spike eigenvectors.

    ``(1 - gamma_u/(lam-1)^2) / (1 + gamma_u/(lam-1))`` above the BBP
    transition and 0 at or below it; continuous at the boundary.
    """
    lam = check_spike(lam)
    gamma_u = check_aspect_ratio(gamma_u, "gamma_u")
    if gamma_u >= (lam - 1.0) ** 2:
        return 0.0
    return (1.0 - gamma_u / (lam - 1.0) ** 2) / (1.0 + gamma_u / (lam - 1.0))


def _spike_kernel(lam: float, gamma_u: float, theta: float) -> float:
    # tau = lam case of K; denominator (lam-1)(lam-theta) + lam*gamma_u > 0 on
    # the open bulk because the pole theta_star never lies below lambda_plus
    return lam * gamma_u / ((lam - 1.0) * (lam - theta) + lam * gamma_u)


def _spike_bulk_mass(gamma_u: float, lam: float, t_hi: float) -> float:
    """(2/pi) int_0^{t_hi} K(lam, theta(t)) sin(t)^2 / theta(t) dt."""
    if t_hi <= 0.0:
        return 0.0

    def integrand(t: float) -> float:
        theta = theta_from_angle(gamma_u, t)
        s = math.sin(t)
        return _spike_kernel(lam, gamma_u, theta) * s * s / theta

    out = quad(
        integrand,
        0.0,
        t_hi,
        epsabs=_QUAD_EPSABS,
        epsrel=_QUAD_EPSREL,
        limit=200,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3 and abserr > _QUAD_ACCEPT_ABS:
        raise NumericError(
            f"spike-component bulk quadrature did not converge: {out[3]}",
            achieved_tol=abserr,
        )
    return (2.0 / math.pi) * value


def _zero_atoms(gamma_u: float, lam: float) -> tuple[float, float]:
    """Per-component zero-atom weights (bulk component, spike component)."""
    if gamma_u <= 1.0:
        return 0.0, 0.0
    return (gamma_u - 1.0) / gamma_u, (gamma_u - 1.0) / (gamma_u - 1.0 + lam)


@dataclass(frozen=True)
class SampleMeasure:
    """Limiting mass measure of a fixed direction pair on the PCA eigenbasis."""

    pop: PopulationMassSpec
    gamma_u: float
    spike_atom: tuple[float, float]  # (location, weight); (nan, 0) below BBP
    zero_atom: float

    def bulk_density(self, theta: float) -> float:
        f = mp_density(self.gamma_u, theta)
        if f == 0.0:
            return 0.0
        h = self.pop.bulk_weight + self.pop.spike_weight * _spike_kernel(
            self.pop.lam, self.gamma_u, theta
        )
        return h * f


def sample_measure(pop: PopulationMassSpec, gamma_u: float) -> SampleMeasure:
    """Assemble the limiting sample-covariance mass measure for ``pop``."""
    gamma_u = check_aspect_ratio(gamma_u, "gamma_u")
    c = bbp_overlap(pop.lam, gamma_u)
    if c > 0.0:
        atom = (spike_location(pop.lam, gamma_u), c * pop.spike_weight)
    else:
        atom = (math.nan, 0.0)
    z_bulk, z_spike = _zero_atoms(gamma_u, pop.lam)
    zero = pop.bulk_weight * z_bulk + pop.spike_weight * z_spike
    return SampleMeasure(pop=pop, gamma_u=gamma_u, spike_atom=atom, zero_atom=zero)


def measure_tail_mass(meas: SampleMeasure, lambda_t: float, alpha: float) -> float:
    """Mass of ``meas`` on the discarded (bottom ``1 - alpha``) directions.

    Three regimes: bulk integral up to ``lambda_t`` alone for ``gamma_u < 1``;
    plus the whole zero atom when ``gamma_u > 1`` and ``alpha < 1/gamma_u``;
    the discarded nullspace fraction ``(1 - alpha) / (1 - 1/gamma_u)`` of the
    zero atom once every positive direction is retained.  Signed measures are
    integrated as-is (the bulk "density" may be negative pointwise).
    """
    alpha = check_unit_interval(alpha, "alpha")
    gamma_u = meas.gamma_u
    sup = MPSupport.from_gamma(gamma_u)
    if not sup.lambda_minus - 1e-12 <= lambda_t <= sup.lambda_plus + 1e-12:
        if not (gamma_u > 1.0 and 0.0 <= lambda_t < sup.lambda_minus):
            raise DomainError(
                f"lambda_t = {lambda_t} outside [{sup.lambda_minus}, {sup.lambda_plus}]"
            )
    if gamma_u > 1.0 and alpha * gamma_u >= 1.0:
        frac = (1.0 - alpha) / (1.0 - 1.0 / gamma_u)
        return frac * meas.zero_atom
    t_hi = angle_from_theta(gamma_u, lambda_t) if lambda_t > sup.lambda_minus else 0.0
    bulk = meas.pop.bulk_weight * bulk_cdf_angle(gamma_u, t_hi)
    bulk += meas.pop.spike_weight * _spike_bulk_mass(gamma_u, meas.pop.lam, t_hi)
    if gamma_u > 1.0:
        bulk += meas.zero_atom
    return bulk


@lru_cache(maxsize=262144)
def discard_coefficients(gamma_u: float, lam: float, alpha: float) -> tuple[float, float]:
    """Per-component discarded-mass coefficients at retention fraction ``alpha``.

    Tail mass is linear in the population weights, so a single pair
    ``(coef_bulk, coef_spike)`` serves every direction pair at the same
    ``(gamma_u, lam, alpha)``:

        tail(a, b) = bulk_weight * coef_bulk + spike_weight * coef_spike.

    ``alpha = 0`` and ``alpha = 1`` return the exact endpoint values (the
    spike atom is always retained first; at alpha = 0 everything else is
    discarded), avoiding zero-width quadrature.  Cached because risk sweeps
    revisit the same grid values many times.
    """
    gamma_u = check_aspect_ratio(gamma_u, "gamma_u")
    lam = check_spike(lam)
    alpha = check_unit_interval(alpha, "alpha")
    if alpha == 1.0:
        return 0.0, 0.0
    if alpha == 0.0:
        return 1.0, 1.0 - bbp_overlap(lam, gamma_u)
    z_bulk, z_spike = _zero_atoms(gamma_u, lam)
    if gamma_u > 1.0 and alpha * gamma_u >= 1.0:
        frac = (1.0 - alpha) / (1.0 - 1.0 / gamma_u)
        return frac * z_bulk, frac * z_spike
    lambda_t = mp_bulk_threshold(gamma_u, alpha)
    t_hi = angle_from_theta(gamma_u, lambda_t)
    coef_bulk = bulk_cdf_angle(gamma_u, t_hi) + z_bulk
    coef_spike = _spike_bulk_mass(gamma_u, lam, t_hi) + z_spike
    return coef_bulk, coef_spike


def tail_mass_from_weights(
    spike_weight: float, bulk_weight: float, gamma_u: float, lam: float, alpha: float
) -> float:
    """Discarded mass of the two-point measure, via the cached coefficients."""
    coef_bulk, coef_spike = discard_coefficients(gamma_u, lam, alpha)
    return bulk_weight * coef_bulk + spike_weight * coef_spike
