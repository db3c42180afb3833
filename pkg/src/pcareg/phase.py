"""Optimal representation size and phase-transition boundaries.

Two analytic boundaries bracket the region where compression helps:

* ``gamma_l > 1`` (small downstream task): the generalisation error has two
  local minima, one at full rank and one at small retention.  Their crossing
  is approximated by the endpoint condition ``E_gen(0) = E_gen(1)``, which for
  a matched test covariance reads ``B0(c(gamma_u)) = B1(gamma_l) +
  1/(S (gamma_l - 1))`` with

      B0(c) = 1 + eta (lam - 1) - eta lam^2 c / (1 + (lam - 1) c)
      B1(g) = (1 - eta)(g - 1)/g + eta lam g (g - 1) / (g - 1 + lam)^2.

  The condition is a proxy; :func:`heatmap` exposes the grid-argmax
  transition alongside it so any discrepancy is visible.

* ``gamma_l < 1`` (large downstream task): full rank is locally optimal iff
  ``gamma_l <= S D / (1 + S D)`` where ``D = (1 - eta) + eta D_v(gamma_u)``
  and ``D_v`` is the retention derivative of the spike overlap at alpha = 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, SingularityError
from .measures import bbp_overlap
from .risk import ModelParams, TestSpikeSpec, generalisation_error
from .validation import check_positive, check_spike, check_unit_interval

# Width (in alpha) excluded on each side of the interpolation peak alpha = 1/gamma_l.
GUARD_FRACTION = 0.02


class RegimeTag(Enum):
    ENDPOINT_CONDITION = "endpoint_condition"
    STABILITY_BOUNDARY = "stability_boundary"


@dataclass(frozen=True)
class PhaseCurvePoint:
    gamma_u: float
    gamma_l_boundary: float
    regime_tag: RegimeTag


@dataclass(frozen=True)
class AlphaGrid:
    """Retention-fraction grid with exact endpoints and a singularity guard.

    ``guard_band`` is the excluded half-width around ``alpha = 1/gamma_l``
    (applied only when the peak falls inside (0, 1]); the endpoints 0 and 1
    are always members of ``values`` but are skipped during evaluation when
    they land inside the guard band.
    """

    values: tuple[float, ...]
    guard_band: float = 0.0

    def __post_init__(self):
        vals = tuple(sorted(set(float(v) for v in self.values)))
        if not vals or vals[0] != 0.0 or vals[-1] != 1.0:
            raise DomainError("AlphaGrid must include both endpoints 0 and 1")
        for v in vals:
            check_unit_interval(v, "alpha grid value")
        object.__setattr__(self, "values", vals)

    @classmethod
    def build(
        cls, gamma_l: float, num: int = 30, lo: float = 0.01, guard_fraction: float = GUARD_FRACTION
    ) -> "AlphaGrid":
        """Log-spaced interior sweep plus the exact endpoints {0, 1}."""
        interior = np.geomspace(lo, 1.0, num)
        guard = guard_fraction / gamma_l if gamma_l > 0 else 0.0
        return cls(values=(0.0, 1.0, *interior.tolist()), guard_band=guard)

    def evaluation_values(self, gamma_l: float) -> list[float]:
        """Grid values outside the guard band around alpha = 1/gamma_l."""
        peak = 1.0 / gamma_l
        if self.guard_band <= 0.0:
            return list(self.values)
        return [v for v in self.values if abs(v - peak) >= self.guard_band]


def _argmin_alpha(params: ModelParams, test: TestSpikeSpec, values) -> tuple[float, float]:
    best_alpha = math.nan
    best_val = math.inf
    for a in values:
        try:
            val = generalisation_error(params.with_alpha(a), test).e_gen
        except SingularityError:
            continue
        if val < best_val or (val == best_val and a > best_alpha):
            best_val = val
            best_alpha = a
    if not math.isfinite(best_val):
        raise SingularityError(
            f"no evaluable alpha on the grid for gamma_l = {params.gamma_l}"
        )
    return best_alpha, best_val


def optimal_alpha(
    params: ModelParams, test: TestSpikeSpec, grid: AlphaGrid
) -> tuple[float, float]:
    """Grid argmin of the generalisation error over retention fractions.

    ``params.alpha`` is ignored.  Ties (within float equality) break toward
    the larger alpha: when compression buys nothing, prefer none.  Alpha
    values inside the guard band, or rejected by the formulas' own
    singularity guard, are skipped.
    """
    return _argmin_alpha(params, test, grid.evaluation_values(params.gamma_l))


def endpoint_b0(c: float, lam: float, eta: float) -> float:
    """Normalized alpha -> 0 generalisation bias, matched test covariance."""
    return 1.0 + eta * (lam - 1.0) - eta * lam**2 * c / (1.0 + (lam - 1.0) * c)


def endpoint_b1(gamma_l: float, lam: float, eta: float) -> float:
    """Normalized alpha = 1 generalisation bias (gamma_l > 1), matched case."""
    return (1.0 - eta) * (gamma_l - 1.0) / gamma_l + eta * lam * gamma_l * (
        gamma_l - 1.0
    ) / (gamma_l - 1.0 + lam) ** 2


@dataclass(frozen=True)
class TransitionSearch:
    """Roots of the endpoint condition in gamma_l for one gamma_u."""

    gamma_l: float | None  # smallest root, None when no crossing exists
    roots: tuple[float, ...] = field(default_factory=tuple)

    @property
    def n_roots(self) -> int:
        return len(self.roots)


def endpoint_transition_curve(
    lam: float,
    eta: float,
    snr: float,
    gamma_u: float,
    gamma_l_max: float = 50.0,
    scan_points: int = 600,
    tol: float = 1e-12,
) -> TransitionSearch:
    """Solve the endpoint condition ``E_gen(0) = E_gen(1)`` for gamma_l > 1.

    Scans ``(1 + eps, gamma_l_max]`` for sign changes of
    ``B1(gamma_l) + 1/(S (gamma_l - 1)) - B0(c(gamma_u))`` and bisects each
    bracket.  All crossings are reported; the headline value is the smallest.
    An empty result is a legitimate outcome (no transition at this gamma_u).
    """
    lam = check_spike(lam)
    eta = check_unit_interval(eta, "eta")
    snr = check_positive(snr, "snr")
    c = bbp_overlap(lam, gamma_u)
    b0 = endpoint_b0(c, lam, eta)

    def g(gl: float) -> float:
        return endpoint_b1(gl, lam, eta) + 1.0 / (snr * (gl - 1.0)) - b0

    lo = 1.0 + 1e-9
    grid = np.geomspace(lo, gamma_l_max, scan_points)
    vals = np.array([g(x) for x in grid])
    roots: list[float] = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
            continue
        if fa * fb < 0.0:
            for _ in range(200):
                mid = 0.5 * (a + b)
                fm = g(mid)
                if fm == 0.0 or (b - a) < tol * max(1.0, mid):
                    break
                if fa * fm < 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            roots.append(0.5 * (a + b))
    roots_t = tuple(sorted(roots))
    return TransitionSearch(gamma_l=roots_t[0] if roots_t else None, roots=roots_t)


def spike_overlap_alpha_derivative(lam: float, gamma_u: float) -> float:
    """Retention derivative ``D_v`` of the spike overlap at alpha = 1."""
    lam = check_spike(lam)
    check_positive(gamma_u, "gamma_u")
    if gamma_u < 1.0:
        return lam * gamma_u / (lam - 1.0 + math.sqrt(gamma_u)) ** 2
    return gamma_u / (gamma_u - 1.0 + lam)


def stability_boundary(lam: float, eta: float, snr: float, gamma_u: float) -> float:
    """Critical gamma_l below which the full representation is locally optimal."""
    eta = check_unit_interval(eta, "eta")
    snr = check_positive(snr, "snr")
    d = (1.0 - eta) + eta * spike_overlap_alpha_derivative(lam, gamma_u)
    return snr * d / (1.0 + snr * d)


def train_optimal_alpha(gamma_l: float) -> float:
    """Training-error-optimal retention: full rank if oversampled, else n_l/p."""
    check_positive(gamma_l, "gamma_l")
    return min(1.0, 1.0 / gamma_l)


def _min_gen_error(
    p: int,
    n_u: float,
    n_l: float,
    template: ModelParams,
    test: TestSpikeSpec,
    grid: AlphaGrid,
    positive_alpha_only: bool = False,
) -> tuple[float, float]:
    gamma_l = p / n_l
    params = ModelParams(
        gamma_u=p / n_u,
        gamma_l=gamma_l,
        alpha=1.0,
        lam=template.lam,
        eta=template.eta,
        w_star_norm_sq=template.w_star_norm_sq,
        noise_var=template.noise_var,
    )
    values = grid.evaluation_values(gamma_l)
    if positive_alpha_only:
        values = [a for a in values if a > 0.0]
    return _argmin_alpha(params, test, values)


def heatmap(
    template: ModelParams,
    test: TestSpikeSpec,
    n_u_values,
    n_l_values,
    grid: AlphaGrid,
    p: int,
    threads: int = 1,
    positive_alpha_only: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """(alpha_star, e_gen_min) over the (n_u, n_l) grid at fixed ``p``.

    Row-major over (n_u, n_l): entry [i, j] belongs to
    (n_u_values[i], n_l_values[j]).  Cells where no alpha is evaluable are
    marked with NaN rather than aborting the sweep.  Cells are independent;
    the executor only changes scheduling, never values or output order.
    ``positive_alpha_only`` drops the exact zero endpoint from the per-cell
    minimization (used for differencing the surface in the sample sizes).
    """
    n_u_values = [float(x) for x in n_u_values]
    n_l_values = [float(x) for x in n_l_values]
    alpha_star = np.full((len(n_u_values), len(n_l_values)), np.nan)
    e_min = np.full_like(alpha_star, np.nan)

    def fill_row(i: int) -> None:
        for j, n_l in enumerate(n_l_values):
            try:
                a, e = _min_gen_error(p, n_u_values[i], n_l, template, test, grid,
                                      positive_alpha_only)
            except SingularityError:
                continue
            alpha_star[i, j] = a
            e_min[i, j] = e

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(len(n_u_values))))
    else:
        for i in range(len(n_u_values)):
            fill_row(i)
    return alpha_star, e_min


def substitution_rate(
    template: ModelParams,
    test: TestSpikeSpec,
    grid: AlphaGrid,
    p: int,
    n_u: float,
    n_l: float,
    h_u: float,
    h_l: float,
) -> tuple[float, bool]:
    """Marginal rate of substitution between pretraining and labelled samples.

    ``(dE*/dn_u) / (dE*/dn_l)`` with ``E* = min_alpha E_gen``, central
    differences with steps (h_u, h_l).  Stencil points falling at or below
    n = 0 trigger one-sided differences; the returned flag is True when
    either axis was one-sided.

    The minimization runs over the *positive* grid values only.  The exact
    zero endpoint is the fixed-dimension representation whose limit error is
    flat in the labelled sample size, which would put spurious poles into the
    rate; the positive sweep matches how the rate map is defined.
    """
    check_positive(h_u, "h_u")
    check_positive(h_l, "h_l")

    def e_star(nu: float, nl: float) -> float:
        return _min_gen_error(p, nu, nl, template, test, grid,
                              positive_alpha_only=True)[1]

    one_sided = False

    def diff(center_u: float, center_l: float, axis: str, h: float) -> float:
        nonlocal one_sided
        if axis == "u":
            lo, hi = center_u - h, center_u + h
            if lo <= 0.0:
                one_sided = True
                return (e_star(hi, center_l) - e_star(center_u, center_l)) / h
            return (e_star(hi, center_l) - e_star(lo, center_l)) / (2.0 * h)
        lo, hi = center_l - h, center_l + h
        if lo <= 0.0:
            one_sided = True
            return (e_star(center_u, hi) - e_star(center_u, center_l)) / h
        return (e_star(center_u, hi) - e_star(center_u, lo)) / (2.0 * h)

    d_u = diff(n_u, n_l, "u", h_u)
    d_l = diff(n_u, n_l, "l", h_l)
    if d_l == 0.0:
        return (math.inf if d_u != 0.0 else 0.0), one_sided
    return d_u / d_l, one_sided
