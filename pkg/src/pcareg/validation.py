"""Input validation helpers.

Every public entry point funnels scalar arguments through these checks so
that bad inputs fail with :class:`~pcareg.errors.DomainError` (or
:class:`~pcareg.errors.SingularityError` near poles) instead of propagating
NaNs through the closed-form expressions.
"""

from __future__ import annotations

import math

from .errors import DomainError, SingularityError

# Standing assumption of the limiting formulas: the effective aspect ratio of
# the compressed downstream design stays away from the interpolation point.
GAMMA_EFF_GUARD = 1e-6


def check_finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def check_positive(x: float, name: str) -> float:
    x = check_finite(x, name)
    if x <= 0.0:
        raise DomainError(f"{name} must be > 0, got {x}")
    return x


def check_nonnegative(x: float, name: str) -> float:
    x = check_finite(x, name)
    if x < 0.0:
        raise DomainError(f"{name} must be >= 0, got {x}")
    return x


def check_unit_interval(x: float, name: str) -> float:
    x = check_finite(x, name)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must be in [0, 1], got {x}")
    return x


def check_signed_unit(x: float, name: str) -> float:
    x = check_finite(x, name)
    if not -1.0 <= x <= 1.0:
        raise DomainError(f"{name} must be in [-1, 1], got {x}")
    return x


def check_aspect_ratio(gamma: float, name: str = "gamma") -> float:
    return check_positive(gamma, name)


def check_aspect_ratio_not_one(gamma: float, name: str = "gamma") -> float:
    gamma = check_aspect_ratio(gamma, name)
    if abs(gamma - 1.0) < GAMMA_EFF_GUARD:
        raise SingularityError(
            f"{name} = {gamma} is inside the guard band |{name} - 1| < {GAMMA_EFF_GUARD}"
        )
    return gamma


def check_gamma_eff(gamma_eff: float) -> float:
    """Effective aspect ratio: >= 0 allowed (0 at the one-component endpoint)."""
    gamma_eff = check_nonnegative(gamma_eff, "gamma_eff")
    if abs(gamma_eff - 1.0) < GAMMA_EFF_GUARD:
        raise SingularityError(
            f"gamma_eff = {gamma_eff} is inside the guard band "
            f"|gamma_eff - 1| < {GAMMA_EFF_GUARD}"
        )
    return gamma_eff


def check_spike(lam: float, name: str = "lam") -> float:
    lam = check_finite(lam, name)
    if lam <= 1.0:
        raise DomainError(f"{name} must be > 1, got {lam}")
    return lam


def check_positive_int(n: int, name: str) -> int:
    if not isinstance(n, (int,)) or isinstance(n, bool):
        raise DomainError(f"{name} must be an int, got {type(n).__name__}")
    if n < 1:
        raise DomainError(f"{name} must be >= 1, got {n}")
    return n
