"""Per-observation loss families expressed as piecewise cost functions.

Each family maps a data point ``y`` to the additive cost contribution
``gamma(y, theta)`` of a segment parameter ``theta``, stored up to
data-independent constants:

- ``gauss``:    ``w*(theta - y)**2`` (quadratic basis), with optional
  robust truncation (``K`` finite, ``a`` in {0, inf}) or linear tails
  of slope ``a`` (Huber, ``0 < a < inf``),
- ``poisson``:  ``w*(theta - y*log(theta))`` (lin-log),
- ``exp``:      ``w*(y*theta - log(theta))``, ``theta`` the rate (lin-log),
- ``variance``: ``w*(y**2*theta/2 - log(theta)/2)``, ``theta = 1/sigma**2``
  (lin-log),
- ``binomial``: ``w*(-y*log(theta) - (1-y)*log(1-theta))`` (log-log),
- ``negbin``:   ``w*(-size*log(theta) - y*log(1-theta))``, ``theta`` the
  success probability of a negative binomial with fixed dispersion
  ``size`` and mean ``size*(1-theta)/theta`` (log-log).

Weights multiply the whole contribution, robust thresholds included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .piecewise import Basis, FunctionalCost, Piece

__all__ = [
    "FAMILIES", "LossSpec", "basis_of", "gauss_loss", "poisson_loss",
    "exponential_loss", "variance_loss", "binomial_loss", "negbin_loss",
    "cost_function", "point_cost", "check_data",
]

FAMILIES = ("gauss", "poisson", "exp", "variance", "binomial", "negbin")

_BASIS = {
    "gauss": Basis.QUADRATIC,
    "poisson": Basis.LIN_LOG,
    "exp": Basis.LIN_LOG,
    "variance": Basis.LIN_LOG,
    "binomial": Basis.LOG_LOG,
    "negbin": Basis.LOG_LOG,
}


def basis_of(family: str) -> Basis:
    """Analytic basis used by a loss family."""
    try:
        return _BASIS[family]
    except KeyError:
        raise ValueError(f"unknown loss family {family!r}; "
                         f"expected one of {FAMILIES}") from None


@dataclass(frozen=True)
class LossSpec:
    """Loss family plus robustness parameters and a global weight.

    Parameters
    ----------
    family : str
        One of ``gauss``, ``poisson``, ``exp``, ``variance``,
        ``binomial``, ``negbin``.
    K : float
        Robustness threshold on the residual scale; ``inf`` disables it.
        Finite values require the ``gauss`` family.  With ``a`` equal to
        0 or ``inf`` the squared loss is truncated at ``K**2``
        (biweight); with finite positive ``a`` it continues linearly
        with slope ``a`` (Huber).
    a : float
        Slope of the loss beyond ``K``.
    weight : float
        Positive multiplier applied to every per-point contribution.
    size : float
        Fixed dispersion of the negative binomial family.
    """

    family: str = "gauss"
    K: float = math.inf
    a: float = math.inf
    weight: float = 1.0
    size: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown loss family {self.family!r}; "
                             f"expected one of {FAMILIES}")
        if not self.K > 0.0:
            raise ValueError(f"robustness threshold K must be positive, "
                             f"got {self.K!r}")
        if math.isfinite(self.K) and self.family != "gauss":
            raise ValueError("a finite robustness threshold is only "
                             "supported by the gauss family")
        if self.a < 0.0:
            raise ValueError(f"slope a must be nonnegative, got {self.a!r}")
        if not (self.weight > 0.0 and math.isfinite(self.weight)):
            raise ValueError(f"weight must be positive, got {self.weight!r}")
        if not (self.size > 0.0 and math.isfinite(self.size)):
            raise ValueError(f"size must be positive, got {self.size!r}")

    @property
    def basis(self) -> Basis:
        return basis_of(self.family)


def _gauss_pieces(y: float, K: float, a: float, lower: float, upper: float,
                  weight: float) -> list:
    if not math.isfinite(K):
        return [Piece(lower, upper, weight * y * y, -2.0 * weight * y, weight)]
    segments = []
    t1, t2 = y - K, y + K
    if a == 0.0 or not math.isfinite(a):
        top = weight * K * K
        left = (top, 0.0, 0.0)
        right = (top, 0.0, 0.0)
    else:
        left = (weight * (K * K + a * (y - K)), -weight * a, 0.0)
        right = (weight * (K * K - a * (y + K)), weight * a, 0.0)
    if lower < t1:
        segments.append(Piece(lower, min(t1, upper), *left))
    mid_lo, mid_hi = max(lower, t1), min(upper, t2)
    if mid_lo < mid_hi:
        segments.append(Piece(mid_lo, mid_hi,
                              weight * y * y, -2.0 * weight * y, weight))
    if upper > t2:
        segments.append(Piece(max(lower, t2), upper, *right))
    if not segments:
        # zero-width domain sitting on one of the branch boundaries
        branch = left if upper <= y else right
        if t1 <= lower <= t2:
            branch = (weight * y * y, -2.0 * weight * y, weight)
        segments.append(Piece(lower, upper, *branch))
    return segments


def gauss_loss(y: float, K: float = math.inf, a: float = math.inf,
               domain: tuple = (-math.inf, math.inf), *,
               weight: float = 1.0) -> FunctionalCost:
    """Squared loss ``w*(theta-y)**2`` with optional robust tails.

    Parameters
    ----------
    y : float
        Observation.
    K : float
        Robustness threshold; ``inf`` keeps the pure quadratic.
    a : float
        Tail slope beyond ``K``; 0 or ``inf`` truncates at ``K**2``.
    domain : (float, float)
        Finite interval the function is built on.
    weight : float
        Positive multiplier.

    Returns
    -------
    FunctionalCost
    """
    lower, upper = domain
    return FunctionalCost(Basis.QUADRATIC,
                          _gauss_pieces(y, K, a, lower, upper, weight),
                          validate=False)


def poisson_loss(y: float, domain: tuple, *, weight: float = 1.0) -> FunctionalCost:
    """Poisson loss ``w*(theta - y*log(theta))`` on a positive domain."""
    if y < 0.0:
        raise ValueError(f"poisson data must be nonnegative, got {y!r}")
    lower, upper = domain
    return FunctionalCost(
        Basis.LIN_LOG, [Piece(lower, upper, 0.0, weight, -weight * y)],
        validate=False)


def exponential_loss(y: float, domain: tuple, *,
                     weight: float = 1.0) -> FunctionalCost:
    """Exponential loss ``w*(y*theta - log(theta))``, ``theta`` the rate."""
    if y < 0.0:
        raise ValueError(f"exponential data must be nonnegative, got {y!r}")
    lower, upper = domain
    return FunctionalCost(
        Basis.LIN_LOG, [Piece(lower, upper, 0.0, weight * y, -weight)],
        validate=False)


def variance_loss(y: float, domain: tuple, *,
                  weight: float = 1.0) -> FunctionalCost:
    """Variance loss ``w*(y**2*theta - log(theta))/2``, ``theta = 1/sigma**2``."""
    lower, upper = domain
    return FunctionalCost(
        Basis.LIN_LOG,
        [Piece(lower, upper, 0.0, 0.5 * weight * y * y, -0.5 * weight)],
        validate=False)


def binomial_loss(y: float, domain: tuple, *,
                  weight: float = 1.0) -> FunctionalCost:
    """Bernoulli loss ``w*(-y*log(theta) - (1-y)*log(1-theta))``."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"binomial data must lie in [0, 1], got {y!r}")
    lower, upper = domain
    return FunctionalCost(
        Basis.LOG_LOG,
        [Piece(lower, upper, 0.0, -weight * y, -weight * (1.0 - y))],
        validate=False)


def negbin_loss(y: float, size: float, domain: tuple, *,
                weight: float = 1.0) -> FunctionalCost:
    """Negative binomial loss ``w*(-size*log(theta) - y*log(1-theta))``."""
    if y < 0.0:
        raise ValueError(f"negbin data must be nonnegative, got {y!r}")
    if not size > 0.0:
        raise ValueError(f"negbin size must be positive, got {size!r}")
    lower, upper = domain
    return FunctionalCost(
        Basis.LOG_LOG,
        [Piece(lower, upper, 0.0, -weight * size, -weight * y)],
        validate=False)


def cost_function(family: str, y: float, domain: tuple, *,
                  weight: float = 1.0, K: float = math.inf,
                  a: float = math.inf, size: float = 1.0) -> FunctionalCost:
    """Build ``gamma(y, .)`` for any family on a finite domain.

    Parameters
    ----------
    family : str
        Loss family name.
    y : float
        Observation.
    domain : (float, float)
        Interval the function is built on.
    weight, K, a, size : float
        Per-point weight, robustness parameters (gauss only) and
        negative-binomial dispersion.

    Returns
    -------
    FunctionalCost
    """
    if family == "gauss":
        return gauss_loss(y, K, a, domain, weight=weight)
    if family == "poisson":
        return poisson_loss(y, domain, weight=weight)
    if family == "exp":
        return exponential_loss(y, domain, weight=weight)
    if family == "variance":
        return variance_loss(y, domain, weight=weight)
    if family == "binomial":
        return binomial_loss(y, domain, weight=weight)
    if family == "negbin":
        return negbin_loss(y, size, domain, weight=weight)
    raise ValueError(f"unknown loss family {family!r}; "
                     f"expected one of {FAMILIES}")


def point_cost(family: str, y: float, theta: float, *, weight: float = 1.0,
               K: float = math.inf, a: float = math.inf,
               size: float = 1.0) -> float:
    """Evaluate ``gamma(y, theta)`` directly.

    Same conventions as :func:`cost_function`, without building pieces.
    """
    if family == "gauss":
        d = abs(theta - y)
        if d <= K:
            return weight * d * d
        if a == 0.0 or not math.isfinite(a):
            return weight * K * K
        return weight * (K * K + a * (d - K))
    if family == "poisson":
        return weight * (theta - y * math.log(theta))
    if family == "exp":
        return weight * (y * theta - math.log(theta))
    if family == "variance":
        return 0.5 * weight * (y * y * theta - math.log(theta))
    if family == "binomial":
        return weight * (-y * math.log(theta)
                         - (1.0 - y) * math.log1p(-theta))
    if family == "negbin":
        return weight * (-size * math.log(theta) - y * math.log1p(-theta))
    raise ValueError(f"unknown loss family {family!r}; "
                     f"expected one of {FAMILIES}")


def check_data(family: str, data) -> None:
    """Raise when any observation lies outside the family's support."""
    if family in ("poisson", "exp", "negbin"):
        bad = [float(v) for v in data if v < 0.0]
        if bad:
            raise ValueError(
                f"{family} data must be nonnegative, found {bad[0]!r}")
    elif family == "binomial":
        bad = [float(v) for v in data if not 0.0 <= v <= 1.0]
        if bad:
            raise ValueError(
                f"binomial data must lie in [0, 1], found {bad[0]!r}")
