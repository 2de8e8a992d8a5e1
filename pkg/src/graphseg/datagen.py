"""Signal builders, noise models, and a difference-based sd estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = ["SignalSpec", "generate", "signal_of", "corrupt_signflip",
           "student_noise", "sd_diff_hall", "linear_signal", "step_signal",
           "unit_step_signal", "HALL_WEIGHTS"]

# difference weights tuned to cancel smooth trends (unbiasedness:
# they sum to 0 and their squares to 1)
HALL_WEIGHTS = (0.1942, 0.2809, 0.3832, -0.8582)

_FAMILIES = ("mean", "poisson", "exp", "variance", "negbin")


@dataclass(frozen=True)
class SignalSpec:
    """Description of a piecewise-stationary series.

    Parameters
    ----------
    n : int
        Number of points.
    changepoints : tuple of float
        Segment ends as fractions in (0, 1], strictly increasing, the
        last equal to 1; segment k ends at ``floor(fraction_k * n)``.
    parameters : tuple of float
        One parameter per segment: the mean (``mean``), rate
        (``poisson``, ``exp``), variance (``variance``), or success
        probability (``negbin``).
    family : str
        One of ``mean``, ``poisson``, ``exp``, ``variance``, ``negbin``.
    sigma : float
        Noise standard deviation (mean family only).
    gamma : float
        Within-segment geometric decay of the mean in (0, 1].
    size : float
        Dispersion of the negbin family.
    seed : int, optional
        Seed for the portable 64-bit generator.
    """

    n: int
    changepoints: Tuple[float, ...]
    parameters: Tuple[float, ...]
    family: str = "mean"
    sigma: float = 1.0
    gamma: float = 1.0
    size: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "changepoints",
                           tuple(float(f) for f in self.changepoints))
        object.__setattr__(self, "parameters",
                           tuple(float(p) for p in self.parameters))
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n!r}")
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected "
                             f"one of {_FAMILIES}")
        cp = self.changepoints
        if len(cp) != len(self.parameters):
            raise ValueError("changepoints and parameters must have equal "
                             "length")
        if not cp or cp[-1] != 1.0:
            raise ValueError("the last changepoint fraction must be 1")
        if any(f <= 0.0 or f > 1.0 for f in cp):
            raise ValueError("changepoint fractions must lie in (0, 1]")
        if any(b >= c for b, c in zip(cp, cp[1:])):
            raise ValueError("changepoint fractions must be strictly "
                             "increasing")
        bounds = self.boundaries()
        if any(b >= c for b, c in zip(bounds, bounds[1:])) or bounds[0] < 1:
            raise ValueError(f"fractions {cp} collapse segments at "
                             f"n={self.n}")
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not self.size > 0.0:
            raise ValueError(f"size must be positive, got {self.size!r}")

    def boundaries(self) -> Tuple[int, ...]:
        """1-based last index of each segment (the final one is n)."""
        return tuple(int(math.floor(f * self.n)) for f in self.changepoints)


def signal_of(spec: SignalSpec) -> np.ndarray:
    """Noise-free per-point parameter described by a spec."""
    out = np.empty(spec.n)
    start = 0
    for end, level in zip(spec.boundaries(), spec.parameters):
        length = end - start
        if spec.family == "mean" and spec.gamma < 1.0:
            out[start:end] = level * spec.gamma ** np.arange(length)
        else:
            out[start:end] = level
        start = end
    return out


def generate(spec: SignalSpec) -> np.ndarray:
    """Draw one series from a spec; deterministic given its seed.

    Parameters
    ----------
    spec : SignalSpec

    Returns
    -------
    numpy.ndarray
    """
    rng = np.random.default_rng(spec.seed)
    base = signal_of(spec)
    if spec.family == "mean":
        return base + spec.sigma * rng.standard_normal(spec.n)
    if spec.family == "poisson":
        return rng.poisson(base).astype(float)
    if spec.family == "exp":
        return rng.exponential(1.0 / base)
    if spec.family == "variance":
        return np.sqrt(base) * rng.standard_normal(spec.n)
    # negbin: parameters are success probabilities
    return rng.negative_binomial(spec.size, base).astype(float)


def corrupt_signflip(data, signal, p: float = 0.3,
                     seed: Optional[int] = None) -> np.ndarray:
    """Flip the signal component of a random proportion of points.

    Each point's signal factor is multiplied by -1 with probability
    ``p`` while its noise is kept, turning ``s + e`` into ``-s + e``.

    Parameters
    ----------
    data : array-like
        Observed series ``signal + noise``.
    signal : array-like
        The noise-free component that was used to build ``data``.
    p : float
        Flip probability in [0, 1].
    seed : int, optional

    Returns
    -------
    numpy.ndarray
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    y = np.asarray(data, dtype=float)
    s = np.asarray(signal, dtype=float)
    if y.shape != s.shape:
        raise ValueError("data and signal must have equal length")
    rng = np.random.default_rng(seed)
    flip = rng.random(y.shape) < p
    factor = np.where(flip, -1.0, 1.0)
    return y - s + factor * s


def student_noise(signal, df: int = 3,
                  seed: Optional[int] = None) -> np.ndarray:
    """Add i.i.d. Student-t noise (unscaled) to a signal."""
    if df < 1:
        raise ValueError(f"df must be at least 1, got {df!r}")
    s = np.asarray(signal, dtype=float)
    rng = np.random.default_rng(seed)
    return s + rng.standard_t(df, s.shape)


def sd_diff_hall(data) -> float:
    """Difference-based noise sd estimate, robust to change-points.

    Combines each window of four points with fixed weights whose sum is
    zero (cancelling locally constant signal) and whose squares sum to
    one (preserving the noise variance).

    Parameters
    ----------
    data : array-like
        At least four points.

    Returns
    -------
    float
    """
    y = np.asarray(data, dtype=float)
    n = y.size
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    w1, w2, w3, w4 = HALL_WEIGHTS
    combo = w1 * y[:-3] + w2 * y[1:-2] + w3 * y[2:-1] + w4 * y[3:]
    return float(math.sqrt((combo * combo).sum() / (n - 3)))


def linear_signal(n: int, alpha: float) -> np.ndarray:
    """Linear trend ``alpha * (i - n/2)`` for i = 1..n."""
    i = np.arange(1, n + 1, dtype=float)
    return alpha * (i - n / 2.0)


def step_signal(n: int) -> np.ndarray:
    """Ten-level staircase ``floor(10*(i-1)/n) - n/2`` for i = 1..n."""
    i = np.arange(1, n + 1, dtype=float)
    return np.floor(10.0 * (i - 1.0) / n) - n / 2.0


def unit_step_signal(n: int) -> np.ndarray:
    """Ten-level staircase without the n/2 offset (levels 0..9)."""
    i = np.arange(1, n + 1, dtype=float)
    return np.floor(10.0 * (i - 1.0) / n)
