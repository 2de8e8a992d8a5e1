"""Piecewise analytic cost functions of one real parameter.

The solver manipulates cost-to-go functions of a scalar segment
parameter.  Every function here is a finite ordered list of pieces
tiling a closed interval, each piece carrying coefficients ``(a, b, c)``
in one of three analytic bases:

- ``Basis.QUADRATIC``: ``a + b*t + c*t**2`` on any real interval,
- ``Basis.LIN_LOG``:   ``a + b*t + c*log(t)`` on intervals with ``t > 0``,
- ``Basis.LOG_LOG``:   ``a + b*log(t) + c*log(1 - t)`` on subintervals
  of ``(0, 1)``.

All operations return canonical functions: pieces tile the domain
exactly (``pieces[i].upper == pieces[i + 1].lower``), every piece has
positive width (a single zero-width piece is allowed so point domains
stay representable), and adjacent pieces with identical coefficients
are merged.  Pieces are stored internally as a breakpoint vector plus a
coefficient matrix so whole-function operations run vectorized.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = ["Basis", "Piece", "FunctionalCost", "pointwise_min_union"]


class Basis(enum.Enum):
    """Analytic basis in which piece coefficients are interpreted."""

    QUADRATIC = "quadratic"
    LIN_LOG = "linlog"
    LOG_LOG = "loglog"


class Piece(NamedTuple):
    """One piece: coefficients ``(a, b, c)`` on ``[lower, upper]``."""

    lower: float
    upper: float
    a: float
    b: float
    c: float


def _value(basis: Basis, a: float, b: float, c: float, x: float) -> float:
    if basis is Basis.QUADRATIC:
        return a + x * (b + x * c)
    if basis is Basis.LIN_LOG:
        return a + b * x + c * math.log(x)
    return a + b * math.log(x) + c * math.log1p(-x)


def _values(basis: Basis, coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rowwise values ``f_i(x_i)`` for coefficient rows ``coef``."""
    a, b, c = coef[:, 0], coef[:, 1], coef[:, 2]
    if basis is Basis.QUADRATIC:
        return a + x * (b + x * c)
    if basis is Basis.LIN_LOG:
        return a + b * x + c * np.log(x)
    return a + b * np.log(x) + c * np.log1p(-x)


def _stationary_point(basis: Basis, b: float, c: float) -> Optional[float]:
    """Zero of the derivative of a piece, or None when it is monotone."""
    if basis is Basis.QUADRATIC:
        if c != 0.0:
            return -b / (2.0 * c)
        return None
    if basis is Basis.LIN_LOG:
        # derivative b + c/t vanishes at t = -c/b, relevant only if positive
        if b != 0.0 and c != 0.0 and (c > 0.0) != (b > 0.0):
            return -c / b
        return None
    # derivative b/t - c/(1-t) vanishes at t = b/(b+c), inside (0,1) only
    # when b and c share a sign
    if (b > 0.0 and c > 0.0) or (b < 0.0 and c < 0.0):
        return b / (b + c)
    return None


def _stationary_points(basis: Basis, coef: np.ndarray
                       ) -> tuple:
    """Rowwise stationary points with a validity mask.

    Entries where the mask is False are unspecified; callers must gate
    every use of ``s`` on ``has``.
    """
    b, c = coef[:, 1], coef[:, 2]
    s = np.zeros(b.shape)
    if basis is Basis.QUADRATIC:
        has = c != 0.0
        np.divide(b, c, out=s, where=has)
        s *= -0.5
    elif basis is Basis.LIN_LOG:
        has = (b != 0.0) & (c != 0.0) & ((c > 0.0) != (b > 0.0))
        np.divide(c, b, out=s, where=has)
        np.negative(s, out=s, where=has)
    else:
        has = ((b > 0.0) & (c > 0.0)) | ((b < 0.0) & (c < 0.0))
        np.divide(b, b + c, out=s, where=has)
    return s, has


def _stationary_is_min(basis: Basis, b: float, c: float) -> bool:
    if basis is Basis.QUADRATIC:
        return c > 0.0
    if basis is Basis.LIN_LOG:
        return c < 0.0
    return b < 0.0


def _stationary_minima(basis: Basis, coef: np.ndarray) -> np.ndarray:
    if basis is Basis.QUADRATIC:
        return coef[:, 2] > 0.0
    if basis is Basis.LIN_LOG:
        return coef[:, 2] < 0.0
    return coef[:, 1] < 0.0


def _quadratic_roots(a0: float, b0: float, c0: float) -> tuple:
    """Real roots of ``c0*x**2 + b0*x + a0``, numerically stable."""
    if c0 == 0.0:
        if b0 == 0.0:
            return ()
        return (-a0 / b0,)
    disc = b0 * b0 - 4.0 * a0 * c0
    if disc < 0.0:
        return ()
    if disc == 0.0:
        return (-b0 / (2.0 * c0),)
    sq = math.sqrt(disc)
    q = -0.5 * (b0 + math.copysign(sq, b0))
    if q == 0.0:
        return (0.0,)
    return (q / c0, a0 / q)


def _quadratic_root_pairs(a0: np.ndarray, b0: np.ndarray, c0: np.ndarray
                          ) -> tuple:
    """Rowwise real roots of ``c0*x**2 + b0*x + a0`` (NaN where absent).

    Uses the cancellation-free form ``q = -(b + sign(b)*sqrt(disc))/2``
    with roots ``q/c`` and ``a/q``; the second form degrades gracefully
    to the linear root ``-a/b`` when ``c`` is zero, so linear rows need
    no separate branch (their first root stays NaN).
    """
    disc = b0 * b0 - 4.0 * (a0 * c0)
    quad = c0 != 0.0
    ok = disc >= 0.0
    ok &= quad | (b0 != 0.0)
    np.sqrt(disc, out=disc, where=ok)
    q = np.copysign(disc, b0)
    q += b0
    q *= -0.5
    r1 = np.full(a0.shape, np.nan)
    r2 = np.full(a0.shape, np.nan)
    np.divide(q, c0, out=r1, where=ok & quad)
    nzq = q != 0.0
    np.divide(a0, q, out=r2, where=ok & nzq)
    dbl = ok & quad & ~nzq
    if dbl.any():
        r2[dbl] = 0.0
    return r1, r2


def _solve_level(basis: Basis, a: float, b: float, c: float,
                 lo: float, hi: float, m: float) -> float:
    """Point of ``[lo, hi]`` where the piece value equals ``m``.

    The piece is monotone on ``[lo, hi]`` and its endpoint values
    strictly straddle ``m``.
    """
    if basis is Basis.QUADRATIC:
        for r in _quadratic_roots(a - m, b, c):
            if lo <= r <= hi:
                return r

    def g(x: float) -> float:
        return _value(basis, a, b, c, x) - m

    return brentq(g, lo, hi)


def _crossings(basis: Basis, da: float, db: float, dc: float,
               lo: float, hi: float) -> list:
    """Zeros of the coefficient difference strictly inside ``(lo, hi)``."""
    if da == 0.0 and db == 0.0 and dc == 0.0:
        return []
    if basis is Basis.QUADRATIC:
        roots = _quadratic_roots(da, db, dc)
    else:

        def d(x: float) -> float:
            return _value(basis, da, db, dc, x)

        knots = [lo]
        s = _stationary_point(basis, db, dc)
        if s is not None and lo < s < hi:
            knots.append(s)
        knots.append(hi)
        found = []
        for kl, kh in zip(knots, knots[1:]):
            vl, vh = d(kl), d(kh)
            if vl == 0.0 and kl != lo:
                found.append(kl)
            if vl * vh < 0.0:
                found.append(float(brentq(d, kl, kh)))
        roots = found
    return sorted({r for r in roots if lo < r < hi})


def _canonical(bounds: np.ndarray, coef: np.ndarray) -> tuple:
    """Merge adjacent pieces with identical coefficients.

    ``bounds`` must already be strictly increasing, which every union
    and refinement helper in this module guarantees.
    """
    if coef.shape[0] <= 1:
        return bounds, coef
    same = (coef[1:] == coef[:-1]).all(axis=1)
    if not same.any():
        return bounds, coef
    keep = np.concatenate([[True], ~same])
    return np.concatenate([bounds[:-1][keep], bounds[-1:]]), coef[keep]


def _dedup_sorted(xs: np.ndarray) -> np.ndarray:
    """Strictly increasing values of an already sorted vector."""
    keep = np.empty(xs.shape, dtype=bool)
    keep[0] = True
    np.not_equal(xs[1:], xs[:-1], out=keep[1:])
    return xs[keep]


def _union_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sorted union of breakpoint vectors (inputs need not be sorted)."""
    xs = np.concatenate([a, b])
    xs.sort(kind="stable")
    return _dedup_sorted(xs)


def _refine(bounds: np.ndarray, coef: np.ndarray, cuts: np.ndarray) -> tuple:
    """Insert extra breakpoints, replicating the covering coefficients.

    ``cuts`` must lie inside ``[bounds[0], bounds[-1]]``.
    """
    if cuts.size == 0:
        return bounds, coef
    nb = _union_sorted(bounds, cuts)
    idx = bounds.searchsorted(nb[:-1], side="right")
    idx -= 1
    return nb, coef[idx]


class FunctionalCost:
    """Piecewise function in a fixed basis over a closed interval.

    Parameters
    ----------
    basis : Basis
        Analytic basis of every piece.
    pieces : sequence of Piece
        Pieces tiling the domain in increasing order.
    validate : bool, keyword only
        When True (default) the pieces are checked and canonicalized.
        Internal operations that construct canonical pieces directly
        pass False.
    """

    __slots__ = ("basis", "_bounds", "_coef")

    def __init__(self, basis: Basis, pieces: Sequence[Piece], *,
                 validate: bool = True):
        self.basis = basis
        rows = [tuple(p) for p in pieces]
        if validate:
            self._validate(rows)
            rows = [tuple(p) for p in self._merged(rows)]
        if rows:
            arr = np.asarray(rows, dtype=float)
            self._bounds = np.concatenate([arr[:, 0], arr[-1:, 1]])
            self._coef = np.ascontiguousarray(arr[:, 2:])
        else:
            self._bounds = np.empty(0)
            self._coef = np.empty((0, 3))

    @classmethod
    def _from_arrays(cls, basis: Basis, bounds: np.ndarray,
                     coef: np.ndarray) -> "FunctionalCost":
        out = cls.__new__(cls)
        out.basis = basis
        out._bounds = bounds
        out._coef = coef
        return out

    @staticmethod
    def _merged(rows: list) -> list:
        out: list = []
        for r in rows:
            if r[1] <= r[0]:
                continue
            if out and out[-1][1] == r[0] and out[-1][2:] == r[2:]:
                out[-1] = (out[-1][0],) + r[1:]
                continue
            out.append(r)
        return out or rows[:1]

    def _validate(self, rows: list) -> None:
        if not isinstance(self.basis, Basis):
            raise TypeError(f"basis must be a Basis, got {self.basis!r}")
        if not rows:
            raise ValueError("a FunctionalCost needs at least one piece")
        clean = []
        for r in rows:
            p = Piece(*(float(v) for v in r))
            for v in p:
                if math.isnan(v):
                    raise ValueError(f"piece {p} contains NaN")
            if not (math.isfinite(p.lower) and math.isfinite(p.upper)):
                raise ValueError(f"piece {p} has a non-finite bound")
            if p.upper < p.lower:
                raise ValueError(f"piece {p} has upper < lower")
            clean.append(tuple(p))
        if not (len(clean) == 1 and clean[0][0] == clean[0][1]):
            for r in clean:
                if r[1] <= r[0]:
                    raise ValueError(f"piece {Piece(*r)} has zero width")
            for q, p in zip(clean, clean[1:]):
                if q[1] != p[0]:
                    raise ValueError(
                        f"pieces do not tile: {q[1]!r} != {p[0]!r}")
        rows[:] = clean
        lo, hi = clean[0][0], clean[-1][1]
        if self.basis is Basis.LIN_LOG and lo <= 0.0:
            raise ValueError("lin-log domain must be strictly positive")
        if self.basis is Basis.LOG_LOG and not (0.0 < lo and hi < 1.0):
            raise ValueError("log-log domain must lie inside (0, 1)")

    # -- basic accessors -------------------------------------------------

    @property
    def pieces(self) -> list:
        """The pieces as a list of :class:`Piece` tuples."""
        b = self._bounds
        return [Piece(float(b[i]), float(b[i + 1]), *map(float, row))
                for i, row in enumerate(self._coef)]

    @property
    def lower(self) -> float:
        return float(self._bounds[0])

    @property
    def upper(self) -> float:
        return float(self._bounds[-1])

    @property
    def domain(self) -> tuple:
        """The closed interval ``(lower, upper)`` the pieces tile."""
        return (float(self._bounds[0]), float(self._bounds[-1]))

    @property
    def is_point(self) -> bool:
        """True when the domain is a single point."""
        return self._bounds[0] == self._bounds[-1]

    def __len__(self) -> int:
        return self._coef.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionalCost):
            return NotImplemented
        return (self.basis is other.basis
                and np.array_equal(self._bounds, other._bounds)
                and np.array_equal(self._coef, other._coef))

    def __repr__(self) -> str:
        lo, hi = self.domain
        return (f"FunctionalCost({self.basis.value}, {len(self)} "
                f"pieces on [{lo:g}, {hi:g}])")

    @classmethod
    def constant(cls, basis: Basis, lower: float, upper: float,
                 value: float) -> "FunctionalCost":
        """Constant function ``value`` on ``[lower, upper]``."""
        return cls(basis, [Piece(lower, upper, value, 0.0, 0.0)])

    @classmethod
    def from_coefficients(cls, basis: Basis, lower: float, upper: float,
                          a: float, b: float, c: float) -> "FunctionalCost":
        """Single-piece function with coefficients ``(a, b, c)``."""
        return cls(basis, [Piece(lower, upper, a, b, c)])

    # -- evaluation ------------------------------------------------------

    def _row_at(self, x: float) -> int:
        """Index of the piece covering ``x``; the left piece wins."""
        i = int(np.searchsorted(self._bounds[1:], x, side="left"))
        return min(i, self._coef.shape[0] - 1)

    def evaluate(self, theta: float) -> float:
        """Value at ``theta``; the left piece wins at interior breakpoints.

        Parameters
        ----------
        theta : float
            Point inside the domain.

        Returns
        -------
        float
        """
        lo, hi = self.domain
        if not (lo <= theta <= hi):
            raise ValueError(
                f"point {theta!r} outside the domain [{lo!r}, {hi!r}]")
        a, b, c = self._coef[self._row_at(theta)]
        return _value(self.basis, a, b, c, theta)

    # -- algebra ---------------------------------------------------------

    def _check_basis(self, other: "FunctionalCost") -> None:
        if self.basis is not other.basis:
            raise ValueError(
                f"basis mismatch: {self.basis.value} vs {other.basis.value}")

    def pointwise_min(self, other: "FunctionalCost") -> "FunctionalCost":
        """Pointwise minimum with ``other``, defined on the same domain.

        Piece boundaries of the result include every crossing point of
        the two functions.  At exact ties ``self`` wins.

        Parameters
        ----------
        other : FunctionalCost
            Same basis and identical domain.

        Returns
        -------
        FunctionalCost
        """
        self._check_basis(other)
        if self.domain != other.domain:
            raise ValueError(
                f"domain mismatch: {self.domain} vs {other.domain}")
        if self.is_point:
            x = self.lower
            return self if self.evaluate(x) <= other.evaluate(x) else other
        basis = self.basis
        xs = _union_sorted(self._bounds, other._bounds)
        fi = self._bounds.searchsorted(xs[:-1], side="right")
        fi -= 1
        gi = other._bounds.searchsorted(xs[:-1], side="right")
        gi -= 1
        dcoef = self._coef[fi] - other._coef[gi]
        nz = (dcoef != 0.0).any(axis=1).nonzero()[0]
        cuts: list = []
        if nz.size:
            if basis is Basis.QUADRATIC:
                r1, r2 = _quadratic_root_pairs(
                    dcoef[nz, 0], dcoef[nz, 1], dcoef[nz, 2])
                lo_, hi_ = xs[:-1][nz], xs[1:][nz]
                for r in (r1, r2):
                    inside = (r > lo_) & (r < hi_)
                    if inside.any():
                        cuts.append(r[inside])
            else:
                for k in nz:
                    found = _crossings(basis, dcoef[k, 0], dcoef[k, 1],
                                       dcoef[k, 2], xs[k], xs[k + 1])
                    if found:
                        cuts.append(np.asarray(found))
        if cuts:
            xs = _union_sorted(xs, np.concatenate(cuts))
            fi = self._bounds.searchsorted(xs[:-1], side="right")
            fi -= 1
            gi = other._bounds.searchsorted(xs[:-1], side="right")
            gi -= 1
            dcoef = self._coef[fi] - other._coef[gi]
        mids = 0.5 * (xs[:-1] + xs[1:])
        take_f = _values(basis, dcoef, mids) <= 0.0
        coef = np.where(take_f[:, None], self._coef[fi], other._coef[gi])
        return FunctionalCost._from_arrays(basis, *_canonical(xs, coef))

    def add_piecewise(self, other: "FunctionalCost") -> "FunctionalCost":
        """Sum with ``other``, restricted to this function's domain.

        Parameters
        ----------
        other : FunctionalCost
            Same basis; its domain must cover this function's domain.

        Returns
        -------
        FunctionalCost
        """
        self._check_basis(other)
        if other.lower > self.lower or other.upper < self.upper:
            raise ValueError(
                f"domain {other.domain} does not cover {self.domain}")
        if self.is_point:
            x = self.lower
            row = self._coef[0] + other._coef[other._row_at(x)]
            return FunctionalCost._from_arrays(
                self.basis, self._bounds.copy(), row[None, :])
        if other._coef.shape[0] == 1:
            # distinct rows stay distinct after adding one row everywhere
            return FunctionalCost._from_arrays(
                self.basis, self._bounds, self._coef + other._coef)
        inner = other._bounds[(other._bounds > self.lower)
                              & (other._bounds < self.upper)]
        xs = _union_sorted(self._bounds, inner)
        fi = self._bounds.searchsorted(xs[:-1], side="right")
        fi -= 1
        gi = other._bounds.searchsorted(xs[:-1], side="right")
        gi -= 1
        coef = self._coef[fi] + other._coef[gi]
        return FunctionalCost._from_arrays(self.basis, *_canonical(xs, coef))

    def add_constant(self, value: float) -> "FunctionalCost":
        """Shift every piece by an additive constant."""
        if value == 0.0:
            return self
        coef = self._coef.copy()
        coef[:, 0] += value
        return FunctionalCost._from_arrays(self.basis, self._bounds, coef)

    # -- envelopes -------------------------------------------------------

    def _monotone_parts(self) -> tuple:
        """Split at interior stationary points; returns refined arrays."""
        bounds, coef = self._bounds, self._coef
        s, has = _stationary_points(self.basis, coef)
        has &= s > bounds[:-1]
        has &= s < bounds[1:]
        if has.any():
            bounds, coef = _refine(bounds, coef, s[has])
        return bounds, coef

    def _level_cut(self, coef: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                   level: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Where monotone rows cross their level, rowwise."""
        basis = self.basis
        if basis is Basis.QUADRATIC:
            rlo, rhi = lo[rows], hi[rows]
            tol = 1e-9 * (1.0 + np.abs(rlo) + np.abs(rhi))
            lo_t = rlo - tol
            hi_t = rhi + tol
            r1, r2 = _quadratic_root_pairs(
                coef[rows, 0] - level[rows], coef[rows, 1], coef[rows, 2])
            out = np.where((r1 >= lo_t) & (r1 <= hi_t), r1, r2)
            good = np.isfinite(out)
            good &= out >= lo_t
            good &= out <= hi_t
            np.maximum(out, rlo, out=out)
            np.minimum(out, rhi, out=out)
            if good.all():
                return out
            bad = (~good).nonzero()[0]
        else:
            out = np.empty(rows.size)
            bad = np.arange(rows.size)
        for k in bad:
            i = rows[k]
            out[k] = _solve_level(basis, coef[i, 0], coef[i, 1], coef[i, 2],
                                  lo[i], hi[i], level[i])
        return out

    def running_min_leq(self) -> "FunctionalCost":
        """Prefix-minimum envelope ``x -> min over t <= x``.

        Returns
        -------
        FunctionalCost
            Nonincreasing function on the same domain.
        """
        if self.is_point:
            return self
        bounds, coef = self._monotone_parts()
        basis = self.basis
        lo_, hi_ = bounds[:-1], bounds[1:]
        v_lo = _values(basis, coef, lo_)
        v_hi = _values(basis, coef, hi_)
        pmin = np.minimum(v_lo, v_hi)
        carry = np.concatenate([[np.inf], np.minimum.accumulate(pmin)[:-1]])
        inc = v_hi >= v_lo
        keep = ~inc & (v_lo <= carry)
        flat = ~inc & ~keep & (v_hi >= carry)
        crossing = ~inc & ~keep & ~flat
        fill = np.where(inc, np.minimum(v_lo, carry), carry)
        rows = crossing.nonzero()[0]
        if rows.size:
            cuts = self._level_cut(coef, lo_, hi_, carry, rows)
            xc = np.empty(coef.shape[0])
            xc[rows] = cuts
            nb, ncoef = _refine(bounds, coef, cuts)
            ncoef = ncoef.copy()
            src = bounds.searchsorted(nb[:-1], side="right")
            src -= 1
            const = (inc | flat)[src] \
                | (crossing[src] & (nb[:-1] < xc[src]))
            srcc = src[const]
        else:
            nb, ncoef = bounds, coef.copy()
            const = inc | flat
            srcc = const
        ncoef[const] = 0.0
        ncoef[const, 0] = fill[srcc]
        return FunctionalCost._from_arrays(basis, *_canonical(nb, ncoef))

    def running_min_geq(self) -> "FunctionalCost":
        """Suffix-minimum envelope ``x -> min over t >= x``.

        Returns
        -------
        FunctionalCost
            Nondecreasing function on the same domain.
        """
        if self.is_point:
            return self
        bounds, coef = self._monotone_parts()
        basis = self.basis
        lo_, hi_ = bounds[:-1], bounds[1:]
        v_lo = _values(basis, coef, lo_)
        v_hi = _values(basis, coef, hi_)
        pmin = np.minimum(v_lo, v_hi)
        rev = np.minimum.accumulate(pmin[::-1])[::-1]
        carry = np.concatenate([rev[1:], [np.inf]])
        dec = v_hi <= v_lo
        keep = ~dec & (v_hi <= carry)
        flat = ~dec & ~keep & (v_lo >= carry)
        crossing = ~dec & ~keep & ~flat
        fill = np.where(dec, np.minimum(v_hi, carry), carry)
        rows = crossing.nonzero()[0]
        if rows.size:
            cuts = self._level_cut(coef, lo_, hi_, carry, rows)
            xc = np.empty(coef.shape[0])
            xc[rows] = cuts
            nb, ncoef = _refine(bounds, coef, cuts)
            ncoef = ncoef.copy()
            src = bounds.searchsorted(nb[:-1], side="right")
            src -= 1
            const = (dec | flat)[src] \
                | (crossing[src] & (nb[:-1] >= xc[src]))
            srcc = src[const]
        else:
            nb, ncoef = bounds, coef.copy()
            const = dec | flat
            srcc = const
        ncoef[const] = 0.0
        ncoef[const, 0] = fill[srcc]
        return FunctionalCost._from_arrays(basis, *_canonical(nb, ncoef))

    # -- argument transforms ----------------------------------------------

    def shift_argument(self, delta: float) -> "FunctionalCost":
        """Return ``x -> f(x - delta)`` (quadratic basis only).

        Parameters
        ----------
        delta : float
            Translation applied to the domain.

        Returns
        -------
        FunctionalCost
        """
        if self.basis is not Basis.QUADRATIC:
            raise ValueError(
                "argument shifts are only representable in the "
                "quadratic basis")
        if delta == 0.0:
            return self
        d = delta
        a, b, c = self._coef[:, 0], self._coef[:, 1], self._coef[:, 2]
        coef = np.column_stack([a - b * d + c * d * d, b - 2.0 * c * d, c])
        return FunctionalCost._from_arrays(self.basis, self._bounds + d,
                                           coef)

    def scale_argument(self, alpha: float) -> "FunctionalCost":
        """Return ``x -> f(x / alpha)`` for ``alpha > 0``.

        The quadratic basis re-expands the substituted polynomial; the
        lin-log basis absorbs ``log(1/alpha)`` into the constant; the
        log-log basis cannot represent the substitution.

        Parameters
        ----------
        alpha : float
            Positive scale factor; the domain is multiplied by it.

        Returns
        -------
        FunctionalCost
        """
        if not (alpha > 0.0 and math.isfinite(alpha)):
            raise ValueError(f"scale factor must be positive, got {alpha!r}")
        if self.basis is Basis.LOG_LOG:
            raise ValueError(
                "argument scaling is not representable in the "
                "log-log basis")
        if alpha == 1.0:
            return self
        inv = 1.0 / alpha
        a, b, c = self._coef[:, 0], self._coef[:, 1], self._coef[:, 2]
        if self.basis is Basis.QUADRATIC:
            coef = np.column_stack([a, b * inv, c * inv * inv])
        else:
            coef = np.column_stack([a - c * math.log(alpha), b * inv, c])
        return FunctionalCost._from_arrays(self.basis, self._bounds * alpha,
                                           coef)

    # -- restriction and constrained minima --------------------------------

    def restrict(self, lower: float, upper: float
                 ) -> Optional["FunctionalCost"]:
        """Restriction to ``[lower, upper]``, or None when disjoint.

        Parameters
        ----------
        lower, upper : float
            Interval to intersect with the domain.

        Returns
        -------
        FunctionalCost or None
        """
        b = self._bounds
        slo, shi = b[0], b[-1]
        lo = lower if lower > slo else slo
        hi = upper if upper < shi else shi
        if lo > hi:
            return None
        if lo == hi:
            row = self._coef[self._row_at(lo)]
            return FunctionalCost._from_arrays(
                self.basis, np.array([lo, lo]), row[None, :].copy())
        if lo == slo and hi == shi:
            return self
        i0 = int(b[1:].searchsorted(lo, side="right"))
        i1 = int(b[:-1].searchsorted(hi, side="left")) - 1
        bounds = np.concatenate([[lo], b[i0 + 1:i1 + 1], [hi]])
        return FunctionalCost._from_arrays(
            self.basis, bounds, self._coef[i0:i1 + 1])

    def min_over_leq(self, gap: float = 0.0) -> Optional["FunctionalCost"]:
        """Constrained minimum ``x -> min over {t : t <= x - gap}``.

        The result lives on the domain truncated from the left by
        ``gap``; None is returned when no point remains.  A nonzero
        ``gap`` requires the quadratic basis (the shift is not
        representable otherwise).

        Parameters
        ----------
        gap : float
            Nonnegative minimal increase enforced by the constraint.

        Returns
        -------
        FunctionalCost or None
        """
        if gap < 0.0:
            raise ValueError(f"gap must be nonnegative, got {gap!r}")
        env = self.running_min_leq()
        if gap != 0.0:
            env = env.shift_argument(gap)
        return env.restrict(self.lower + gap, self.upper)

    def min_over_geq(self, gap: float = 0.0) -> Optional["FunctionalCost"]:
        """Constrained minimum ``x -> min over {t : t >= x + gap}``.

        Mirror of :meth:`min_over_leq`; the domain is truncated from
        the right.

        Parameters
        ----------
        gap : float
            Nonnegative minimal decrease enforced by the constraint.

        Returns
        -------
        FunctionalCost or None
        """
        if gap < 0.0:
            raise ValueError(f"gap must be nonnegative, got {gap!r}")
        env = self.running_min_geq()
        if gap != 0.0:
            env = env.shift_argument(-gap)
        return env.restrict(self.lower, self.upper - gap)

    def global_min(self) -> tuple:
        """Minimum value and its smallest argmin.

        Returns
        -------
        (float, float)
            ``(value, argmin)``; ties within a relative tolerance of
            1e-12 keep the smallest argument.
        """
        basis = self.basis
        bounds, coef = self._bounds, self._coef
        m = coef.shape[0]
        lo_, hi_ = bounds[:-1], bounds[1:]
        s, has = _stationary_points(basis, coef)
        inner = has & _stationary_minima(basis, coef) \
            & (s > lo_) & (s < hi_)
        xs = np.empty(3 * m)
        xs[0::3] = lo_
        xs[1::3] = np.where(inner, s, lo_)
        xs[2::3] = hi_
        take = np.ones(3 * m, dtype=bool)
        take[1::3] = inner
        xs = xs[take]
        rows = np.repeat(np.arange(m), 3)[take]
        vs = _values(basis, coef[rows], xs)
        vmin = float(vs.min())
        if math.isinf(vmin):
            return vmin, float(xs[0])
        i = int(np.argmax(vs <= vmin + 1e-12 * (1.0 + abs(vmin))))
        return float(vs[i]), float(xs[i])


def pointwise_min_union(funcs: Sequence[FunctionalCost]) -> FunctionalCost:
    """Pointwise minimum of functions whose domains jointly tile an interval.

    The domains may differ but their union must be one interval.  A
    point-domain input is allowed when its point lies inside the union
    and its value does not beat the interval minimum there (an isolated
    strictly better point is not representable and raises).

    Parameters
    ----------
    funcs : sequence of FunctionalCost
        At least one function, all in the same basis.

    Returns
    -------
    FunctionalCost
    """
    funcs = list(funcs)
    if not funcs:
        raise ValueError("need at least one function")
    basis = funcs[0].basis
    for f in funcs[1:]:
        if f.basis is not basis:
            raise ValueError("all functions must share one basis")
    intervals = [f for f in funcs if not f.is_point]
    points = [f for f in funcs if f.is_point]
    if not intervals:
        x = points[0].lower
        if any(p.lower != x for p in points):
            raise ValueError("point domains at distinct points do not "
                             "tile an interval")
        return min(points, key=lambda p: p.evaluate(x))
    if len(intervals) == 1:
        result = intervals[0]
    elif all(f.domain == intervals[0].domain for f in intervals[1:]):
        result = intervals[0]
        for f in intervals[1:]:
            result = result.pointwise_min(f)
    else:
        bounds = np.unique(np.concatenate(
            [np.array([f.lower, f.upper]) for f in intervals]))
        seg_bounds: list = []
        seg_coef: list = []
        for l, u in zip(bounds[:-1], bounds[1:]):
            covering = [f for f in intervals
                        if f.lower <= l and f.upper >= u]
            if not covering:
                raise ValueError("function domains leave a gap; the union "
                                 "is not an interval")
            acc = covering[0].restrict(l, u)
            for f in covering[1:]:
                acc = acc.pointwise_min(f.restrict(l, u))
            seg_bounds.append(acc._bounds[:-1])
            seg_coef.append(acc._coef)
        all_bounds = np.concatenate(seg_bounds + [bounds[-1:]])
        all_coef = np.concatenate(seg_coef)
        result = FunctionalCost._from_arrays(
            basis, *_canonical(all_bounds, all_coef))
    for p in points:
        x = p.lower
        if not (result.lower <= x <= result.upper):
            raise ValueError("point domain falls outside the interval union")
        rv = result.evaluate(x)
        if p.evaluate(x) < rv - 1e-9 * (1.0 + abs(rv)):
            raise ValueError("an isolated strictly better point is not "
                             "representable as a piecewise function")
    return result
