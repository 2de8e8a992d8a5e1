"""Reference fits and brute-force oracles used to validate the solver.

Two oracles bound the solver from independent directions:

- ``exhaustive_cost`` enumerates every admissible segmentation of a
  short series (n <= 14) and scores each segment at its clamped
  closed-form optimum, giving the exact optimal penalised cost.
- ``grid_dp_oracle`` runs the same dynamic program as the solver but
  restricted to a finite set of parameter values, every transition of
  which is verified feasible.  Its cost is therefore an upper bound on
  the true optimum, and refining the grid can only lower it.  The value
  set nests across refinements (uniform backbones double in place,
  decay chains grow from nested anchor sets, and data-driven candidates
  are grid-size independent), which makes the bound monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph import Edge, Graph, ensure_valid, expand_abs
from .losses import LossSpec, basis_of, point_cost
from .piecewise import Basis
from .solver import _effective_ka, _initial_robustness, working_domain

__all__ = ["pava_l2", "linear_fit", "run_count",
           "exhaustive_segmentation_oracle", "grid_dp_oracle",
           "GridOracleResult"]


def pava_l2(data, weights=None, increasing: bool = True) -> np.ndarray:
    """Exact weighted L2 isotonic regression (pool adjacent violators).

    Parameters
    ----------
    data : array-like
    weights : array-like, optional
        Positive weights, default 1.
    increasing : bool
        Fit a nondecreasing (default) or nonincreasing sequence.

    Returns
    -------
    numpy.ndarray
        Fitted values, same length as ``data``.
    """
    y = np.asarray(data, dtype=float)
    if not increasing:
        return -pava_l2(-y, weights, increasing=True)
    w = np.ones_like(y) if weights is None else np.asarray(weights, float)
    means: List[float] = []
    sizes: List[int] = []
    wsums: List[float] = []
    for yi, wi in zip(y, w):
        m, ws, k = float(yi), float(wi), 1
        while means and means[-1] > m:
            m = (wsums[-1] * means[-1] + ws * m) / (wsums[-1] + ws)
            ws += wsums[-1]
            k += sizes[-1]
            means.pop()
            sizes.pop()
            wsums.pop()
        means.append(m)
        sizes.append(k)
        wsums.append(ws)
    return np.repeat(means, sizes)


def linear_fit(data) -> np.ndarray:
    """Ordinary least squares line fitted against the index 1..n."""
    y = np.asarray(data, dtype=float)
    x = np.arange(1, y.size + 1, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return intercept + slope * x


def run_count(values, tol: float = 1e-9) -> int:
    """Number of maximal constant runs in a fitted sequence."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0
    changes = np.abs(np.diff(v)) > tol * (1.0 + np.abs(v[:-1]))
    return int(changes.sum()) + 1


# -- exhaustive oracle -----------------------------------------------------


def _segment_optimum(family: str, y: np.ndarray, w: np.ndarray,
                     domain: Tuple[float, float], K: float, a: float,
                     size: float) -> float:
    """Optimal constant cost of one segment, parameter clamped to domain."""
    lo, hi = domain
    sw = float(w.sum())
    swy = float((w * y).sum())
    if family == "gauss" and math.isfinite(K):
        # robust losses are not convex in theta; scan then polish
        from scipy.optimize import minimize_scalar
        cands = np.unique(np.concatenate(
            [np.linspace(lo, hi, 513), np.clip(y, lo, hi), [swy / sw]]))
        costs = [sum(point_cost(family, float(yi), float(th),
                                weight=float(wi), K=K, a=a, size=size)
                     for yi, wi in zip(y, w)) for th in cands]
        best = int(np.argmin(costs))
        left = cands[max(best - 1, 0)]
        right = cands[min(best + 1, len(cands) - 1)]
        res = minimize_scalar(
            lambda th: sum(point_cost(family, float(yi), float(th),
                                      weight=float(wi), K=K, a=a, size=size)
                           for yi, wi in zip(y, w)),
            bounds=(left, right), method="bounded",
            options={"xatol": 1e-12})
        return float(min(res.fun, costs[best]))
    if family in ("gauss", "poisson", "binomial"):
        theta = swy / sw
    elif family == "exp":
        theta = sw / swy if swy > 0 else hi
    elif family == "variance":
        swy2 = float((w * y * y).sum())
        theta = sw / swy2 if swy2 > 0 else hi
    else:  # negbin
        theta = size * sw / (size * sw + swy)
    theta = min(max(theta, lo), hi)
    return sum(point_cost(family, float(yi), theta, weight=float(wi),
                          K=K, a=a, size=size) for yi, wi in zip(y, w))


def exhaustive_segmentation_oracle(
        data, loss: Optional[LossSpec] = None, *, penalty: float = 0.0,
        n_segments: Optional[int] = None, min_length: int = 1,
        weights=None) -> Tuple[float, Tuple[int, ...]]:
    """Optimal penalised cost by enumerating every segmentation.

    Parameters
    ----------
    data : array-like
        At most 14 points.
    loss : LossSpec, optional
    penalty : float
        Cost added per change.
    n_segments : int, optional
        Restrict to exactly this many segments.
    min_length : int
        Minimal points per segment.
    weights : array-like, optional

    Returns
    -------
    (float, tuple of int)
        Best cost and the 1-based boundaries (last index per segment,
        final entry ``n``).
    """
    if loss is None:
        loss = LossSpec()
    y = np.asarray(data, dtype=float)
    n = y.size
    if n > 14:
        raise ValueError(f"exhaustive enumeration is limited to n <= 14, "
                         f"got {n}")
    w = np.full(n, loss.weight) if weights is None \
        else np.asarray(weights, float) * loss.weight
    domain = working_domain(y, loss)
    table = {}
    for i in range(n):
        for j in range(i, n):
            table[(i, j)] = _segment_optimum(
                loss.family, y[i:j + 1], w[i:j + 1], domain,
                loss.K, loss.a, loss.size)
    best = math.inf
    best_bounds: Tuple[int, ...] = (n,)
    sizes = range(n) if n_segments is None else [n_segments - 1]
    for k in sizes:
        for cuts in combinations(range(1, n), k):
            bounds = (0,) + cuts + (n,)
            if any(b - a < min_length for a, b in zip(bounds, bounds[1:])):
                continue
            cost = penalty * k + sum(table[(a, b - 1)]
                                     for a, b in zip(bounds, bounds[1:]))
            if cost < best:
                best = cost
                best_bounds = cuts + (n,)
    return best, best_bounds


# -- grid dynamic-programming oracle ---------------------------------------


@dataclass
class GridOracleResult:
    """Outcome of a grid-restricted dynamic program.

    ``cost`` is the recovered path cost plus a small floating-point
    repair allowance, making it a certified upper bound on the exact
    optimum; ``path_cost`` is the raw recomputed cost of the path.
    """

    cost: float
    path_cost: float
    states: List[str]
    means: np.ndarray
    n_values: int


def _nested_uniform(lo: float, hi: float, count: int) -> np.ndarray:
    # built so doubling count to 2*count-1 reuses every value exactly
    step = (hi - lo) / (count - 1)
    vals = lo + np.arange(count, dtype=float) * step
    vals[-1] = hi
    return vals


def _block_candidates(family: str, y: np.ndarray, w: np.ndarray,
                      size: float) -> np.ndarray:
    """Closed-form constant fit of every contiguous block."""
    n = y.size
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cwy = np.concatenate([[0.0], np.cumsum(w * y)])
    cwy2 = np.concatenate([[0.0], np.cumsum(w * y * y)])
    out = []
    for i in range(n):
        sw = cw[i + 1:] - cw[i]
        swy = cwy[i + 1:] - cwy[i]
        if family in ("gauss", "poisson", "binomial"):
            out.append(swy / sw)
        elif family == "exp":
            with np.errstate(divide="ignore"):
                out.append(np.where(swy > 0, sw / swy, np.inf))
        elif family == "variance":
            swy2 = cwy2[i + 1:] - cwy2[i]
            with np.errstate(divide="ignore"):
                out.append(np.where(swy2 > 0, sw / swy2, np.inf))
        else:  # negbin
            out.append(size * sw / (size * sw + swy))
    return np.concatenate(out)


def _pair_candidates(y: np.ndarray, w: np.ndarray,
                     gaps: Sequence[float], limit: int) -> np.ndarray:
    """Gauss fits of adjacent block pairs whose change is exactly a gap.

    For an active up constraint (mu2 = mu1 + g) the coupled optimum is
    the weighted mean of block one pooled with block two shifted down by
    g, and symmetrically for an active down constraint.  Both endpoint
    values are emitted so the pair exists on the grid with the
    constraint holding exactly in floating point.
    """
    n = y.size
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cwy = np.concatenate([[0.0], np.cumsum(w * y)])
    out: List[float] = []
    for i in range(n):
        for j in range(i, n - 1):
            w1 = cw[j + 1] - cw[i]
            s1 = cwy[j + 1] - cwy[i]
            for k in range(j + 1, n):
                w2 = cw[k + 1] - cw[j + 1]
                s2 = cwy[k + 1] - cwy[j + 1]
                for g in gaps:
                    up1 = (s1 + s2 - w2 * g) / (w1 + w2)
                    out.extend((up1, up1 + g))
                    dn2 = (s1 - w1 * g + s2) / (w1 + w2)
                    out.extend((dn2, dn2 + g))
                    if len(out) >= limit:
                        return np.asarray(out)
    return np.asarray(out)


def _decay_candidates(y: np.ndarray, w: np.ndarray, alpha: float,
                      signed_gaps: Sequence[float],
                      limit: int) -> np.ndarray:
    """Gauss fits of geometrically decaying blocks and coupled pairs.

    A block starting at i with value v contributes v * alpha**(j - i) at
    time j, so the optimal start value has a closed form.  When a jump
    constraint binds between two adjacent blocks the second start value
    is determined by the first, giving another closed form; the second
    anchor is emitted via repeated multiplication so it lands exactly on
    the decay chain built from the first.
    """
    n = y.size
    A = np.zeros((n, n))
    B = np.zeros((n, n))
    out: List[float] = []
    for i in range(n):
        pw = 1.0
        a = 0.0
        b = 0.0
        for k in range(i, n):
            a += w[k] * pw * pw
            b += w[k] * y[k] * pw
            A[i, k] = a
            B[i, k] = b
            out.append(b / a)
            pw *= alpha
    for i in range(n):
        c = 1.0
        for k in range(i, n - 1):
            a1 = A[i, k]
            b1 = B[i, k]
            for t in range(k + 1, n):
                a2 = A[k + 1, t]
                b2 = B[k + 1, t]
                denom = a1 + c * c * a2
                for s in signed_gaps:
                    v1 = (b1 + c * b2 - c * s * a2) / denom
                    out.append(v1)
                    if s != 0.0:
                        v = v1
                        for _ in range(k - i):
                            v *= alpha
                        out.append(v + s)
                    if len(out) >= limit:
                        return np.asarray(out)
            c *= alpha
    return np.asarray(out)


def _grid_values(y: np.ndarray, w: np.ndarray, graph: Graph,
                 loss: LossSpec, grid_size: int, enrich: bool,
                 ) -> np.ndarray:
    dmin, dmax = working_domain(y, loss, graph)
    decays = sorted({e.parameter for e in graph.edges
                     if e.type == "null" and e.parameter != 1.0})
    if len(decays) > 1:
        raise NotImplementedError(
            "the grid oracle supports at most one decay factor")
    pins = [lo for lo, hi in graph.node_ranges.values() if lo == hi]
    pieces = []
    n = y.size
    extras = np.empty(0)
    if enrich:
        extras = _block_candidates(loss.family, y, w, loss.size)
        gaps = sorted({e.gap for e in graph.edges if e.gap > 0.0})
        if gaps and basis_of(loss.family) is Basis.QUADRATIC and not decays:
            extras = np.concatenate(
                [extras, _pair_candidates(y, w, gaps, 40000)])
        if decays and basis_of(loss.family) is Basis.QUADRATIC:
            signed = sorted({e.gap for e in graph.edges if e.type == "up"}
                            | {-e.gap for e in graph.edges
                               if e.type == "down"})
            extras = np.concatenate(
                [extras, _decay_candidates(y, w, decays[0], signed, 40000)])
    if decays:
        alpha = decays[0]
        depth = n + 1
        exponent = max(math.ceil(math.log2(max(
            (grid_size - 1) / depth, 1.0))), 1)
        anchors = _nested_uniform(dmin, dmax, 2 ** exponent + 1)
        anchors = np.concatenate([anchors, extras, np.asarray(pins)])
        anchors = anchors[np.isfinite(anchors)]
        chains = np.empty((anchors.size, depth))
        chains[:, 0] = anchors
        for k in range(1, depth):
            chains[:, k] = alpha * chains[:, k - 1]
        pieces.append(chains.ravel())
    else:
        pieces.append(_nested_uniform(dmin, dmax, grid_size))
        pieces.append(extras)
        pieces.append(np.asarray(pins))
    values = np.concatenate(pieces)
    values = values[np.isfinite(values)]
    values = values[(values >= dmin) & (values <= dmax)]
    return np.unique(values)


def _transition(edge: Edge, prev: np.ndarray, theta: np.ndarray,
                basis: Basis) -> Tuple[np.ndarray, np.ndarray]:
    """Minimal predecessor cost per arrival value, with its source index."""
    m = theta.size
    if edge.type == "std":
        i = int(np.argmin(prev))
        return np.full(m, prev[i]), np.full(m, i, dtype=np.int64)
    if edge.type == "null":
        alpha = edge.parameter
        if alpha == 1.0:
            return prev.copy(), np.arange(m, dtype=np.int64)
        targets = alpha * theta
        pos = np.searchsorted(theta, targets)
        ok = (pos < m)
        ok[ok] = theta[pos[ok]] == targets[ok]
        cand = np.full(m, np.inf)
        src = np.full(m, -1, dtype=np.int64)
        order = np.argsort(-prev[ok], kind="stable")
        tgt_idx = pos[ok][order]
        cand[tgt_idx] = prev[ok][order]
        src[tgt_idx] = np.flatnonzero(ok)[order]
        return cand, src
    if edge.type == "up":
        if basis is Basis.LIN_LOG and edge.parameter > 0.0:
            reach = edge.parameter * theta
        else:
            gap = edge.parameter if basis is Basis.QUADRATIC else 0.0
            reach = theta + gap
        prefix = np.minimum.accumulate(prev)
        achiever = np.where(prev == prefix, np.arange(m), -1)
        prefix_arg = np.maximum.accumulate(achiever)
        pos = np.searchsorted(reach, theta, side="right") - 1
        cand = np.where(pos >= 0, prefix[np.maximum(pos, 0)], np.inf)
        src = np.where(pos >= 0, prefix_arg[np.maximum(pos, 0)], -1)
        return cand, src
    if edge.type == "down":
        if basis is Basis.LIN_LOG and edge.parameter > 0.0:
            need = edge.parameter * theta
        else:
            gap = edge.parameter if basis is Basis.QUADRATIC else 0.0
            need = theta + gap
        rev = prev[::-1]
        rev_prefix = np.minimum.accumulate(rev)
        suffix = rev_prefix[::-1]
        ach_rev = np.where(rev == rev_prefix, np.arange(m), -1)
        suffix_arg = (m - 1 - np.maximum.accumulate(ach_rev))[::-1]
        pos = np.searchsorted(theta, need, side="left")
        cand = np.where(pos < m, suffix[np.minimum(pos, m - 1)], np.inf)
        src = np.where(pos < m, suffix_arg[np.minimum(pos, m - 1)], -1)
        return cand, src
    raise AssertionError(f"unexpected edge type {edge.type!r}")


def _point_cost_vec(family: str, y: float, theta: np.ndarray, weight: float,
                    K: float, a: float, size: float) -> np.ndarray:
    if family == "gauss":
        d = np.abs(theta - y)
        if not math.isfinite(K):
            return weight * d * d
        out = np.where(d <= K, weight * d * d,
                       weight * K * K if not math.isfinite(a) or a == 0.0
                       else weight * (K * K + a * (d - K)))
        return out
    if family == "poisson":
        return weight * (theta - y * np.log(theta))
    if family == "exp":
        return weight * (y * theta - np.log(theta))
    if family == "variance":
        return weight * (y * y * theta - np.log(theta)) / 2.0
    if family == "binomial":
        return weight * (-y * np.log(theta) - (1.0 - y) * np.log1p(-theta))
    if family == "negbin":
        return weight * (-size * np.log(theta) - y * np.log1p(-theta))
    raise ValueError(f"unknown loss family {family!r}")


def _polish_path(y: np.ndarray, w: np.ndarray, graph: Graph, loss: LossSpec,
                 edges_used: Sequence[Optional[Edge]],
                 means: np.ndarray) -> np.ndarray:
    """Exact continuous re-fit of the best grid path's block structure.

    The state path and its edges stay fixed, so the result remains
    feasible and the oracle stays an upper bound.  For plain gauss
    losses each maximal run of blocks coupled by up/down constraints is
    re-fitted by enumerating binding patterns (closed-form pooled
    means); when the grid identified the true combinatorial structure
    this recovers the continuous optimum exactly, including chains of
    several simultaneously binding gaps that no finite candidate grid
    can represent.
    """
    if basis_of(loss.family) is not Basis.QUADRATIC or graph.node_ranges:
        return means
    if math.isfinite(loss.K) or math.isfinite(loss.a):
        return means
    for e in graph.edges:
        if e.type == "null" and e.parameter != 1.0:
            return means
        if math.isfinite(e.K) or math.isfinite(e.a):
            return means
    n = y.size
    starts = [0]
    links: List[Edge] = []
    for t in range(1, n):
        e = edges_used[t - 1]
        if e is not None and e.type != "null":
            starts.append(t)
            links.append(e)
    bounds = starts + [n]
    nblocks = len(starts)
    bw = np.empty(nblocks)
    bm = np.empty(nblocks)
    for b in range(nblocks):
        ws = w[bounds[b]:bounds[b + 1]]
        bw[b] = float(ws.sum())
        bm[b] = float(ws @ y[bounds[b]:bounds[b + 1]]) / bw[b]
    out = means.copy()

    def chain_fit(lo: int, hi: int) -> None:
        m = hi - lo
        if m > 12:
            return
        signs = np.array([1.0 if links[i].type == "up" else -1.0
                          for i in range(lo, hi)])
        gaps = np.array([links[i].gap for i in range(lo, hi)])
        bweights = bw[lo:hi + 1]
        targets = bm[lo:hi + 1]
        best_vals = np.array([means[starts[b]] for b in range(lo, hi + 1)])
        best_cost = float(bweights @ (best_vals - targets) ** 2)
        for pattern in range(1 << m):
            v = np.empty(m + 1)
            g0 = 0
            while g0 <= m:
                g1 = g0
                off = [0.0]
                while g1 < m and pattern >> g1 & 1:
                    off.append(off[-1] + signs[g1] * gaps[g1])
                    g1 += 1
                offsets = np.asarray(off)
                wg = bweights[g0:g1 + 1]
                base = float(wg @ (targets[g0:g1 + 1] - offsets)) \
                    / float(wg.sum())
                v[g0:g1 + 1] = base + offsets
                g0 = g1 + 1
            if any(not pattern >> i & 1
                   and signs[i] * (v[i + 1] - v[i]) < gaps[i]
                   for i in range(m)):
                continue
            cost = float(bweights @ (v - targets) ** 2)
            if cost < best_cost:
                best_cost = cost
                best_vals = v
        for local in range(m + 1):
            gb = lo + local
            out[bounds[gb]:bounds[gb + 1]] = best_vals[local]

    lo = 0
    for i in range(len(links) + 1):
        if i == len(links) or links[i].type == "std":
            chain_fit(lo, i)
            lo = i + 1
    return out


def grid_dp_oracle(data, graph: Graph, loss: Optional[LossSpec] = None,
                   grid_size: int = 1001, weights=None,
                   enrich: bool = True) -> GridOracleResult:
    """Upper-bound oracle: the solver's recursion over a finite grid.

    Every path the restricted program considers is feasible for the
    continuous problem, so the returned cost can never undercut the
    exact optimum, and enlarging ``grid_size`` (doubling as
    ``2*grid_size - 1``) never increases it.  For plain gauss losses
    the best path is re-fitted in closed form afterwards (same states
    and edges, binding patterns enumerated per constrained chain),
    which removes the grid discretisation error whenever the grid found
    the true combinatorial structure.

    Parameters
    ----------
    data : array-like
    graph : Graph
    loss : LossSpec, optional
    grid_size : int
        Uniform backbone size (at least 101).
    weights : array-like, optional
    enrich : bool
        Also include closed-form block fits (and gap-coupled pair fits
        for gauss losses) as candidate values.

    Returns
    -------
    GridOracleResult
    """
    if loss is None:
        loss = LossSpec()
    if grid_size < 101:
        raise ValueError(f"grid_size must be at least 101, got {grid_size}")
    y = np.asarray(data, dtype=float)
    n = y.size
    w = np.full(n, loss.weight) if weights is None \
        else np.asarray(weights, float) * loss.weight
    ensure_valid(graph, loss)
    graph = expand_abs(graph)
    basis = basis_of(loss.family)
    family = loss.family
    theta = _grid_values(y, w / loss.weight if weights is not None
                         else np.ones(n), graph, loss, grid_size, enrich)
    m = theta.size

    states = graph.states
    index = {s: j for j, s in enumerate(states)}
    in_edges: List[List[Tuple[int, Edge]]] = [[] for _ in states]
    for eidx, e in enumerate(graph.edges):
        in_edges[index[e.state2]].append((eidx, e))
    masks = {}
    for s, (lo, hi) in graph.node_ranges.items():
        masks[index[s]] = (theta >= lo) & (theta <= hi)

    start = set(graph.effective_start())
    end = set(graph.effective_end())
    dp: List[Optional[np.ndarray]] = [None] * len(states)
    for j, s in enumerate(states):
        if s not in start:
            continue
        k0, a0 = _initial_robustness(graph, s, loss)
        col = _point_cost_vec(family, float(y[0]), theta, float(w[0]),
                              k0, a0, loss.size)
        if j in masks:
            col = np.where(masks[j], col, np.inf)
        dp[j] = col

    parent_src: List[List[Optional[np.ndarray]]] = []
    parent_edge: List[List[Optional[np.ndarray]]] = []
    for t in range(1, n):
        y_t = float(y[t])
        w_t = float(w[t])
        gamma_cache: Dict[Tuple[float, float], np.ndarray] = {}
        nxt: List[Optional[np.ndarray]] = [None] * len(states)
        srcs: List[Optional[np.ndarray]] = [None] * len(states)
        eids: List[Optional[np.ndarray]] = [None] * len(states)
        for j in range(len(states)):
            best = None
            best_src = None
            best_eid = None
            for eidx, e in in_edges[j]:
                prev = dp[index[e.state1]]
                if prev is None:
                    continue
                cand, src = _transition(e, prev, theta, basis)
                ka = _effective_ka(e, loss)
                gamma = gamma_cache.get(ka)
                if gamma is None:
                    gamma = _point_cost_vec(family, y_t, theta, w_t,
                                            ka[0], ka[1], loss.size)
                    gamma_cache[ka] = gamma
                cand = cand + gamma + e.penalty
                if best is None:
                    best = cand
                    best_src = src
                    best_eid = np.full(m, eidx, dtype=np.int16)
                else:
                    better = cand < best
                    best = np.where(better, cand, best)
                    best_src = np.where(better, src, best_src)
                    best_eid = np.where(better, eidx, best_eid)
            if best is not None and j in masks:
                best = np.where(masks[j], best, np.inf)
            nxt[j] = best
            srcs[j] = best_src
            eids[j] = best_eid
        dp = nxt
        parent_src.append(srcs)
        parent_edge.append(eids)

    best_j, best_i, best_cost = -1, -1, math.inf
    for j, s in enumerate(states):
        if s not in end or dp[j] is None:
            continue
        i = int(np.argmin(dp[j]))
        if dp[j][i] < best_cost:
            best_j, best_i, best_cost = j, i, float(dp[j][i])
    if best_j < 0 or not math.isfinite(best_cost):
        return GridOracleResult(math.inf, math.inf, [], np.empty(0), m)

    path_j = np.empty(n, dtype=np.int64)
    path_i = np.empty(n, dtype=np.int64)
    path_j[-1], path_i[-1] = best_j, best_i
    edges_used: List[Optional[Edge]] = [None] * (n - 1)
    for t in range(n - 2, -1, -1):
        j, i = int(path_j[t + 1]), int(path_i[t + 1])
        eidx = int(parent_edge[t][j][i])
        edges_used[t] = graph.edges[eidx]
        path_i[t] = int(parent_src[t][j][i])
        path_j[t] = index[graph.edges[eidx].state1]

    means = _polish_path(y, w, graph, loss, edges_used, theta[path_i])
    path_cost = 0.0
    for t in range(n):
        if t == 0:
            k_t, a_t = _initial_robustness(graph, states[int(path_j[0])],
                                           loss)
        else:
            k_t, a_t = _effective_ka(edges_used[t - 1], loss)
            path_cost += edges_used[t - 1].penalty
        path_cost += point_cost(family, float(y[t]), float(means[t]),
                                weight=float(w[t]), K=k_t, a=a_t,
                                size=loss.size)
    # allowance for half-ulp rounding in the feasibility comparisons
    margin = 64.0 * n * np.finfo(float).eps * (1.0 + abs(path_cost))
    return GridOracleResult(path_cost + margin, path_cost,
                            [states[int(j)] for j in path_j], means, m)
