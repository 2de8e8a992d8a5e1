"""Exact penalised change-point solver under graph constraints.

The solver runs a functional dynamic program: for each state ``s`` and
time ``t`` it maintains the piecewise-analytic function

    ``Q_t^s(theta)`` = minimal penalised cost of explaining ``y_1..y_t``
    while sitting in state ``s`` with current parameter ``theta``.

Each step minimises over incoming edges: the predecessor cost is passed
through the edge operator (identity or decay rescaling for null edges,
global minimum for std edges, running-minimum envelopes for up/down
edges), the edge penalty is added, and the arrival point's loss is
accumulated.  Backtracking over the stored functions recovers optimal
states and parameters, which are compressed into segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph import Edge, Graph, ensure_valid, expand_abs
from .losses import LossSpec, basis_of, check_data, cost_function, point_cost
from .piecewise import Basis, FunctionalCost, pointwise_min_union

__all__ = ["Segmentation", "InfeasibleModelError", "solve", "compress_path",
           "working_domain"]

FORCED_TOL = 1e-8
_TIE_TOL = 1e-9
_DOMAIN_EPS = 1e-9


class InfeasibleModelError(RuntimeError):
    """No path through the graph can explain the data."""


@dataclass
class Segmentation:
    """Result of a solve: segments, states, and costs.

    Attributes
    ----------
    changepoints : list of int
        1-based last index of each segment; the final entry is ``n``.
    states : list of str
        State of each segment.
    forced : list of int
        For each change, 1 when the constraint is active (the change was
        forced to its minimal magnitude), else 0.
    parameters : list of float
        Parameter of each segment at its last index (relevant for decay
        segments, where the parameter evolves geometrically).
    globalCost : float
        Total unpenalised loss of the fitted parameters.
    penalised_cost : float
        ``globalCost`` plus all traversed edge penalties; the quantity
        the solver minimises.
    means : numpy.ndarray or None
        Fitted parameter at every data point.
    max_pieces : int
        Largest piece count of any stored cost function (a measure of
        solver effort).
    """

    changepoints: List[int]
    states: List[str]
    forced: List[int]
    parameters: List[float]
    globalCost: float
    penalised_cost: float = math.nan
    means: Optional[np.ndarray] = None
    max_pieces: int = 0

    def to_dict(self) -> dict:
        """Five-key summary used by the command line interface."""
        return {
            "changepoints": list(self.changepoints),
            "states": list(self.states),
            "forced": list(self.forced),
            "parameters": [float(p) for p in self.parameters],
            "globalCost": float(self.globalCost),
        }


def working_domain(data, loss: LossSpec, graph: Optional[Graph] = None,
                   ) -> Tuple[float, float]:
    """Finite parameter interval containing every candidate optimum.

    Parameters
    ----------
    data : array-like
    loss : LossSpec
    graph : Graph, optional
        Node ranges extend the interval so pinned values stay inside.

    Returns
    -------
    (float, float)
    """
    y = np.asarray(data, dtype=float)
    ymin = float(y.min())
    ymax = float(y.max())
    family = loss.family
    if family == "gauss":
        r = max(1.0, 0.1 * (ymax - ymin))
        lo, hi = ymin - r, ymax + r
    elif family == "poisson":
        r = max(1.0, 0.1 * (ymax - ymin))
        lo, hi = _DOMAIN_EPS, ymax + r
    elif family == "exp":
        # rate parameter; optima are reciprocals of segment means
        lo = 0.5 / (ymax + 1.0)
        hi = 2.2 / max(ymin, _DOMAIN_EPS)
    elif family == "variance":
        # precision parameter 1/sigma^2; optima are 1/(mean of y^2)
        sq = y * y
        lo = 0.5 / (float(sq.max()) + 1.0)
        hi = 2.0 / max(float(sq.min()), 1e-12)
    else:  # binomial, negbin: probability parameter
        lo, hi = _DOMAIN_EPS, 1.0 - _DOMAIN_EPS
    if graph is not None:
        basis = basis_of(family)
        for nlo, nhi in graph.node_ranges.values():
            if math.isfinite(nlo):
                lo = min(lo, nlo)
            if math.isfinite(nhi):
                hi = max(hi, nhi)
        if basis is Basis.LIN_LOG:
            lo = max(lo, _DOMAIN_EPS)
        elif basis is Basis.LOG_LOG:
            lo = max(lo, _DOMAIN_EPS)
            hi = min(hi, 1.0 - _DOMAIN_EPS)
    if not lo < hi:
        hi = lo + 1.0
    return lo, hi


def _effective_ka(edge: Edge, loss: LossSpec) -> Tuple[float, float]:
    if math.isfinite(edge.K):
        return edge.K, edge.a
    return loss.K, loss.a


def _initial_robustness(graph: Graph, state: str,
                        loss: LossSpec) -> Tuple[float, float]:
    for e in graph.edges:
        if e.state2 == state:
            return _effective_ka(e, loss)
    return loss.K, loss.a


def _extend_right(fc: FunctionalCost, hi: float,
                  basis: Basis) -> FunctionalCost:
    """Continue a nonincreasing envelope by a constant up to ``hi``."""
    if fc.upper >= hi:
        return fc
    v = fc.evaluate(fc.upper)
    if fc.is_point:
        return FunctionalCost.constant(basis, fc.lower, hi, v)
    bounds = np.concatenate([fc._bounds, [hi]])
    coef = np.concatenate([fc._coef, [[v, 0.0, 0.0]]])
    return FunctionalCost._from_arrays(basis, bounds, coef)


def _extend_left(fc: FunctionalCost, lo: float,
                 basis: Basis) -> FunctionalCost:
    """Continue a nondecreasing envelope by a constant down to ``lo``."""
    if fc.lower <= lo:
        return fc
    v = fc.evaluate(fc.lower)
    if fc.is_point:
        return FunctionalCost.constant(basis, lo, fc.upper, v)
    bounds = np.concatenate([[lo], fc._bounds])
    coef = np.concatenate([[[v, 0.0, 0.0]], fc._coef])
    return FunctionalCost._from_arrays(basis, bounds, coef)


def _linlog_factor(edge: Edge) -> float:
    return edge.parameter if edge.parameter > 0.0 else 1.0


def _identity_monotone(edge: Edge, basis: Basis) -> bool:
    """True for a free up/down edge whose feasible set contains equality."""
    if edge.type not in ("up", "down") or edge.penalty != 0.0:
        return False
    if basis is Basis.QUADRATIC:
        return edge.parameter == 0.0
    if basis is Basis.LIN_LOG:
        return _linlog_factor(edge) == 1.0
    return True


def _drop_dominated(edges: List[Edge], basis: Basis,
                    loss: LossSpec) -> List[Edge]:
    """Remove in-edges that can never improve on a sibling edge.

    A free identity null edge is pointwise dominated by a free zero-gap
    monotone edge from the same source with the same robustness: the
    running-minimum envelope never exceeds the function it envelopes.
    Dropping the null edge leaves every update (and the optimum) intact.
    """
    kept = []
    for e in edges:
        if e.type == "null" and e.parameter == 1.0 and e.penalty == 0.0:
            ka = _effective_ka(e, loss)
            if any(f is not e and f.state1 == e.state1
                   and _identity_monotone(f, basis)
                   and _effective_ka(f, loss) == ka for f in edges):
                continue
        kept.append(e)
    return kept


def _edge_candidate(edge: Edge, src: FunctionalCost, basis: Basis,
                    dmin: float, dmax: float) -> Optional[FunctionalCost]:
    """Apply one edge operator to a predecessor cost function."""
    kind = edge.type
    if kind == "null":
        alpha = edge.parameter
        cand = src if alpha == 1.0 else src.scale_argument(alpha)
        return cand.restrict(dmin, dmax)
    if kind == "std":
        value, _ = src.global_min()
        return FunctionalCost.constant(basis, dmin, dmax, value)
    if kind == "up":
        env = src.running_min_leq()
        if basis is Basis.QUADRATIC:
            if edge.parameter != 0.0:
                env = env.shift_argument(edge.parameter)
        elif basis is Basis.LIN_LOG:
            f = _linlog_factor(edge)
            if f != 1.0:
                env = env.scale_argument(f)
        env = _extend_right(env, dmax, basis)
        return env.restrict(dmin, dmax)
    if kind == "down":
        env = src.running_min_geq()
        if basis is Basis.QUADRATIC:
            if edge.parameter != 0.0:
                env = env.shift_argument(-edge.parameter)
        elif basis is Basis.LIN_LOG:
            f = _linlog_factor(edge)
            if f != 1.0:
                env = env.scale_argument(1.0 / f)
        env = _extend_left(env, dmin, basis)
        return env.restrict(dmin, dmax)
    raise AssertionError(f"unexpected edge type {kind!r}")


def _backtrack_edge(edge: Edge, qsrc: FunctionalCost, mu_next: float,
                    basis: Basis) -> Optional[Tuple[float, float]]:
    """Best (value, theta) of ``qsrc`` over the edge-feasible set."""
    kind = edge.type
    if kind == "std":
        return qsrc.global_min()
    if kind == "null":
        theta = mu_next / edge.parameter
        tol = 1e-9 * (1.0 + abs(theta))
        if theta < qsrc.lower:
            if qsrc.lower - theta > tol:
                return None
            theta = qsrc.lower
        elif theta > qsrc.upper:
            if theta - qsrc.upper > tol:
                return None
            theta = qsrc.upper
        return qsrc.evaluate(theta), theta
    if kind == "up":
        if basis is Basis.QUADRATIC:
            hi = mu_next - edge.parameter
        elif basis is Basis.LIN_LOG:
            hi = mu_next / _linlog_factor(edge)
        else:
            hi = mu_next
        if hi < qsrc.lower:
            if qsrc.lower - hi > 1e-9 * (1.0 + abs(qsrc.lower)):
                return None
            hi = qsrc.lower
        feasible = qsrc.restrict(qsrc.lower, hi)
    elif kind == "down":
        if basis is Basis.QUADRATIC:
            lo = mu_next + edge.parameter
        elif basis is Basis.LIN_LOG:
            lo = mu_next * _linlog_factor(edge)
        else:
            lo = mu_next
        if lo > qsrc.upper:
            if lo - qsrc.upper > 1e-9 * (1.0 + abs(qsrc.upper)):
                return None
            lo = qsrc.upper
        feasible = qsrc.restrict(lo, qsrc.upper)
    else:
        raise AssertionError(f"unexpected edge type {kind!r}")
    if feasible is None:
        return None
    return feasible.global_min()


def _constraint_slack(edge: Edge, mu_prev: float, mu_next: float,
                      basis: Basis) -> float:
    """Slack of the edge inequality; 0 means the constraint is active."""
    kind = edge.type
    if kind == "up":
        if basis is Basis.QUADRATIC:
            return mu_next - mu_prev - edge.parameter
        if basis is Basis.LIN_LOG:
            return mu_next - _linlog_factor(edge) * mu_prev
        return mu_next - mu_prev
    if kind == "down":
        if basis is Basis.QUADRATIC:
            return mu_prev - mu_next - edge.parameter
        if basis is Basis.LIN_LOG:
            return mu_prev - _linlog_factor(edge) * mu_next
        return mu_prev - mu_next
    return 0.0


def _same_segment(edge: Optional[Edge], state_prev: int, state_next: int,
                  mu_prev: float, mu_next: float) -> bool:
    if state_prev != state_next:
        return False
    if abs(mu_next - mu_prev) <= 1e-9 * (1.0 + abs(mu_prev)):
        return True
    if edge is not None and edge.type == "null" \
            and edge.state1 == edge.state2:
        target = edge.parameter * mu_prev
        return abs(mu_next - target) <= 1e-9 * (1.0 + abs(target))
    return False


def compress_path(states: Sequence[str], means: Sequence[float],
                  graph: Optional[Graph] = None) -> Segmentation:
    """Compress per-point states and parameters into segments.

    Consecutive points belong to one segment when the state repeats and
    the parameter either repeats or follows the decay of a recursive
    null edge of that state (when ``graph`` is given).

    Parameters
    ----------
    states : sequence of str
        State at every data point.
    means : sequence of float
        Fitted parameter at every data point.
    graph : Graph, optional
        Source of decay factors for recursive null edges.

    Returns
    -------
    Segmentation
        Structural fields only; the cost fields are NaN and every
        ``forced`` flag 0 (only a solve can fill them).
    """
    if len(states) != len(means):
        raise ValueError("states and means must have equal length")
    if not states:
        raise ValueError("cannot compress an empty path")
    decays: Dict[str, float] = {}
    if graph is not None:
        for e in graph.edges:
            if e.type == "null" and e.state1 == e.state2 \
                    and e.state1 not in decays:
                decays[e.state1] = e.parameter
    changepoints = []
    seg_states = []
    parameters = []
    for t in range(len(states) - 1):
        same = states[t] == states[t + 1]
        if same:
            mu, mu_next = float(means[t]), float(means[t + 1])
            alpha = decays.get(states[t], 1.0)
            same = (abs(mu_next - mu) <= 1e-9 * (1.0 + abs(mu))
                    or abs(mu_next - alpha * mu)
                    <= 1e-9 * (1.0 + abs(alpha * mu)))
        if not same:
            changepoints.append(t + 1)
            seg_states.append(states[t])
            parameters.append(float(means[t]))
    changepoints.append(len(states))
    seg_states.append(states[-1])
    parameters.append(float(means[-1]))
    return Segmentation(changepoints, list(seg_states),
                        [0] * (len(changepoints) - 1), parameters,
                        math.nan)


def solve(data, graph: Graph, loss: Optional[LossSpec] = None,
          weights=None) -> Segmentation:
    """Exactly minimise penalised loss over all graph-valid paths.

    Parameters
    ----------
    data : array-like
        Observations ``y_1..y_n``.
    graph : Graph
        Constraint graph; abs edges are expanded internally.
    loss : LossSpec, optional
        Loss family and robustness parameters (default plain gauss).
    weights : array-like, optional
        Positive per-point weights multiplying each point's loss.

    Returns
    -------
    Segmentation

    Raises
    ------
    InfeasibleModelError
        When no start-to-end path of length ``n`` exists.
    ValueError
        On invalid graph, loss, data, or weights.
    """
    if loss is None:
        loss = LossSpec()
    y = np.asarray(data, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("data must be a nonempty 1-d array")
    if not np.all(np.isfinite(y)):
        raise ValueError("data must be finite")
    check_data(loss.family, y)
    n = y.size
    if weights is None:
        w = np.full(n, loss.weight)
    else:
        w = np.asarray(weights, dtype=float) * loss.weight
        if w.shape != y.shape:
            raise ValueError("weights must match data length")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be positive and finite")
    ensure_valid(graph, loss)
    graph = expand_abs(graph)
    basis = basis_of(loss.family)
    family = loss.family
    dmin, dmax = working_domain(y, loss, graph)

    states = graph.states
    index = {s: j for j, s in enumerate(states)}
    n_states = len(states)
    start = set(graph.effective_start())
    end = set(graph.effective_end())
    in_edges: List[List[Edge]] = [[] for _ in range(n_states)]
    for e in graph.edges:
        in_edges[index[e.state2]].append(e)
    for j in range(n_states):
        in_edges[j] = _drop_dominated(in_edges[j], basis, loss)
    node_range = {index[s]: rng for s, rng in graph.node_ranges.items()
                  if s in index}

    def clip_node(j: int, fc: Optional[FunctionalCost]
                  ) -> Optional[FunctionalCost]:
        if fc is None or j not in node_range:
            return fc
        lo, hi = node_range[j]
        return fc.restrict(max(lo, fc.lower), min(hi, fc.upper)) \
            if lo <= fc.upper and hi >= fc.lower else None

    # forward pass
    size = loss.size
    cur: List[Optional[FunctionalCost]] = [None] * n_states
    for j, s in enumerate(states):
        if s not in start:
            continue
        k0, a0 = _initial_robustness(graph, s, loss)
        fc = cost_function(family, float(y[0]), (dmin, dmax),
                           weight=float(w[0]), K=k0, a=a0, size=size)
        cur[j] = clip_node(j, fc)
    trace = [list(cur)]
    max_pieces = max((len(fc) for fc in cur if fc is not None), default=0)

    for t in range(1, n):
        y_t = float(y[t])
        w_t = float(w[t])
        gamma_cache: Dict[Tuple[float, float], FunctionalCost] = {}
        nxt: List[Optional[FunctionalCost]] = [None] * n_states
        for j in range(n_states):
            groups: Dict[Tuple[float, float], List[FunctionalCost]] = {}
            for e in in_edges[j]:
                src = cur[index[e.state1]]
                if src is None:
                    continue
                cand = _edge_candidate(e, src, basis, dmin, dmax)
                cand = clip_node(j, cand)
                if cand is None:
                    continue
                if e.penalty != 0.0:
                    cand = cand.add_constant(e.penalty)
                groups.setdefault(_effective_ka(e, loss), []).append(cand)
            if not groups:
                continue
            parts = []
            for ka, cands in groups.items():
                merged = cands[0] if len(cands) == 1 \
                    else pointwise_min_union(cands)
                gamma = gamma_cache.get(ka)
                if gamma is None:
                    gamma = cost_function(family, y_t, (dmin, dmax),
                                          weight=w_t, K=ka[0], a=ka[1],
                                          size=size)
                    gamma_cache[ka] = gamma
                parts.append(merged.add_piecewise(gamma))
            nxt[j] = parts[0] if len(parts) == 1 \
                else pointwise_min_union(parts)
            if len(nxt[j]) > max_pieces:
                max_pieces = len(nxt[j])
        if all(fc is None for fc in nxt):
            raise InfeasibleModelError(
                f"no state is reachable at data point {t + 1}")
        cur = nxt
        trace.append(list(cur))

    best_j = -1
    best_value = math.inf
    best_theta = math.nan
    for j, s in enumerate(states):
        if s not in end or cur[j] is None:
            continue
        value, theta = cur[j].global_min()
        if best_j < 0 or value < best_value - _TIE_TOL * (1.0 + abs(value)):
            best_j, best_value, best_theta = j, value, theta
    if best_j < 0:
        raise InfeasibleModelError("no end state is reachable at the "
                                   "final data point")

    # backtracking over stored cost functions
    path_state = np.empty(n, dtype=np.int64)
    path_mean = np.empty(n, dtype=float)
    path_edge: List[Optional[Edge]] = [None] * max(n - 1, 0)
    path_state[n - 1] = best_j
    path_mean[n - 1] = best_theta
    for t in range(n - 2, -1, -1):
        j_next = int(path_state[t + 1])
        mu_next = float(path_mean[t + 1])
        chosen = None
        chosen_value = math.inf
        for e in in_edges[j_next]:
            qsrc = trace[t][index[e.state1]]
            if qsrc is None:
                continue
            hit = _backtrack_edge(e, qsrc, mu_next, basis)
            if hit is None:
                continue
            k_e, a_e = _effective_ka(e, loss)
            value = hit[0] + point_cost(family, float(y[t + 1]), mu_next,
                                        weight=float(w[t + 1]), K=k_e,
                                        a=a_e, size=size) + e.penalty
            if chosen is None or value < chosen_value \
                    - _TIE_TOL * (1.0 + abs(chosen_value)):
                chosen = (e, hit[1])
                chosen_value = value
        if chosen is None:
            raise RuntimeError(
                f"internal error: backtracking found no feasible edge "
                f"into state {states[j_next]!r} at data point {t + 2}")
        path_edge[t] = chosen[0]
        path_state[t] = index[chosen[0].state1]
        path_mean[t] = chosen[1]

    return _assemble(y, w, loss, graph, states, path_state, path_mean,
                     path_edge, best_value, max_pieces, (dmin, dmax),
                     node_range)


def _assemble(y, w, loss, graph, states, path_state, path_mean, path_edge,
              penalised, max_pieces, domain, node_range) -> Segmentation:
    n = y.size
    family = loss.family
    basis = basis_of(family)
    size = loss.size

    changepoints: List[int] = []
    seg_states: List[str] = []
    parameters: List[float] = []
    forced: List[int] = []
    for t in range(n - 1):
        e = path_edge[t]
        if _same_segment(e, int(path_state[t]), int(path_state[t + 1]),
                         float(path_mean[t]), float(path_mean[t + 1])):
            continue
        changepoints.append(t + 1)
        seg_states.append(states[int(path_state[t])])
        parameters.append(float(path_mean[t]))
        if e is not None and e.type in ("up", "down"):
            slack = _constraint_slack(e, float(path_mean[t]),
                                      float(path_mean[t + 1]), basis)
            scale = 1.0 + abs(path_mean[t]) + abs(path_mean[t + 1])
            forced.append(1 if abs(slack) <= FORCED_TOL * scale else 0)
        else:
            forced.append(0)
    changepoints.append(n)
    seg_states.append(states[int(path_state[n - 1])])
    parameters.append(float(path_mean[n - 1]))

    global_cost = 0.0
    penalty_sum = 0.0
    for t in range(n):
        if t == 0:
            k_t, a_t = _initial_robustness(graph, states[int(path_state[0])],
                                           loss)
        else:
            k_t, a_t = _effective_ka(path_edge[t - 1], loss)
            penalty_sum += path_edge[t - 1].penalty
        global_cost += point_cost(family, float(y[t]), float(path_mean[t]),
                                  weight=float(w[t]), K=k_t, a=a_t,
                                  size=size)

    result = Segmentation(changepoints, seg_states, forced, parameters,
                          global_cost, penalised_cost=penalised,
                          means=path_mean.copy(), max_pieces=max_pieces)
    _check_solution(result, y, penalty_sum, path_state, path_mean,
                    path_edge, basis, domain, node_range)
    return result


def _check_solution(result, y, penalty_sum, path_state, path_mean,
                    path_edge, basis, domain, node_range) -> None:
    """Internal consistency checks run after every solve."""
    n = y.size
    dmin, dmax = domain
    for t in range(n):
        mu = float(path_mean[t])
        tol = FORCED_TOL * (1.0 + abs(mu))
        if mu < dmin - tol or mu > dmax + tol:
            raise RuntimeError(
                f"internal error: fitted parameter {mu!r} at point "
                f"{t + 1} escapes the working domain [{dmin}, {dmax}]")
        j = int(path_state[t])
        if j in node_range:
            lo, hi = node_range[j]
            if mu < lo - tol or mu > hi + tol:
                raise RuntimeError(
                    f"internal error: fitted parameter {mu!r} at point "
                    f"{t + 1} violates the node range [{lo}, {hi}]")
    for t in range(n - 1):
        e = path_edge[t]
        mu, mu_next = float(path_mean[t]), float(path_mean[t + 1])
        scale = 1.0 + abs(mu) + abs(mu_next)
        if e.type == "null":
            target = e.parameter * mu
            if abs(mu_next - target) > 1e-7 * scale:
                raise RuntimeError(
                    f"internal error: decay relation broken after point "
                    f"{t + 1}: {mu_next!r} != {e.parameter!r}*{mu!r}")
        elif e.type in ("up", "down"):
            if _constraint_slack(e, mu, mu_next, basis) < -FORCED_TOL * scale:
                raise RuntimeError(
                    f"internal error: {e.type} constraint violated after "
                    f"point {t + 1}: {mu!r} -> {mu_next!r}")
    recomputed = result.globalCost + penalty_sum
    if abs(recomputed - result.penalised_cost) \
            > 1e-6 * (1.0 + abs(result.penalised_cost)):
        raise RuntimeError(
            f"internal error: cost mismatch, dynamic program found "
            f"{result.penalised_cost!r} but the fitted path re-evaluates "
            f"to {recomputed!r}")
    if result.changepoints[-1] != n or \
            any(b >= c for b, c in zip(result.changepoints,
                                       result.changepoints[1:])):
        raise RuntimeError("internal error: changepoints are not strictly "
                           "increasing up to n")
