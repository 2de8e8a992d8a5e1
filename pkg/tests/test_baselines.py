import math
from itertools import combinations

import numpy as np
import pytest
from scipy.optimize import isotonic_regression

from graphseg.baselines import (GridOracleResult, exhaustive_segmentation_oracle,
                                grid_dp_oracle, linear_fit, pava_l2, run_count)
from graphseg.graph import (at_least_graph, build_default_graph,
                            collective_anomaly_graph, exp_decay_graph,
                            segment_graph)
from graphseg.losses import LossSpec, point_cost

SEEDS = range(20)
ATOL = 1e-10


# -- reference fits ----------------------------------------------------------


@pytest.mark.parametrize("seed", SEEDS)
def test_pava_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=60) + 0.05 * np.arange(60)
    w = rng.uniform(0.5, 2.0, size=60)
    ours = pava_l2(y, w)
    ref = isotonic_regression(y, weights=w, increasing=True).x
    assert np.max(np.abs(ours - ref)) <= 1e-9


def test_pava_decreasing():
    y = np.array([1.0, 3.0, 2.0, 0.0])
    fit = pava_l2(y, increasing=False)
    assert np.all(np.diff(fit) <= 1e-12)
    ref = isotonic_regression(y, increasing=False).x
    assert np.max(np.abs(fit - ref)) <= 1e-9


def test_pava_sorted_input_unchanged():
    y = np.array([0.0, 1.0, 1.5, 4.0])
    assert np.array_equal(pava_l2(y), y)


def test_linear_fit_matches_normal_equations():
    rng = np.random.default_rng(3)
    y = rng.normal(size=25) + 0.3 * np.arange(25)
    x = np.arange(1, 26, dtype=float)
    vx = x - x.mean()
    slope = float((vx * (y - y.mean())).sum() / (vx * vx).sum())
    intercept = float(y.mean() - slope * x.mean())
    assert np.max(np.abs(linear_fit(y) - (intercept + slope * x))) <= 1e-9


def test_run_count():
    assert run_count([]) == 0
    assert run_count([2.0]) == 1
    assert run_count([1.0, 1.0, 2.0, 2.0, 1.0]) == 3
    assert run_count([5.0, 5.0 + 1e-12]) == 1
    assert run_count([5.0, 6.0]) == 2


# -- exhaustive oracle -------------------------------------------------------


def enumerate_gauss_best(y, penalty, n_segments=None, min_length=1):
    # independent enumeration with closed-form segment means
    n = y.size
    best = math.inf
    sizes = range(n) if n_segments is None else [n_segments - 1]
    for k in sizes:
        for cuts in combinations(range(1, n), k):
            bounds = (0,) + cuts + (n,)
            if any(b - a < min_length for a, b in zip(bounds, bounds[1:])):
                continue
            cost = penalty * k
            for a, b in zip(bounds, bounds[1:]):
                seg = y[a:b]
                cost += float(((seg - seg.mean()) ** 2).sum())
            best = min(best, cost)
    return best


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("penalty", [0.0, 4.0])
def test_exhaustive_oracle_matches_direct_enumeration(seed, penalty):
    rng = np.random.default_rng([seed, 17])
    y = rng.normal(size=8)
    cost, bounds = exhaustive_segmentation_oracle(y, penalty=penalty)
    assert abs(cost - enumerate_gauss_best(y, penalty)) <= ATOL
    assert bounds[-1] == 8
    assert all(b < c for b, c in zip(bounds, bounds[1:]))


def test_exhaustive_oracle_segment_count_and_min_length():
    rng = np.random.default_rng(5)
    y = rng.normal(size=7)
    cost, bounds = exhaustive_segmentation_oracle(y, n_segments=3)
    assert len(bounds) == 3
    assert abs(cost - enumerate_gauss_best(y, 0.0, n_segments=3)) <= ATOL
    cost2, bounds2 = exhaustive_segmentation_oracle(y, penalty=0.1,
                                                    min_length=3)
    assert abs(cost2 - enumerate_gauss_best(y, 0.1, min_length=3)) <= ATOL
    starts = (0,) + bounds2[:-1]
    assert all(b - a >= 3 for a, b in zip(starts, bounds2))


def test_exhaustive_oracle_poisson_uses_segment_means():
    y = np.array([1.0, 2.0, 9.0, 12.0])
    loss = LossSpec(family="poisson")
    cost, bounds = exhaustive_segmentation_oracle(y, loss, penalty=1.0)
    best = math.inf
    for cuts in [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]:
        b = (0,) + cuts + (4,)
        c = 1.0 * len(cuts)
        for i, j in zip(b, b[1:]):
            m = float(y[i:j].mean())
            c += sum(point_cost("poisson", float(v), m) for v in y[i:j])
        best = min(best, c)
    assert abs(cost - best) <= ATOL


def test_exhaustive_oracle_rejects_long_series():
    with pytest.raises(ValueError, match="n <= 14"):
        exhaustive_segmentation_oracle(np.zeros(15))


def test_exhaustive_oracle_weights():
    y = np.array([0.0, 0.0, 10.0, 10.0])
    w = np.array([1.0, 1.0, 3.0, 3.0])
    cost, bounds = exhaustive_segmentation_oracle(y, penalty=1.0, weights=w)
    assert bounds == (2, 4)
    assert abs(cost - 1.0) <= ATOL


# -- grid oracle -------------------------------------------------------------


def test_grid_oracle_result_fields():
    rng = np.random.default_rng(0)
    y = rng.normal(size=12)
    res = grid_dp_oracle(y, build_default_graph("std", penalty=2.0))
    assert isinstance(res, GridOracleResult)
    assert res.cost >= res.path_cost
    assert len(res.states) == 12
    assert res.means.shape == (12,)
    assert res.n_values >= 101


@pytest.mark.parametrize("graph", [
    build_default_graph("std", penalty=3.0),
    build_default_graph("isotonic", penalty=1.0),
    build_default_graph("updown", penalty=2.0, gap=0.5),
    segment_graph(3, penalty=0.0),
    at_least_graph(2, penalty=2.0),
    collective_anomaly_graph(penalty=4.0, K=3.0),
    exp_decay_graph(decay=0.9, penalty=5.0),
])
def test_grid_oracle_refinement_is_monotone(graph):
    rng = np.random.default_rng(11)
    y = np.round(rng.normal(size=16), 2)
    coarse = grid_dp_oracle(y, graph, grid_size=201)
    fine = grid_dp_oracle(y, graph, grid_size=401)
    assert fine.n_values >= coarse.n_values
    assert fine.path_cost <= coarse.path_cost + 1e-12


def test_grid_oracle_exhaustive_sandwich():
    # grid cost upper-bounds the exact optimum on an unconstrained model
    rng = np.random.default_rng(2)
    y = rng.normal(size=10)
    exact, _ = exhaustive_segmentation_oracle(y, penalty=2.0)
    res = grid_dp_oracle(y, build_default_graph("std", penalty=2.0))
    assert res.cost >= exact - 1e-9
    assert res.cost <= exact + 1e-3


def test_grid_oracle_rejects_small_grid():
    with pytest.raises(ValueError, match="at least 101"):
        grid_dp_oracle(np.zeros(4), build_default_graph("std"), grid_size=51)


def test_grid_oracle_infeasible_model_returns_infinite_cost():
    res = grid_dp_oracle(np.zeros(2), at_least_graph(3))
    assert math.isinf(res.cost)
    assert res.states == []
