import math

import numpy as np
import pytest

from graphseg.losses import (FAMILIES, LossSpec, basis_of, binomial_loss,
                             check_data, cost_function, exponential_loss,
                             gauss_loss, negbin_loss, point_cost,
                             poisson_loss, variance_loss)
from graphseg.piecewise import Basis

DOMAINS = {
    "gauss": (-6.0, 8.0),
    "poisson": (0.05, 9.0),
    "exp": (0.05, 9.0),
    "variance": (0.05, 9.0),
    "binomial": (0.01, 0.99),
    "negbin": (0.01, 0.99),
}
DATA = {
    "gauss": (-2.5, 0.0, 1.7, 4.0),
    "poisson": (0.0, 1.0, 3.0, 7.0),
    "exp": (0.1, 1.0, 2.5),
    "variance": (-2.0, 0.0, 1.3),
    "binomial": (0.0, 0.25, 1.0),
    "negbin": (0.0, 2.0, 5.0),
}
GAUSS_KA = ((math.inf, math.inf), (2.0, math.inf), (2.0, 0.0), (2.0, 1.0),
            (0.5, 3.0))
RTOL = 1e-12


def close(u, v):
    return abs(u - v) <= RTOL * (1.0 + abs(u) + abs(v))


def test_family_list_and_bases():
    assert FAMILIES == ("gauss", "poisson", "exp", "variance", "binomial",
                        "negbin")
    assert basis_of("gauss") is Basis.QUADRATIC
    for family in ("poisson", "exp", "variance"):
        assert basis_of(family) is Basis.LIN_LOG
    for family in ("binomial", "negbin"):
        assert basis_of(family) is Basis.LOG_LOG
    with pytest.raises(ValueError, match="unknown loss family"):
        basis_of("cauchy")


def test_loss_spec_defaults_and_basis():
    spec = LossSpec()
    assert spec.family == "gauss"
    assert math.isinf(spec.K) and math.isinf(spec.a)
    assert spec.weight == 1.0 and spec.size == 1.0
    assert spec.basis is Basis.QUADRATIC
    assert LossSpec(family="negbin").basis is Basis.LOG_LOG


@pytest.mark.parametrize("kwargs,message", [
    ({"family": "laplace"}, "unknown loss family"),
    ({"K": 0.0}, "K must be positive"),
    ({"K": -1.0}, "K must be positive"),
    ({"family": "poisson", "K": 3.0}, "only.*gauss"),
    ({"a": -0.5}, "a must be nonnegative"),
    ({"weight": 0.0}, "weight must be positive"),
    ({"weight": math.inf}, "weight must be positive"),
    ({"size": 0.0}, "size must be positive"),
])
def test_loss_spec_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        LossSpec(**kwargs)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("weight", [1.0, 0.3])
def test_cost_function_matches_point_cost(family, weight):
    domain = DOMAINS[family]
    thetas = np.linspace(domain[0], domain[1], 23)
    for y in DATA[family]:
        fc = cost_function(family, y, domain, weight=weight, size=2.0)
        assert fc.basis is basis_of(family)
        for theta in thetas:
            theta = float(theta)
            direct = point_cost(family, y, theta, weight=weight, size=2.0)
            assert close(fc.evaluate(theta), direct)


@pytest.mark.parametrize("K,a", GAUSS_KA)
def test_gauss_robust_cost_function_matches_point_cost(K, a):
    domain = DOMAINS["gauss"]
    for y in DATA["gauss"]:
        fc = cost_function("gauss", y, domain, K=K, a=a, weight=0.7)
        for theta in np.linspace(domain[0], domain[1], 41):
            theta = float(theta)
            direct = point_cost("gauss", y, theta, K=K, a=a, weight=0.7)
            assert close(fc.evaluate(theta), direct)


def test_gauss_point_cost_shapes():
    # biweight: plateau at w*K^2 beyond |theta - y| = K
    assert point_cost("gauss", 1.0, 1.0, K=2.0, a=0.0) == 0.0
    assert point_cost("gauss", 1.0, 5.0, K=2.0, a=0.0) == 4.0
    assert point_cost("gauss", 1.0, -9.0, K=2.0, a=math.inf) == 4.0
    # Huber: linear tails of slope a, continuous at the threshold
    assert point_cost("gauss", 0.0, 3.0, K=2.0, a=1.0) == 4.0 + 1.0
    assert point_cost("gauss", 0.0, -3.0, K=2.0, a=1.0) == 4.0 + 1.0
    assert close(point_cost("gauss", 0.0, 2.0, K=2.0, a=1.0), 4.0)


def test_gauss_biweight_piece_structure():
    fc = gauss_loss(1.0, K=2.0, a=0.0, domain=(-6.0, 8.0))
    ps = fc.pieces
    assert len(ps) == 3
    assert (ps[0].lower, ps[0].upper) == (-6.0, -1.0)
    assert (ps[1].lower, ps[1].upper) == (-1.0, 3.0)
    assert (ps[2].lower, ps[2].upper) == (3.0, 8.0)
    assert (ps[0].a, ps[0].b, ps[0].c) == (4.0, 0.0, 0.0)
    assert (ps[2].a, ps[2].b, ps[2].c) == (4.0, 0.0, 0.0)
    assert (ps[1].b, ps[1].c) == (-2.0, 1.0)


def test_gauss_huber_tails_have_slope_a():
    fc = gauss_loss(0.0, K=1.0, a=0.5, domain=(-5.0, 5.0))
    ps = fc.pieces
    assert len(ps) == 3
    assert (ps[0].b, ps[0].c) == (-0.5, 0.0)
    assert (ps[2].b, ps[2].c) == (0.5, 0.0)
    # value continuity across thresholds
    assert close(fc.evaluate(-1.0), 1.0)
    assert close(fc.evaluate(1.0), 1.0)


def test_gauss_domain_entirely_in_one_branch():
    fc = gauss_loss(0.0, K=1.0, a=0.0, domain=(3.0, 5.0))
    assert fc.pieces == [type(fc.pieces[0])(3.0, 5.0, 1.0, 0.0, 0.0)]
    pt = gauss_loss(0.0, K=1.0, a=0.0, domain=(4.0, 4.0))
    assert pt.is_point and pt.evaluate(4.0) == 1.0


def test_weight_scales_everything():
    for family in FAMILIES:
        domain = DOMAINS[family]
        y = DATA[family][-1]
        theta = 0.5 * (domain[0] + domain[1])
        base = point_cost(family, y, theta, size=2.0)
        scaled = point_cost(family, y, theta, weight=3.0, size=2.0)
        assert close(scaled, 3.0 * base)
    assert close(point_cost("gauss", 0.0, 9.0, K=2.0, a=1.0, weight=3.0),
                 3.0 * point_cost("gauss", 0.0, 9.0, K=2.0, a=1.0))


def test_poisson_minimum_at_mean():
    fc = poisson_loss(3.0, (0.05, 9.0))
    value, arg = fc.global_min()
    assert close(arg, 3.0)
    assert close(value, 3.0 - 3.0 * math.log(3.0))


def test_exponential_minimum_at_reciprocal_mean():
    fc = exponential_loss(2.0, (0.05, 9.0))
    _, arg = fc.global_min()
    assert close(arg, 0.5)


def test_variance_minimum_at_reciprocal_square():
    fc = variance_loss(2.0, (0.05, 9.0))
    _, arg = fc.global_min()
    assert close(arg, 0.25)


def test_binomial_minimum_at_success_fraction():
    fc = binomial_loss(0.25, (0.01, 0.99))
    _, arg = fc.global_min()
    assert close(arg, 0.25)


def test_negbin_minimum_matches_dispersion():
    # minimiser of -size*log(t) - y*log(1-t) is size/(size+y)
    fc = negbin_loss(3.0, 2.0, (0.01, 0.99))
    _, arg = fc.global_min()
    assert close(arg, 0.4)


@pytest.mark.parametrize("build,y", [
    (lambda y: poisson_loss(y, (0.05, 9.0)), -1.0),
    (lambda y: exponential_loss(y, (0.05, 9.0)), -0.5),
    (lambda y: binomial_loss(y, (0.01, 0.99)), 1.5),
    (lambda y: negbin_loss(y, 1.0, (0.01, 0.99)), -2.0),
])
def test_loss_builders_reject_unsupported_data(build, y):
    with pytest.raises(ValueError):
        build(y)


def test_negbin_rejects_bad_size():
    with pytest.raises(ValueError, match="size"):
        negbin_loss(1.0, 0.0, (0.01, 0.99))


def test_unknown_family_rejected_by_dispatchers():
    with pytest.raises(ValueError, match="unknown loss family"):
        cost_function("weibull", 1.0, (0.0, 1.0))
    with pytest.raises(ValueError, match="unknown loss family"):
        point_cost("weibull", 1.0, 0.5)


def test_check_data():
    check_data("gauss", [-5.0, 5.0])
    check_data("poisson", [0.0, 2.0])
    check_data("binomial", [0.0, 0.5, 1.0])
    for family in ("poisson", "exp", "negbin"):
        with pytest.raises(ValueError, match="nonnegative"):
            check_data(family, [1.0, -0.5])
    with pytest.raises(ValueError, match="lie in"):
        check_data("binomial", [0.5, 1.2])
