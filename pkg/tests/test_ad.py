import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_composition, rel_err
from stationary_finsler import ad
from stationary_finsler.errors import DomainError


def test_square_jet():
    j = ad.jet2(lambda u: u[0] ** 2, [3.0])
    assert j.value == 9.0
    assert j.gradient.tolist() == [6.0]
    assert j.hessian.tolist() == [[2.0]]


def test_bilinear_jet():
    j = ad.jet2(lambda u: u[0] * u[1], [2.0, 5.0])
    assert j.gradient.tolist() == [5.0, 2.0]
    assert j.hessian.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_euclidean_norm_jet():
    j = ad.jet2(lambda u: ad.sqrt(u[0] ** 2 + u[1] ** 2), [3.0, 4.0])
    assert j.value == pytest.approx(5.0, abs=1e-15)
    assert np.allclose(j.gradient, [0.6, 0.8], atol=1e-15)
    # hand Hessian of |u|: (I - u u^T/|u|^2)/|u|
    u = np.array([3.0, 4.0])
    expect = (np.eye(2) - np.outer(u, u) / 25.0) / 5.0
    assert np.allclose(j.hessian, expect, atol=1e-15)


def test_fd_cubic_gradient():
    j = ad.fd_jet2(lambda u: u[0] ** 3, [1.0], h=1e-4)
    assert abs(j.gradient[0] - 3.0) <= 1e-7


def test_fd_norm_hessian():
    j = ad.fd_jet2(lambda u: ad.sqrt(u[0] ** 2 + u[1] ** 2), [3.0, 4.0], h=1e-4)
    u = np.array([3.0, 4.0])
    expect = (np.eye(2) - np.outer(u, u) / 25.0) / 5.0
    assert np.max(np.abs(j.hessian - expect)) <= 1e-6


def test_hessian_stored_symmetric():
    j = ad.jet2(lambda u: ad.sin(u[0] * u[1]) + u[2] * ad.exp(u[0]), [0.3, -0.7, 1.1])
    assert np.array_equal(j.hessian, j.hessian.T)


@pytest.mark.parametrize("prim, arg", [(ad.sqrt, -1.0), (ad.log, 0.0), (ad.log, -2.0)])
def test_domain_error_names_primitive(prim, arg):
    with pytest.raises(DomainError) as exc:
        ad.jet2(lambda u: prim(u[0]), [arg])
    assert exc.value.primitive == prim.__name__


def test_sqrt_at_zero_not_differentiable():
    with pytest.raises(DomainError):
        ad.jet2(lambda u: ad.sqrt(u[0] * u[0]), [0.0])


def test_integer_power_of_negative_base():
    j = ad.jet2(lambda u: u[0] ** 3, [-2.0])
    assert j.value == -8.0 and j.gradient[0] == 12.0 and j.hessian[0, 0] == -12.0


def test_primitives_match_math():
    x = 0.7
    for prim, ref, d1, d2 in [
        (ad.sin, math.sin, math.cos, lambda t: -math.sin(t)),
        (ad.cos, math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t)),
        (ad.exp, math.exp, math.exp, math.exp),
        (ad.log, math.log, lambda t: 1 / t, lambda t: -1 / t ** 2),
        (ad.sqrt, math.sqrt, lambda t: 0.5 / math.sqrt(t), lambda t: -0.25 * t ** -1.5),
    ]:
        j = ad.jet2(lambda u: prim(u[0]), [x])
        assert j.value == pytest.approx(ref(x), rel=1e-15)
        assert j.gradient[0] == pytest.approx(d1(x), rel=1e-14)
        assert j.hessian[0, 0] == pytest.approx(d2(x), rel=1e-14)


def test_random_compositions_agree_with_fd(rng):
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 5))
        f = random_composition(rng, m)
        p = rng.uniform(-1.0, 1.0, m)
        a, b = ad.jet2(f, p), ad.fd_jet2(f, p)
        worst = max(worst, rel_err(b.gradient, a.gradient), rel_err(b.hessian, a.hessian))
    assert worst <= 1e-5


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_product_rule_property(p):
    f = lambda u: ad.sin(u[0]) * ad.exp(0.5 * u[1]) + u[2] ** 2 * u[0]
    g = lambda u: ad.cos(u[1]) + u[2]
    jf, jg = ad.jet2(f, p), ad.jet2(g, p)
    jfg = ad.jet2(lambda u: f(u) * g(u), p)
    expect_h = jf.hessian * jg.value + np.outer(jf.gradient, jg.gradient) \
        + np.outer(jg.gradient, jf.gradient) + jf.value * jg.hessian
    assert np.allclose(jfg.hessian, expect_h, atol=1e-12)
    assert np.allclose(jfg.gradient, jf.gradient * jg.value + jf.value * jg.gradient, atol=1e-12)


def test_constant_function_has_zero_derivatives():
    j = ad.jet2(lambda u: 4.0, [1.0, 2.0])
    assert j.value == 4.0 and not j.gradient.any() and not j.hessian.any()
