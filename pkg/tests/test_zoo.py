import math

import numpy as np
import pytest

from stationary_finsler import load_zoo, zoo_names
from stationary_finsler.errors import NonPositiveLambda, ParamOutOfRange, UnknownZooEntry
from stationary_finsler.lagrangian import (
    constant_field,
    euclidean_f2,
    make_stationary_splitting,
    one_form,
)
from stationary_finsler.types import FULL, ConeKind
from stationary_finsler.zoo import sample_base, sample_pairs


def schwarzschild_quadratic(M, z, w):
    r, th = z[1], z[2]
    f = 1.0 - 2.0 * M / r
    tau, vr, vt, vp = w
    return -f * tau ** 2 + vr ** 2 / f + r ** 2 * (vt ** 2 + math.sin(th) ** 2 * vp ** 2)


SPLITTINGS = [k for k in zoo_names() if load_zoo(k).is_splitting]


def test_flat_randers_timelike_value():
    L = load_zoo("flat_randers")
    assert L([0, 0, 0], [2, 1, 0]) == pytest.approx(-1.0, abs=1e-15)


def test_flat_randers_spacelike_value():
    L = load_zoo("flat_randers")
    assert L([0, 0, 0], [1, 1, 0]) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("name", zoo_names())
def test_zero_vector_has_zero_value(name, rng):
    L = load_zoo(name)
    z = np.concatenate([[0.3], sample_base(L, rng, 1)[0]])
    assert L(z, np.zeros(L.n + 1)) == 0.0


def test_kerr_static_value():
    L = load_zoo("kerr_perturbation", {"M": 1.0, "a": 0.5})
    assert L([0.0, 4.0, math.pi / 2, 0.0], [1.0, 0.0, 0.0, 0.0]) == pytest.approx(-0.5, abs=1e-14)


def test_kerr_without_rotation_has_no_cross_term(rng):
    L = load_zoo("kerr_perturbation", {"a": 0.0})
    for x in sample_base(L, rng, 20):
        assert L.b_at(x, [0.3, -0.2, 1.0]) == 0.0


def test_kerr_rejects_overspinning():
    with pytest.raises(ParamOutOfRange):
        load_zoo("kerr_perturbation", {"M": 1.0, "a": 1.5})


def test_kerr_accepts_profile_expressions():
    L = load_zoo("kerr_perturbation", {"psi0": "0.01/r^2"})
    base = load_zoo("kerr_perturbation")
    z, w = [0.0, 5.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]
    assert L(z, w) - base(z, w) == pytest.approx(-0.01 / 25.0, abs=1e-15)


def test_rutz_without_deformation_is_schwarzschild(rng):
    L = load_zoo("rutz", {"epsilon": 0.0, "M": 1.0})
    Z, W = sample_pairs(L, rng, 200)
    for z, w in zip(Z, W):
        expect = schwarzschild_quadratic(1.0, z, w)
        assert L(z, w) == pytest.approx(expect, rel=1e-13, abs=1e-13)


def test_rutz_cone_follows_sign_of_deformation():
    assert load_zoo("rutz", {"epsilon": 0.5}).cone.kind is ConeKind.UPPER_HALF
    assert load_zoo("rutz", {"epsilon": -0.5}).cone.kind is ConeKind.LOWER_HALF


@pytest.mark.parametrize("name", zoo_names())
def test_homogeneity(name, rng):
    L = load_zoo(name)
    Z, W = sample_pairs(L, rng, 1000)
    lams = rng.uniform(1e-6, 10.0, 1000)
    worst = 0.0
    for z, w, lam in zip(Z, W, lams):
        ref = lam * lam * L(z, w)
        worst = max(worst, abs(L(z, lam * w) - ref) / (1.0 + abs(ref)))
    assert worst <= 1e-9


@pytest.mark.parametrize("name", SPLITTINGS)
def test_continuity_across_time_axis(name, rng):
    L = load_zoo(name)
    x = sample_base(L, rng, 1)[0]
    z = np.concatenate([[0.0], x])
    v = rng.normal(size=L.n)
    lam = L.lam_at(x)
    for tau in (1.0, -1.0):
        gaps = [abs(L(z, np.concatenate([[tau], s * v])) + lam * tau * tau) for s in (1e-2, 1e-4, 1e-6)]
        assert gaps[-1] <= 1e-5
        assert gaps[2] <= gaps[0]


@pytest.mark.parametrize("name", SPLITTINGS)
def test_reference_field_is_timelike(name, rng):
    L = load_zoo(name)
    for z in np.column_stack([rng.uniform(-3, 3, 50), sample_base(L, rng, 50)]):
        w = np.zeros(L.n + 1)
        w[0] = L.y_field_sign
        assert L(z, w) == pytest.approx(-L.lam_at(z[1:]), rel=1e-14)
        assert L(z, w) < 0


def test_unknown_entry():
    with pytest.raises(UnknownZooEntry):
        load_zoo("minkowski_plus")


@pytest.mark.parametrize("params", [{"b": 20.0}, {"n": 1.5}, {"bogus": 1}, {"b": "abc"}])
def test_param_validation(params):
    with pytest.raises(ParamOutOfRange):
        load_zoo("flat_randers", params)


def test_non_positive_lambda_is_reported():
    L = make_stationary_splitting(
        lambda x: 1.0 - x[0], one_form(lambda x: [0.0, 0.0]), euclidean_f2(), FULL, 2)
    with pytest.raises(NonPositiveLambda):
        L([0, 2.0, 0.0], [1.0, 1.0, 0.0])


def test_constant_builders_evaluate_formula():
    L = make_stationary_splitting(constant_field(2.0), one_form(lambda x: [0.25, -1.0]),
                                  euclidean_f2(), FULL, 2)
    tau, v = 1.5, np.array([0.4, 0.7])
    expect = -2.0 * tau ** 2 + 2.0 * (0.25 * v[0] - v[1]) * tau + v @ v
    assert L([0, 0, 0], [tau, *v]) == pytest.approx(expect, abs=1e-15)
