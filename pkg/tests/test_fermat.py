import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stationary_finsler import ad, load_zoo, zoo_names
from stationary_finsler.errors import HypothesisViolated, ZeroVector
from stationary_finsler.fermat import (
    CausalKind,
    Orientation,
    classify_causal,
    fermat_hypotheses,
    legendre_invert,
    legendre_map,
    optical_metrics,
    optical_table,
    reduced_lagrangian,
    static_lagrangians,
    verify_finsler,
)
from stationary_finsler.lagrangian import constant_field, euclidean_f2, make_stationary_splitting, zero_form
from stationary_finsler.types import FULL
from stationary_finsler.zoo import sample_base, sample_pairs

GOLDEN = (1 + math.sqrt(5)) / 2
SPLITTINGS = [k for k in zoo_names() if load_zoo(k).is_splitting]
FINSLER_OK = ["flat_randers", "standard_stationary", "kerr_perturbation", "rutz", "randers_variation"]


def euclidean_static(lam=1.0, n=2):
    return make_stationary_splitting(constant_field(lam), zero_form(), euclidean_f2(), FULL, n)


def test_flat_randers_optical_values():
    pair = optical_metrics(load_zoo("flat_randers"))
    x, v = [0.0, 0.0], [1.0, 0.0]
    assert pair.g_aux.at(x, v) == pytest.approx(math.sqrt(1.25), abs=1e-15)
    assert pair.f_b.at(x, v) == pytest.approx(GOLDEN, abs=1e-15)
    assert pair.f_b_minus.at(x, v) == pytest.approx(GOLDEN - 1, abs=1e-15)


def test_optical_metrics_vanish_at_zero():
    pair = optical_metrics(load_zoo("flat_randers"))
    for F in (pair.f_b, pair.f_b_minus, pair.g_aux):
        assert F.at([0.3, 0.1], [0.0, 0.0]) == 0.0


def test_no_one_form_gives_f_over_root_lambda(rng):
    # Lambda = 4, F Euclidean: both optical metrics equal F / sqrt(Lambda)
    pair = optical_metrics(euclidean_static(4.0))
    for v in rng.normal(size=(20, 2)):
        f = float(np.linalg.norm(v))
        assert pair.f_b.at([0, 0], v) == pytest.approx(f / 2.0, rel=1e-14)
        assert pair.f_b_minus.at([0, 0], v) == pytest.approx(f / 2.0, rel=1e-14)


def test_unit_lambda_no_one_form_gives_f(rng):
    pair = optical_metrics(euclidean_static(1.0))
    for v in rng.normal(size=(20, 2)):
        assert pair.f_b.at([0, 0], v) == pytest.approx(np.linalg.norm(v), rel=1e-14)


@pytest.mark.parametrize("name", SPLITTINGS)
def test_lightlike_solutions_and_pair_identity(name, rng):
    L = load_zoo(name)
    pair = optical_metrics(L)
    for z, w in zip(*sample_pairs(L, rng, 100)):
        x, v = z[1:], w[1:]
        fb, fbm, g = pair.f_b.at(x, v), pair.f_b_minus.at(x, v), pair.g_aux.at(x, v)
        lam, b = L.lam_at(x), L.b_at(x, v)
        scale = max(1.0, lam * fb ** 2, abs(L.f2_at(x, v)))
        assert abs(lam * fb - b - g) <= 1e-10 * scale
        assert abs(lam * fbm + b - g) <= 1e-10 * scale
        assert abs(L(z, np.concatenate([[fb], v]))) <= 1e-9 * scale
        assert abs(L(z, np.concatenate([[-fbm], v]))) <= 1e-9 * scale


@pytest.mark.parametrize("name", ["flat_randers", "randers_variation", "standard_stationary"])
def test_triangle_inequality(name, rng):
    L = load_zoo(name)
    F = optical_metrics(L).f_b
    x = sample_base(L, rng, 1)[0]
    U, V = rng.normal(size=(10_000, 2)), rng.normal(size=(10_000, 2))
    worst = max(F.at(x, u + v) - F.at(x, u) - F.at(x, v) for u, v in zip(U, V))
    assert worst <= 1e-9


def test_flat_randers_is_finsler(rng):
    L = load_zoo("flat_randers")
    rep = verify_finsler(optical_metrics(L).f_b, L, rng, samples=1000, requires="future")
    assert rep.passed and rep.min_eig > 0


@pytest.mark.parametrize("name", FINSLER_OK)
def test_g_is_finsler(name, rng):
    L = load_zoo(name)
    assert verify_finsler(optical_metrics(L).g_aux, L, rng, samples=200).passed


def test_euclidean_energy_hessian_is_identity(rng):
    L = euclidean_static()
    F = optical_metrics(L).f_b
    for v in rng.normal(size=(20, 2)):
        h = ad.jet2(lambda vs: 0.5 * F([0.0, 0.0], vs) ** 2, v).hessian
        assert np.allclose(h, np.eye(2), atol=1e-12)


def test_indefinite_b_violates_hypotheses(rng):
    L = load_zoo("indefinite_b")
    with pytest.raises(HypothesisViolated) as exc:
        verify_finsler(optical_metrics(L).f_b, L, rng, requires="future")
    assert "positive semi-definite" in str(exc.value)


def test_hypotheses_of_randers_variations(rng):
    up = fermat_hypotheses(load_zoo("randers_variation", {"sign": 1}), rng)
    down = fermat_hypotheses(load_zoo("randers_variation", {"sign": -1}), rng)
    assert up.future and not up.past
    assert down.past and not down.future


def test_static_lagrangian_values():
    LB, LBm = static_lagrangians(optical_metrics(load_zoo("flat_randers")))
    z = [0.0, 0.0, 0.0]
    assert LB(z, [2.0, 1.0, 0.0]) == pytest.approx(-4 + GOLDEN ** 2, abs=1e-14)
    assert LB(z, [2.0, 1.0, 0.0]) == pytest.approx(-1.38197, abs=1e-5)
    assert LB(z, [GOLDEN, 1.0, 0.0]) == pytest.approx(0.0, abs=1e-14)
    assert LB(z, [0.0, 0.0, 0.0]) == 0.0
    assert LBm(z, [-(GOLDEN - 1), 1.0, 0.0]) == pytest.approx(0.0, abs=1e-14)


def test_classify_examples():
    L = load_zoo("flat_randers")
    z = [0.0, 0.0, 0.0]
    c = classify_causal(L, z, [2.0, 1.0, 0.0])
    assert (c.kind, c.orientation) == (CausalKind.TIMELIKE, Orientation.FUTURE)
    c = classify_causal(L, z, [GOLDEN, 1.0, 0.0])
    assert (c.kind, c.orientation) == (CausalKind.LIGHTLIKE, Orientation.FUTURE)
    c = classify_causal(L, z, [1.0, 1.0, 0.0])
    assert (c.kind, c.orientation) == (CausalKind.SPACELIKE, Orientation.NONE)
    c = classify_causal(L, z, [-1.0, 0.5, 0.0])
    assert (c.kind, c.orientation) == (CausalKind.TIMELIKE, Orientation.PAST)
    assert classify_causal(L, z, [0.0, 0.0, 0.0]).kind is CausalKind.ZERO


@pytest.mark.parametrize("name", SPLITTINGS)
def test_classifications_agree(name, rng):
    L = load_zoo(name)
    pair = optical_metrics(L)
    Z, W = sample_pairs(L, rng, 2000)
    counts = {}
    for z, w in zip(Z, W):
        c = classify_causal(L, z, w, pair)  # raises on disagreement
        counts[c.kind] = counts.get(c.kind, 0) + 1
    assert len(counts) >= 2


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_classification_matches_sign_of_l(tau, v1, v2):
    L = load_zoo("flat_randers")
    w = [tau, v1, v2]
    c = classify_causal(L, [0, 0, 0], w)
    val = L([0, 0, 0], w)
    tol = 1e-10 * max(1.0, tau * tau, v1 * v1 + v2 * v2)
    if val < -10 * tol:
        assert c.kind is CausalKind.TIMELIKE
    elif val > 10 * tol:
        assert c.kind is CausalKind.SPACELIKE


def test_legendre_identity_case(rng):
    L = euclidean_static()
    for v in rng.normal(size=(10, 2)):
        assert np.allclose(legendre_map(0.0, L, [0, 0], v), v, atol=1e-14)
        assert np.allclose(legendre_invert(0.0, L, [0, 0], v).v, v, atol=1e-12)


def test_legendre_map_matches_fd():
    L = load_zoo("flat_randers")
    h = reduced_lagrangian(-1.0, L)
    v = np.array([1.0, 0.0])
    fd = ad.fd_jet2(lambda vs: h([0.0, 0.0], vs), v).gradient
    assert np.max(np.abs(legendre_map(-1.0, L, [0.0, 0.0], v) - fd)) <= 1e-6


def test_legendre_map_degree_bookkeeping(rng):
    L = load_zoo("randers_variation")
    alpha = -0.7
    x = np.array([0.4, -0.3])
    lam = L.lam_at(x)
    pair = optical_metrics(L)
    for v in rng.normal(size=(10, 2)):
        for s in (0.5, 3.0):
            db = ad.jet2(lambda vs: L.b(list(x), vs), v).gradient
            dg2 = ad.jet2(lambda vs: pair.g_aux(list(x), vs) ** 2, v).gradient
            expect = -(alpha / lam) * db + s * dg2 / (2 * lam)
            assert np.allclose(legendre_map(alpha, L, x, s * v), expect, atol=1e-10)


def test_legendre_roundtrip(rng):
    L = load_zoo("flat_randers")
    worst = 0.0
    for v in rng.normal(size=(100, 2)):
        p = legendre_map(-1.0, L, [0.0, 0.0], v)
        inv = legendre_invert(-1.0, L, [0.0, 0.0], p)
        worst = max(worst, np.linalg.norm(inv.v - v) / np.linalg.norm(v))
    assert worst <= 1e-9
    assert inv.global_bijectivity is False


def test_legendre_three_dimensional_flag():
    L = load_zoo("flat_randers", {"n": 3})
    inv = legendre_invert(-1.0, L, [0, 0, 0], [1.0, 0.2, 0.3])
    assert inv.global_bijectivity


def test_legendre_rejects_zero_and_bad_hypotheses():
    with pytest.raises(ZeroVector):
        legendre_map(-1.0, load_zoo("flat_randers"), [0, 0], [0.0, 0.0])
    with pytest.raises(HypothesisViolated):
        legendre_map(-1.0, load_zoo("indefinite_b"), [0.1, 0.2], [1.0, 0.3])


def test_broken_extremal_corner_forces_smoothness(rng):
    # matching momenta on both sides of a corner give the same velocity
    L = load_zoo("randers_variation")
    alpha = -1.2
    x = np.array([0.2, 0.5])
    for _ in range(20):
        v_left = rng.normal(size=2)
        p = legendre_map(alpha, L, x, v_left)
        v_right = legendre_invert(alpha, L, x, p).v
        assert np.linalg.norm(v_right - v_left) <= 1e-9 * np.linalg.norm(v_left)
        # a genuine corner has different momenta
        kink = v_left + 0.3 * rng.normal(size=2)
        assert np.linalg.norm(legendre_map(alpha, L, x, kink) - p) > 1e-6


def test_optical_table_columns():
    rows = optical_table(optical_metrics(load_zoo("flat_randers")), [0.0, 0.0], n_dirs=8)
    assert len(rows) == 8
    assert rows[0][1] == pytest.approx(GOLDEN)
    assert rows[4][1] == pytest.approx(GOLDEN - 1)
