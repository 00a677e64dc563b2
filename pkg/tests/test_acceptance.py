"""Acceptance suite: twelve criteria, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from conftest import random_composition, rel_err
from stationary_finsler import ad, load_zoo, zoo_names
from stationary_finsler.causality import DistanceGrid, ball_boundary, chronological_set, finsler_distance
from stationary_finsler.fermat import (
    classify_causal,
    fermat_hypotheses,
    legendre_hypotheses,
    legendre_invert,
    legendre_map,
    optical_metrics,
    verify_finsler,
)
from stationary_finsler.geodesics import (
    conserved_quantities,
    lightlike_correspondence_check,
    spacetime_geodesic_ivp,
)
from stationary_finsler.killing import (
    contraction_gap,
    killing_residual,
    static_conditions_check,
    time_dilation,
    time_translation,
)
from stationary_finsler.tensor import check_index1_region, fundamental_tensor
from stationary_finsler.types import ConeKind
from stationary_finsler.zoo import sample_base, sample_pairs

GOLDEN = (1 + math.sqrt(5)) / 2
SOLVER_TOL = 1e-10


_capture = {}


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    _capture["capsys"] = capsys
    yield
    _capture.clear()


def report(number, ok, detail):
    line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    capsys = _capture.get("capsys")
    if capsys is None:
        print(line, flush=True)
    else:
        with capsys.disabled():
            print("\n" + line, flush=True)
    assert ok, line


def splittings():
    return [k for k in zoo_names() if load_zoo(k).is_splitting]


def optical_for_cone(L):
    """The optical metric whose Finsler property the cone relies on."""
    pair = optical_metrics(L)
    if L.cone.kind is ConeKind.LOWER_HALF:
        return pair.f_b_minus, "past"
    return pair.f_b, "future"


def test_criterion_01_homogeneity():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_l = worst_g = 0.0
    for name in zoo_names():
        L = load_zoo(name)
        Z, W = sample_pairs(L, rng, 1000)
        lams = rng.uniform(1e-3, 10.0, 1000)
        for z, w, lam in zip(Z, W, lams):
            ref = lam * lam * L(z, w)
            worst_l = max(worst_l, abs(L(z, lam * w) - ref) / (1.0 + abs(ref)))
            g1 = fundamental_tensor(L, z, w).entries
            g2 = fundamental_tensor(L, z, lam * w).entries
            worst_g = max(worst_g, float(np.max(np.abs(g2 - g1))) / max(1.0, float(np.max(np.abs(g1)))))
    elapsed = time.perf_counter() - start
    ok = worst_l <= 1e-9 and worst_g <= 1e-9 and elapsed < 5.0
    report(1, ok, f"L residual {worst_l:.2e}, tensor residual {worst_g:.2e}, {elapsed:.2f} s "
                  f"for {len(zoo_names())} entries x 1000 samples")


def test_criterion_02_autodiff_oracle():
    rng = np.random.default_rng(102)
    worst_comp = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 5))
        f = random_composition(rng, m)
        p = rng.uniform(-1.0, 1.0, m)
        a, b = ad.jet2(f, p), ad.fd_jet2(f, p)
        worst_comp = max(worst_comp, rel_err(b.gradient, a.gradient), rel_err(b.hessian, a.hessian))
    worst_zoo, where = 0.0, ""
    for name in zoo_names():
        L = load_zoo(name)
        Z, W = sample_pairs(L, rng, 10)
        m = L.n + 1
        for z, w in zip(Z, W):
            f = lambda u: L.value(u[:m], u[m:])
            p = np.concatenate([z, w])
            a, b = ad.jet2(f, p), ad.fd_jet2(f, p)
            e = max(rel_err(b.gradient, a.gradient), rel_err(b.hessian, a.hessian))
            if e > worst_zoo:
                worst_zoo, where = e, name
    ok = worst_comp <= 1e-5 and worst_zoo <= 1e-5
    report(2, ok, f"compositions {worst_comp:.2e}, zoo Lagrangians {worst_zoo:.2e} (worst: {where})")


def test_criterion_03_index_one():
    rng = np.random.default_rng(103)
    fractions = {}
    cases = {
        "flat_randers": {}, "standard_stationary": {},
        "randers_variation(+)": {"sign": 1}, "randers_variation(-)": {"sign": -1},
    }
    for label, params in cases.items():
        L = load_zoo(label.split("(")[0], params)
        rep = check_index1_region(L, rng, samples=1000, b_samples=2000)
        fractions[label] = rep.index1_fraction if rep.consistent else -1.0
    ind = check_index1_region(load_zoo("indefinite_b"), rng, samples=200, b_samples=2000)
    witness = ind.ladder_counterexample
    ok = all(f == 1.0 for f in fractions.values()) and witness is not None and witness[1][0] >= 10
    wtxt = (f"witness at tau={witness[1][0]:g} with signature {witness[2].as_tuple()}"
            if witness else "no witness")
    report(3, ok, "index-1 fractions " + ", ".join(f"{k}={v:.3f}" for k, v in fractions.items())
           + f"; indefinite B: {ind.semidefinite.verdict}, {wtxt}")


def test_criterion_04_killing():
    rng = np.random.default_rng(104)
    worst_stationary, perturbed, worst_gap = 0.0, math.inf, 0.0
    for name in zoo_names():
        L = load_zoo(name)
        Z, W = sample_pairs(L, rng, 200)
        rep = killing_residual(time_translation(L.n), L, Z, W)
        if L.time_independent:
            worst_stationary = max(worst_stationary, rep.worst_relative)
        else:
            perturbed = min(perturbed, rep.worst)
        for K in (time_translation(L.n), time_dilation(L.n)):
            for z, w in zip(Z[:10], W[:10]):
                scale = max(1.0, abs(L(z, w)))
                worst_gap = max(worst_gap, contraction_gap(K, L, z, w) / scale)
    ok = worst_stationary <= 1e-10 and perturbed > 1e-3 and worst_gap <= 1e-8
    report(4, ok, f"d/dt residual {worst_stationary:.2e} on stationary entries, "
                  f"{perturbed:.3g} on the time-perturbed entry, contraction gap {worst_gap:.2e}")


def test_criterion_05_static_characterization():
    rng = np.random.default_rng(105)
    static = static_conditions_check(time_translation(3), load_zoo("static_b0"), rng, samples=30)
    twisted = static_conditions_check(time_translation(3), load_zoo("twisted_oneform"), rng, samples=30)
    ok = (max(static.cond_b, static.cond_c, static.frobenius) <= 1e-8
          and max(twisted.cond_b, twisted.cond_c) <= 1e-8 and twisted.frobenius > 1e-3)
    report(5, ok, f"B=0: (b) {static.cond_b:.1e} (c) {static.cond_c:.1e} Frobenius {static.frobenius:.1e}; "
                  f"B=x2 dx1: (b) {twisted.cond_b:.1e} (c) {twisted.cond_c:.1e} "
                  f"Frobenius {twisted.frobenius:.3g}")


def test_criterion_06_fermat_metrics():
    rng = np.random.default_rng(106)
    min_eigs, skipped, worst_pair, worst_light = {}, [], 0.0, 0.0
    for name in splittings():
        L = load_zoo(name)
        F, which = optical_for_cone(L)
        hyp = fermat_hypotheses(L, rng)
        if hyp.failed(which):
            skipped.append(name)
        else:
            min_eigs[name] = verify_finsler(F, L, rng, samples=1000, requires=which, hypotheses=hyp).min_eig
        pair = optical_metrics(L)
        for z, w in zip(*sample_pairs(L, rng, 1000)):
            x, v = z[1:], w[1:]
            fb, fbm, g = pair.f_b.at(x, v), pair.f_b_minus.at(x, v), pair.g_aux.at(x, v)
            lam, b = L.lam_at(x), L.b_at(x, v)
            scale = max(1.0, lam * fb ** 2, abs(L.f2_at(x, v)))
            worst_pair = max(worst_pair, abs(lam * fb - b - g) / scale, abs(lam * fbm + b - g) / scale)
            worst_light = max(worst_light, abs(L(z, np.concatenate([[fb], v]))) / scale,
                              abs(L(z, np.concatenate([[-fbm], v]))) / scale)
    ok = min(min_eigs.values()) > 0 and worst_pair <= 1e-10 and worst_light <= 1e-9
    report(6, ok, f"min eigenvalue {min(min_eigs.values()):.3g} over {len(min_eigs)} qualifying entries "
                  f"(not qualifying: {', '.join(skipped)}); pair identity {worst_pair:.1e}; "
                  f"lightlike identity {worst_light:.1e}")


def test_criterion_07_isocausality():
    rng = np.random.default_rng(107)
    total, disagreements, kinds = 0, 0, set()
    for name in splittings():
        L = load_zoo(name)
        pair = optical_metrics(L)
        Z, W = sample_pairs(L, rng, 10_000)
        # also probe the light cone itself
        W[::10, 0] = [pair.f_b.at(z[1:], w[1:]) for z, w in zip(Z[::10], W[::10])]
        for z, w in zip(Z, W):
            try:
                kinds.add(classify_causal(L, z, w, pair).kind)
            except Exception:
                disagreements += 1
            total += 1
    ok = disagreements == 0
    report(7, ok, f"{disagreements} disagreements in {total} vectors "
                  f"({len(splittings())} entries; classes seen: {sorted(k.value for k in kinds)})")


def test_criterion_08_conservation():
    runs = [
        ("flat_randers", [0, 0, 0], [GOLDEN, 1, 0]),
        ("flat_randers", [0, 0, 0], [2.0, 0.3, 0.4]),
        ("standard_stationary", [0, 0.3, -0.2], [1.5, 0.5, 0.2]),
        ("standard_stationary", [0, 0.3, -0.2], [0.2, 0.9, -0.6]),
        ("randers_variation", [0, 0.1, 0.1], [2.0, 0.6, -0.4]),
        ("static_b0", [0, 0.1, 0.2, 0.3], [1.4, 0.3, 0.1, -0.2]),
        ("twisted_oneform", [0, 0.1, 0.2, 0.3], [1.4, 0.3, 0.1, -0.2]),
    ]
    worst, where = 0.0, ""
    for name, z0, w0 in runs:
        L = load_zoo(name)
        summ = conserved_quantities(spacetime_geodesic_ivp(L, z0, w0, (0, 50), SOLVER_TOL), L)
        if summ.relative_drift > worst:
            worst, where = summ.relative_drift, name
    kerr = load_zoo("kerr_perturbation")
    z0, v0 = [0.0, 6.0, math.pi / 2, 0.0], [0.3, 0.0, 0.05]
    w0 = [optical_metrics(kerr).f_b.at(z0[1:], v0), *v0]
    start = time.perf_counter()
    tr = spacetime_geodesic_ivp(kerr, z0, w0, (0, 50), SOLVER_TOL)
    elapsed = time.perf_counter() - start
    ks = conserved_quantities(tr, kerr)
    ok = worst <= 10 * SOLVER_TOL and ks.relative_drift <= 10 * SOLVER_TOL and elapsed < 10.0
    report(8, ok, f"worst relative drift {worst:.1e} ({where}); Kerr lightlike drift "
                  f"{ks.relative_drift:.1e} in {elapsed:.2f} s")


def test_criterion_09_fermat_correspondence():
    flat = lightlike_correspondence_check(load_zoo("flat_randers"), [0, 0, 0], [1.0, 0.0], (0, 3))
    kerr = lightlike_correspondence_check(load_zoo("kerr_perturbation"), [0.0, 6.0, math.pi / 2, 0.0],
                                          [0.3, 0.0, 0.05], (0, 20))
    past = lightlike_correspondence_check(load_zoo("randers_variation", {"sign": -1}), [0, 0.1, 0.1],
                                          [0.7, 0.3], (0, 20))
    decreasing = bool(np.all(np.diff(past.base.theta) < 0))
    ok = (flat.gap <= 1e-9 and flat.theta_residual <= 1e-9 and kerr.gap <= 1e-5
          and past.gap <= 1e-5 and past.theta_residual <= 1e-5 and decreasing)
    report(9, ok, f"flat gap {flat.gap:.1e}, theta {flat.theta_residual:.1e}; Kerr gap {kerr.gap:.1e}; "
                  f"past run gap {past.gap:.1e}, theta {past.theta_residual:.1e}, "
                  f"time decreasing {decreasing}")


def test_criterion_10_distance_oracle():
    F = optical_metrics(load_zoo("flat_randers")).f_b
    box = ((-2.0, 2.0), (-2.0, 2.0))
    fwd = finsler_distance(F, [0, 0], [1, 0])
    back = finsler_distance(F, [1, 0], [0, 0])
    errs = {}
    for order in (1, 2):
        g = DistanceGrid(F, box, resolution=200, order=order)
        errs[order] = max(abs(g.distance([0, 0], [1, 0]) - GOLDEN) / GOLDEN,
                          abs(g.distance([1, 0], [0, 0]) - (GOLDEN - 1)) / (GOLDEN - 1))
    ok = (abs(fwd - 1.618034) <= 1e-6 and abs(back - 0.618034) <= 1e-6
          and errs[1] <= 0.02 and errs[2] <= 0.01)
    report(10, ok, f"shooting {fwd:.7f} / {back:.7f}; grid 200^2 relative error "
                   f"{errs[1]:.1e} (order 1), {errs[2]:.1e} (order 2)")


def test_criterion_11_chronological_sets():
    L = load_zoo("flat_randers")
    pair = optical_metrics(L)
    chrono = chronological_set(L, [0, 0, 0], [1.0], n_dirs=128)
    t, ball = chrono.slices[0]
    px = ball.points[np.argmin(np.abs(ball.angles))][0]
    mx = ball.points[np.argmin(np.abs(np.abs(ball.angles) - math.pi))][0]
    rng = np.random.default_rng(111)
    disagreements = 0
    for _ in range(1000):
        x = rng.uniform(-2.0, 2.0, 2)
        # straight segment from p0 to (1, x) has velocity (1, x): timelike future iff 1 > F_B(x)
        if chrono.contains([1.0, *x]) != (1.0 > pair.f_b.at([0, 0], x)):
            disagreements += 1
    ok = t == 1.0 and abs(px - 0.618034) <= 1e-4 and abs(mx + 1.618034) <= 1e-4 and disagreements == 0
    report(11, ok, f"slice t={t:g}: +x extent {px:.6f}, -x extent {-mx:.6f}; "
                   f"{disagreements} membership disagreements in 1000")


def test_criterion_12_legendre_roundtrip():
    rng = np.random.default_rng(112)
    entries = {
        "flat_randers n=2": load_zoo("flat_randers"),
        "flat_randers n=3": load_zoo("flat_randers", {"n": 3}),
        "standard_stationary": load_zoo("standard_stationary"),
        "randers_variation": load_zoo("randers_variation"),
        "rutz": load_zoo("rutz"),
        "static_b0": load_zoo("static_b0"),
        "twisted_oneform": load_zoo("twisted_oneform"),
    }
    alpha = -1.0
    worst, flags = {}, {}
    for label, L in entries.items():
        x = sample_base(L, rng, 1)[0]
        assert legendre_hypotheses(alpha, L, x).holds, label
        w = 0.0
        for _ in range(100):
            v = rng.normal(size=L.n)
            if L.domain is not None and not L.domain(x, np.concatenate([[1.0], v]), 1e-3):
                continue
            inv = legendre_invert(alpha, L, x, legendre_map(alpha, L, x, v, check=False), check=False)
            w = max(w, float(np.linalg.norm(inv.v - v) / np.linalg.norm(v)))
            flags[label] = inv.global_bijectivity
        worst[label] = w
    # the quartic-root Kerr F is not strongly convex: its energy Hessian degenerates on coordinate axes
    kerr = load_zoo("kerr_perturbation")
    xk = [6.0, 1.2, 0.0]
    hk = ad.jet2(lambda vs: 0.5 * kerr.f2(xk, vs), [1.0, 1e-8, 1e-8]).hessian
    kerr_degenerate = float(np.linalg.eigvalsh(hk)[0]) <= 1e-8 * float(np.max(np.abs(hk)))
    ok = max(worst.values()) <= 1e-9 and flags["flat_randers n=2"] is False \
        and flags["flat_randers n=3"] is True and kerr_degenerate
    report(12, ok, f"worst roundtrip {max(worst.values()):.1e} over {len(worst)} qualifying entries; "
                   f"n=2 global-bijectivity flag {flags['flat_randers n=2']}, n=3 flag "
                   f"{flags['flat_randers n=3']}; Kerr excluded (degenerate energy Hessian: {kerr_degenerate})")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
