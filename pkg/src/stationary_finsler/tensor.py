"""Fundamental tensor, eigenvalue signatures and index-1 region checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ad
from .lagrangian import fiber_jet
from .parallel import pmap
from .types import ConeKind, SymBilinear, as_array
from .zoo import sample_base, sample_pairs

LINEAR = "Linear"
PSD = "PositiveSemiDef"
NSD = "NegativeSemiDef"
INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class Signature:
    n_neg: int
    n_zero: int
    n_pos: int
    tol: float = 1e-8

    def as_tuple(self):
        return (self.n_neg, self.n_zero, self.n_pos)

    @property
    def lorentzian(self):
        return self.n_neg == 1 and self.n_zero == 0


def fundamental_tensor(L, z, w):
    """Half the fiber Hessian of ``L`` at ``(z, w)``; ``w`` must lie in the cone."""
    L.require(z, w)
    if L.is_splitting and L.time_independent:
        return SymBilinear(_splitting_tensor(L, z, w))
    return SymBilinear(0.5 * fiber_jet(L, z, w).hessian)


def _splitting_tensor(L, z, w):
    """Block form ``[[-Lam, dB], [dB, tau d2B + d2F^2/2]]`` from jets over ``v`` only."""
    z, w = as_array(z), as_array(w)
    x = list(z[1:])
    tau, v = float(w[0]), w[1:]
    if L.b.coefficients is not None:
        db = np.array([ad.value_of(c) for c in L.b.coefficients(x)], dtype=float)
        block = 0.0
    else:
        jb = ad.jet2(lambda vs: L.b(x, vs), v)
        db, block = jb.gradient, tau * jb.hessian
    if L.f2.coefficients is not None:
        gram = np.array([[ad.value_of(c) for c in row] for row in L.f2.coefficients(x)], dtype=float)
        block = block + 0.5 * (gram + gram.T)
    else:
        block = block + 0.5 * ad.jet2(lambda vs: L.f2(x, vs), v).hessian
    m = v.size + 1
    g = np.empty((m, m))
    g[0, 0] = -L.lam_at(x)
    g[0, 1:] = db
    g[1:, 0] = db
    g[1:, 1:] = block
    return g


def signature_of(m, tol=1e-8):
    a = m.entries if isinstance(m, SymBilinear) else np.asarray(m, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (a + a.T))
    s = max(1.0, float(np.max(np.abs(eig)))) if eig.size else 1.0
    thr = tol * s
    return Signature(int(np.sum(eig < -thr)), int(np.sum(np.abs(eig) <= thr)),
                     int(np.sum(eig > thr)), tol)


# semidefiniteness of the fiber Hessian of B -----------------------------------

@dataclass
class SemidefiniteReport:
    verdict: str
    samples_checked: int
    witness: Optional[tuple] = None  # (x, v, u) with Hess B_v(u, u) of the minority sign
    min_eig: float = 0.0
    max_eig: float = 0.0


def b_hessian(L, x, v):
    x = list(as_array(x))
    return ad.jet2(lambda vs: L.b(x, vs), v).hessian


def _sample_unit_v(L, x, rng):
    for _ in range(10000):
        v = rng.normal(size=L.n)
        v /= np.linalg.norm(v)
        if L.plane_guard and np.min(np.abs(v)) < L.plane_guard:
            continue
        if L.domain is not None:
            tau = 1.0 if L.cone.kind is not ConeKind.LOWER_HALF else -1.0
            if not L.domain(x, np.concatenate([[tau], v]), 1e-3):
                continue
        return v
    raise RuntimeError("could not sample a unit vector")


def semidefinite_report(L, rng, samples=10_000, tol=1e-10, linear_tol=1e-12, threads=None):
    """Sampled sign of the fiber Hessian of ``B`` over the base sample box."""
    xs = sample_base(L, rng, samples)
    vs = [_sample_unit_v(L, x, rng) for x in xs]
    hs = pmap(lambda i: b_hessian(L, xs[i], vs[i]), range(samples), threads)
    lo, hi, norm = np.inf, -np.inf, 0.0
    arg_lo = arg_hi = 0
    eigs = []
    for i, h in enumerate(hs):
        e, u = np.linalg.eigh(h)
        eigs.append((e, u))
        norm = max(norm, float(np.max(np.abs(e))))
        if e[0] < lo:
            lo, arg_lo = float(e[0]), i
        if e[-1] > hi:
            hi, arg_hi = float(e[-1]), i
    scale = 1.0
    if norm <= linear_tol * scale:
        return SemidefiniteReport(LINEAR, samples, None, lo, hi)
    if lo >= -tol * scale:
        return SemidefiniteReport(PSD, samples, None, lo, hi)
    if hi <= tol * scale:
        return SemidefiniteReport(NSD, samples, None, lo, hi)
    # both signs occur: report the direction against the cone's expected sign
    if L.cone.kind is ConeKind.LOWER_HALF:
        i, u = arg_hi, eigs[arg_hi][1][:, -1]
    else:
        i, u = arg_lo, eigs[arg_lo][1][:, 0]
    return SemidefiniteReport(INDEFINITE, samples, (xs[i].copy(), vs[i].copy(), u.copy()), lo, hi)


# index-1 region ------------------------------------------------------------------

@dataclass
class Index1Report:
    semidefinite: Optional[SemidefiniteReport]
    samples: int
    index1_fraction: float
    counterexample: Optional[tuple] = None  # (z, w, signature)
    ladder: list = field(default_factory=list)  # (tau, signature) at the witness
    ladder_counterexample: Optional[tuple] = None
    consistent: bool = True
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return self.consistent and self.index1_fraction == 1.0 and self.counterexample is None


def _expected_index1(verdict, kind):
    return (
        (verdict == PSD and kind is ConeKind.UPPER_HALF)
        or (verdict == NSD and kind is ConeKind.LOWER_HALF)
        or verdict == LINEAR
    )


def check_index1_region(L, rng, samples=1000, b_samples=10_000, tol=1e-8,
                        tau_ladder=(10.0, 100.0, 1000.0), threads=None):
    """Fraction of sampled fundamental tensors with signature ``(1, 0, n)``.

    For splitting Lagrangians the sign of the fiber Hessian of ``B`` is
    also sampled; when it is indefinite, the witness ``v`` is pushed along
    ``tau`` up the ladder to exhibit a tensor of the wrong index.
    """
    semi = semidefinite_report(L, rng, b_samples, threads=threads) if L.is_splitting else None
    Z, W = sample_pairs(L, rng, samples)

    def one(i):
        g = fundamental_tensor(L, Z[i], W[i])
        return np.linalg.eigvalsh(g.entries), signature_of(g, tol)

    results = pmap(one, range(samples), threads)
    good = 0
    counter = None
    rows = []
    for i, (eig, sig) in enumerate(results):
        ok = sig.as_tuple() == (1, 0, L.n)
        good += ok
        if not ok and counter is None:
            counter = (Z[i].copy(), W[i].copy(), sig)
        rows.append((i, Z[i], W[i], eig, sig, ok))
    frac = good / samples

    ladder, ladder_ce = [], None
    if semi is not None and semi.verdict == INDEFINITE:
        x, v, _ = semi.witness
        sign = -1.0 if L.cone.kind is ConeKind.LOWER_HALF else 1.0
        for tau in tau_ladder:
            z = np.concatenate([[0.0], x])
            w = np.concatenate([[sign * tau], v])
            sig = signature_of(fundamental_tensor(L, z, w), tol)
            ladder.append((sign * tau, sig))
            if sig.as_tuple() != (1, 0, L.n) and ladder_ce is None:
                ladder_ce = (z, w, sig)

    consistent = True
    if semi is not None and _expected_index1(semi.verdict, L.cone.kind) and frac < 1.0:
        consistent = False
    return Index1Report(semi, samples, frac, counter, ladder, ladder_ce, consistent, rows)


def index_report_header(n):
    return (["sample", "t"] + [f"x{i}" for i in range(1, n + 1)] + ["tau"]
            + [f"v{i}" for i in range(1, n + 1)] + [f"eig{i}" for i in range(n + 1)]
            + ["n_neg", "n_zero", "n_pos", "index1"])


def index_report_rows(report):
    for i, z, w, eig, sig, ok in report.rows:
        yield [i, *z, *w, *eig, sig.n_neg, sig.n_zero, sig.n_pos, int(ok)]
