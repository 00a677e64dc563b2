"""Optical (Fermat) metrics of a stationary splitting, causal classification
and the Legendre map of the reduced Lagrangian on the base."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import ad
from .errors import (
    DomainError,
    HypothesisViolated,
    InconsistentClassification,
    NewtonDivergence,
    ZeroVector,
)
from .lagrangian import (
    FiberLagrangian,
    SpacetimeLagrangian,
    constant_field,
    make_stationary_splitting,
    zero_form,
)
from .types import ConeKind, ConeSpec, as_array
from .zoo import sample_base


def _need_splitting(L):
    if not L.is_splitting:
        raise ValueError(f"{L.name or 'L'} is not a stationary splitting")


@dataclass(frozen=True)
class OpticalMetricPair:
    f_b: FiberLagrangian
    f_b_minus: FiberLagrangian
    g_aux: FiberLagrangian
    source: SpacetimeLagrangian


def optical_metrics(L):
    """``G = sqrt(B^2 + Lam F^2)``, ``F_B = (B + G)/Lam``, ``F_B- = (G - B)/Lam``."""
    _need_splitting(L)
    lam, b, f2 = L.lam, L.b, L.f2

    def g_aux(x, v):
        bv = b(x, v)
        return ad.sqrt(bv * bv + lam(x) * f2(x, v))

    def f_b(x, v):
        return (b(x, v) + g_aux(x, v)) / lam(x)

    def f_b_minus(x, v):
        return (g_aux(x, v) - b(x, v)) / lam(x)

    return OpticalMetricPair(
        FiberLagrangian(f_b, 1, name="F_B"),
        FiberLagrangian(f_b_minus, 1, name="F_B-"),
        FiberLagrangian(g_aux, 1, name="G"),
        L,
    )


# hypotheses on B -------------------------------------------------------------------

@dataclass
class FermatHypotheses:
    """Sampled status of the sign and convexity assumptions on ``B``."""

    hessian_psd: bool
    hessian_nsd: bool
    linear_everywhere: bool
    pointwise_nonneg_or_linear: bool
    pointwise_nonpos_or_linear: bool
    points: int
    directions: int

    @property
    def future(self):
        """Assumptions under which ``F_B`` is a Finsler metric."""
        return self.hessian_psd and self.pointwise_nonneg_or_linear

    @property
    def past(self):
        """Assumptions under which ``F_B-`` is a Finsler metric."""
        return self.hessian_nsd and self.pointwise_nonpos_or_linear

    def failed(self, which):
        out = []
        if which == "future":
            if not self.hessian_psd:
                out.append("fiber Hessian of B positive semi-definite")
            if not self.pointwise_nonneg_or_linear:
                out.append("B >= 0 or linear at each point")
        else:
            if not self.hessian_nsd:
                out.append("fiber Hessian of B negative semi-definite")
            if not self.pointwise_nonpos_or_linear:
                out.append("B <= 0 or linear at each point")
        return out


def _unit_directions(n, k, rng, plane_guard=0.0):
    out = []
    while len(out) < k:
        v = rng.normal(size=n)
        v /= np.linalg.norm(v)
        if plane_guard and np.min(np.abs(v)) < plane_guard:
            continue
        out.append(v)
    return np.array(out)


def _domain_ok(L, x, v, margin=1e-3):
    if L.domain is None:
        return True
    tau = -1.0 if L.cone.kind is ConeKind.LOWER_HALF else 1.0
    return L.domain(x, np.concatenate([[tau], v]), margin)


def fermat_hypotheses(L, rng, points=50, directions=40, tol=1e-10, xs=None):
    _need_splitting(L)
    xs = sample_base(L, rng, points) if xs is None else np.atleast_2d(xs)
    psd = nsd = True
    lin_all = True
    nonneg_ok = nonpos_ok = True
    for x in xs:
        dirs = [v for v in _unit_directions(L.n, directions, rng, L.plane_guard) if _domain_ok(L, x, v)]
        bvals, lin_here = [], True
        xl = list(x)
        for v in dirs:
            jet = ad.jet2(lambda vs: L.b(xl, vs), v)
            e = np.linalg.eigvalsh(jet.hessian)
            if e[0] < -tol:
                psd = False
            if e[-1] > tol:
                nsd = False
            if np.max(np.abs(e)) > 1e-12:
                lin_here = False
            bvals.append(jet.value)
        bvals = np.array(bvals) if bvals else np.zeros(1)
        lin_all &= lin_here
        nonneg_ok &= lin_here or bool(np.all(bvals >= -tol))
        nonpos_ok &= lin_here or bool(np.all(bvals <= tol))
    return FermatHypotheses(psd, nsd, lin_all, nonneg_ok, nonpos_ok, len(xs), directions)


# Finsler verification ------------------------------------------------------------------

@dataclass
class FinslerReport:
    name: str
    samples: int
    min_value: float
    homogeneity_residual: float
    min_eig: float
    hypotheses: FermatHypotheses = None

    @property
    def passed(self):
        return self.min_value > 0 and self.min_eig > 0 and self.homogeneity_residual <= 1e-9


def verify_finsler(F1, L, rng, samples=1000, requires=None, hypotheses=None):
    """Positivity, 1-homogeneity and convexity of ``F1`` over random samples.

    ``requires`` is ``"future"`` (for ``F_B``), ``"past"`` (for ``F_B-``) or
    None; when set, the corresponding assumptions on ``B`` are checked
    first and :class:`HypothesisViolated` lists the ones that fail.
    """
    if requires is not None:
        hypotheses = hypotheses or fermat_hypotheses(L, rng)
        failed = hypotheses.failed(requires)
        if failed:
            raise HypothesisViolated("; ".join(failed), f"{F1.name} on {L.name}")
    xs = sample_base(L, rng, samples)
    min_val, hom, min_eig = math.inf, 0.0, math.inf
    for x in xs:
        for _ in range(1000):
            v = _unit_directions(L.n, 1, rng, L.plane_guard)[0]
            if _domain_ok(L, x, v):
                break
        xl = list(x)
        lam_ = rng.uniform(0.1, 10.0)
        val = F1.at(x, v)
        min_val = min(min_val, val)
        hom = max(hom, abs(F1.at(x, lam_ * v) - lam_ * val) / max(1.0, lam_ * abs(val)))
        jet = ad.jet2(lambda vs: 0.5 * F1(xl, vs) * F1(xl, vs), v)
        e = np.linalg.eigvalsh(jet.hessian)
        min_eig = min(min_eig, float(e[0]) / max(1.0, float(e[-1])))
    return FinslerReport(F1.name, samples, min_val, hom, min_eig, hypotheses)


# static comparison Lagrangians -----------------------------------------------------------

def static_lagrangians(pair):
    """``L_B = -tau^2 + F_B^2`` on the upper cone and ``L_B- = -tau^2 + F_B-^2`` on the lower."""
    L = pair.source

    def square(F):
        return FiberLagrangian(lambda x, v: F(x, v) * F(x, v), 2, name=f"{F.name}^2")

    out = []
    for F, kind, sign in ((pair.f_b, ConeKind.UPPER_HALF, 1), (pair.f_b_minus, ConeKind.LOWER_HALF, -1)):
        out.append(make_stationary_splitting(
            constant_field(1.0), zero_form(), square(F), ConeSpec(kind), L.n,
            y_field_sign=sign, name=f"static {F.name} of {L.name}", domain=L.domain,
            chart=L.chart, params=L.params, kind=L.kind, sample_box=L.sample_box,
            plane_guard=L.plane_guard,
        ))
    return tuple(out)


# causal classification --------------------------------------------------------------------

class CausalKind(str, enum.Enum):
    TIMELIKE = "Timelike"
    LIGHTLIKE = "Lightlike"
    SPACELIKE = "Spacelike"
    ZERO = "Zero"


class Orientation(str, enum.Enum):
    FUTURE = "Future"
    PAST = "Past"
    NONE = "None"


@dataclass(frozen=True)
class CausalClass:
    kind: CausalKind
    orientation: Orientation = Orientation.NONE

    def __post_init__(self):
        if self.kind is CausalKind.ZERO and self.orientation is not Orientation.NONE:
            raise ValueError("the zero vector has no orientation")


def causal_tolerance(L, z, w, rel=1e-10):
    x = as_array(z)[1:]
    w = as_array(w)
    lam = L.lam_at(x)
    return rel * max(1.0, lam * w[0] ** 2, abs(L.f2_at(x, w[1:])))


def classify_causal(L, z, w, pair=None, rel_tol=1e-10):
    """Causal character by the sign of ``L`` and by the optical thresholds.

    ``w`` is causal iff ``tau >= F_B(v)`` or ``tau <= -F_B-(v)``; both
    criteria are evaluated and must agree outside the shared tolerance band.
    """
    _need_splitting(L)
    z, w = as_array(z), as_array(w)
    if not np.any(w):
        return CausalClass(CausalKind.ZERO)
    pair = pair or optical_metrics(L)
    x, tau, v = z[1:], w[0], w[1:]
    tol_l = causal_tolerance(L, z, w, rel_tol)
    lval = L(z, w)
    if lval < -tol_l:
        by_sign = CausalKind.TIMELIKE
    elif lval <= tol_l:
        by_sign = CausalKind.LIGHTLIKE
    else:
        by_sign = CausalKind.SPACELIKE

    # thresholds widened to the band |L| <= tol: the roots of L = +-tol in tau
    lam, b, g = L.lam_at(x), L.b_at(x, v), pair.g_aux.at(x, v)
    inner = math.sqrt(max(g * g - lam * tol_l, 0.0))
    outer = math.sqrt(g * g + lam * tol_l)
    fut_lo, fut_hi = (b + inner) / lam, (b + outer) / lam
    past_lo, past_hi = (b - outer) / lam, (b - inner) / lam
    future = tau >= fut_lo
    past = tau <= past_hi
    if tau > fut_hi or tau < past_lo:
        by_thr = CausalKind.TIMELIKE
    elif future or past:
        by_thr = CausalKind.LIGHTLIKE
    else:
        by_thr = CausalKind.SPACELIKE

    kind = by_sign
    if by_thr is not by_sign:
        # disagreement is only legitimate at the edge of the tolerance band
        if abs(lval) > 10.0 * tol_l:
            raise InconsistentClassification(
                f"sign of L gives {by_sign.value}, thresholds give {by_thr.value} at w={tuple(w)}")
    if kind is CausalKind.SPACELIKE:
        return CausalClass(kind, Orientation.NONE)
    if future and L.cone.admits_future:
        return CausalClass(kind, Orientation.FUTURE)
    if past and L.cone.admits_past:
        return CausalClass(kind, Orientation.PAST)
    return CausalClass(kind, Orientation.NONE)


# Legendre map ------------------------------------------------------------------------------

def reduced_lagrangian(alpha, L):
    """``H_alpha = -alpha B/Lam + (B^2/Lam + F^2)/2`` as a function ``(x, v)``."""
    _need_splitting(L)
    lam, b, f2 = L.lam, L.b, L.f2

    def h(x, v):
        lx = lam(x)
        bv = b(x, v)
        return -alpha * bv / lx + 0.5 * (bv * bv / lx + f2(x, v))

    return h


@dataclass
class LegendreCheck:
    holds: bool
    case: str
    global_bijectivity: bool  # dimension hypothesis n >= 3
    failed: list = field(default_factory=list)


def legendre_hypotheses(alpha, L, x, directions=64, seed=0):
    hyp = fermat_hypotheses(L, np.random.default_rng(seed), directions=directions,
                            xs=np.atleast_2d(as_array(x)))
    if hyp.linear_everywhere:
        case, ok = "linear", True
    elif hyp.hessian_psd and hyp.pointwise_nonneg_or_linear and alpha <= 0:
        case, ok = "nonnegative", True
    elif hyp.hessian_nsd and hyp.pointwise_nonpos_or_linear and alpha >= 0:
        case, ok = "nonpositive", True
    else:
        case, ok = "none", False
    failed = [] if ok else hyp.failed("future" if alpha <= 0 else "past") + (
        [] if (alpha <= 0) == hyp.hessian_psd else ["sign of alpha"])
    return LegendreCheck(ok, case, L.n >= 3, failed)


def legendre_map(alpha, L, x, v, check=True):
    """The covector ``d_v H_alpha`` at ``v``."""
    v = as_array(v)
    if not np.any(v):
        raise ZeroVector("the Legendre map is not defined at v = 0")
    if check:
        chk = legendre_hypotheses(alpha, L, x)
        if not chk.holds:
            raise HypothesisViolated("; ".join(chk.failed) or "Legendre hypotheses")
    h = reduced_lagrangian(alpha, L)
    xl = list(as_array(x))
    return ad.jet2(lambda vs: h(xl, vs), v).gradient


@dataclass
class LegendreInversion:
    v: np.ndarray
    residual: float
    iterations: int
    global_bijectivity: bool


def legendre_invert(alpha, L, x, p, tol=1e-10, max_iter=100, check=True):
    """Solve ``d_v H_alpha(v) = p`` by damped Newton iteration.

    The start is the exact inverse for ``B = 0`` and quadratic ``F``:
    ``v0 = A^{-1} p`` with ``A`` the Hessian of ``F^2/2``.  The flag
    ``global_bijectivity`` records whether the base has dimension at least 3,
    the setting in which the map is known to be a global diffeomorphism.
    """
    p = as_array(p)
    if not np.any(p):
        raise ZeroVector("cannot invert the zero covector")
    if check:
        chk = legendre_hypotheses(alpha, L, x)
        if not chk.holds:
            raise HypothesisViolated("; ".join(chk.failed) or "Legendre hypotheses")
    h = reduced_lagrangian(alpha, L)
    xl = list(as_array(x))
    pn = float(np.linalg.norm(p))

    def jet(v):
        return ad.jet2(lambda vs: h(xl, vs), v)

    try:
        a0 = ad.jet2(lambda vs: 0.5 * L.f2(xl, vs), p).hessian
        v = np.linalg.solve(a0, p)
    except (DomainError, np.linalg.LinAlgError):
        v = p.copy()
    j = jet(v)
    res = j.gradient - p
    rn = float(np.linalg.norm(res))
    for it in range(1, max_iter + 1):
        if rn <= tol * pn:
            return LegendreInversion(v, rn / pn, it - 1, L.n >= 3)
        try:
            step = np.linalg.solve(j.hessian, -res)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular Hessian at iteration {it}") from exc
        t = 1.0
        while True:
            cand = v + t * step
            try:
                jc = jet(cand) if np.any(cand) else None
            except DomainError:
                jc = None
            if jc is not None:
                rc = float(np.linalg.norm(jc.gradient - p))
                if rc < rn or t < 1e-12:
                    break
            t *= 0.5
            if t < 1e-12:
                raise NewtonDivergence(f"line search failed at iteration {it}")
        v, j, rn = cand, jc, rc
        res = j.gradient - p
    if rn <= tol * pn:
        return LegendreInversion(v, rn / pn, max_iter, L.n >= 3)
    raise NewtonDivergence(f"no convergence after {max_iter} iterations (residual {rn / pn:.3g})")


# tables --------------------------------------------------------------------------------------

def optical_table(pair, x, n_dirs=64):
    """Rows ``(angles..., F_B, F_B-, G)`` over unit directions at ``x``."""
    n = pair.source.n
    rows = []
    if n == 1:
        for s in (1.0, -1.0):
            v = np.array([s])
            rows.append((0.0 if s > 0 else math.pi, pair.f_b.at(x, v), pair.f_b_minus.at(x, v),
                         pair.g_aux.at(x, v)))
    elif n == 2:
        for a in np.linspace(0, 2 * math.pi, n_dirs, endpoint=False):
            v = np.array([math.cos(a), math.sin(a)])
            rows.append((a, pair.f_b.at(x, v), pair.f_b_minus.at(x, v), pair.g_aux.at(x, v)))
    else:
        k = max(2, int(round(math.sqrt(n_dirs))))
        for pol in np.linspace(0, math.pi, k + 2)[1:-1]:
            for az in np.linspace(0, 2 * math.pi, 2 * k, endpoint=False):
                v = np.array([math.sin(pol) * math.cos(az), math.sin(pol) * math.sin(az),
                              math.cos(pol)] + [0.0] * (n - 3))
                rows.append((pol, az, pair.f_b.at(x, v), pair.f_b_minus.at(x, v),
                             pair.g_aux.at(x, v)))
    return rows
