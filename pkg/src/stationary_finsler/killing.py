"""Complete lifts, Killing residuals, Lie derivatives of the fundamental
tensor, flow isometry checks and the static-splitting conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ad
from .errors import (
    ConeExit,
    DomainError,
    FlowEscape,
    IntegrationError,
    NotDifferentiableAtK,
)
from .lagrangian import fiber_jet, full_jet
from .ode import dopri5
from .parallel import pmap
from .types import SymBilinear, as_array, in_cone
from .zoo import sample_base


@dataclass(frozen=True)
class VectorField:
    """A vector field on the spacetime chart, ``fn(z) -> n+1 components``.

    Components are written with :mod:`ad` primitives so the Jacobian comes
    from the same code by forward differentiation.
    """

    fn: Callable
    n: int
    name: str = ""

    def __call__(self, z):
        return np.array([ad.value_of(c) for c in self.fn(list(as_array(z)))])

    def jacobian(self, z):
        """``J[h, i] = dK^h / dz^i``."""
        z = as_array(z)
        comps = self.fn(ad.seed(z))
        out = np.zeros((self.n + 1, z.size))
        for h, c in enumerate(comps):
            if ad.is_jet(c):
                out[h] = c.g
        return out


def time_translation(n):
    return VectorField(lambda z: [1.0] + [0.0] * n, n, "d/dt")


def time_dilation(n):
    return VectorField(lambda z: [z[0]] + [0.0] * n, n, "t d/dt")


def coordinate_field(n, i):
    """The coordinate field ``d/dz^i`` (``i = 0`` is ``d/dt``)."""
    return VectorField(lambda z: [1.0 if k == i else 0.0 for k in range(n + 1)], n, f"d/dz{i}")


# complete lift --------------------------------------------------------------

def _lift_direction(K, z, w):
    return K(z), K.jacobian(z) @ as_array(w)


def complete_lift_apply(K, L, z, w):
    """``K^c(L)`` at ``(z, w)``: ``K^h dL/dz^h + (dK^h/dz^i) w^i dL/dw^h``."""
    L.require(z, w)
    jet = full_jet(L, z, w)
    m = L.n + 1
    kz, kw = _lift_direction(K, z, w)
    return float(kz @ jet.gradient[:m] + kw @ jet.gradient[m:])


@dataclass
class KillingReport:
    worst: float
    mean: float
    worst_relative: float
    samples: int
    tol: float
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def killing(self):
        return self.worst_relative <= self.tol


def killing_residual(K, L, Z, W, tol=1e-10, threads=None):
    """Residuals ``|K^c(L)|`` over the sample pairs, relative to ``max(1, |L|)``."""
    def one(i):
        r = abs(complete_lift_apply(K, L, Z[i], W[i]))
        return r, r / max(1.0, abs(L(Z[i], W[i])))

    res = np.array(pmap(one, range(len(Z)), threads))
    return KillingReport(float(res[:, 0].max()), float(res[:, 0].mean()), float(res[:, 1].max()),
                         len(Z), tol, res[:, 0])


# Lie derivative of the fundamental tensor -------------------------------------

def _half_hessian(L, z, w):
    return 0.5 * fiber_jet(L, z, w).hessian


def lift_derivative_of_tensor(K, L, z, w, h=1e-3):
    """``K^c`` applied to each component ``g_lj`` of the fundamental tensor.

    The derivative along the lift direction ``(K(z), DK(z) w)`` is taken by a
    five-point central difference of the exact (forward-mode) Hessian.
    """
    z, w = as_array(z), as_array(w)
    kz, kw = _lift_direction(K, z, w)
    d = np.concatenate([kz, kw])
    nd = float(np.linalg.norm(d))
    m = z.size
    if nd == 0.0:
        return np.zeros((m, m))
    step = h * max(1.0, float(np.linalg.norm(np.concatenate([z, w])))) / nd

    def g_at(s):
        return _half_hessian(L, z + s * kz, w + s * kw)

    return (-g_at(2 * step) + 8 * g_at(step) - 8 * g_at(-step) + g_at(-2 * step)) / (12 * step)


def lie_derivative_components(K, L, z, w, h=1e-3):
    """``(L_K g)_lj = K^c(g_lj) + dK^h/dz^l g_hj + dK^h/dz^j g_lh``."""
    L.require(z, w)
    g = _half_hessian(L, z, w)
    dk = K.jacobian(z)
    out = lift_derivative_of_tensor(K, L, z, w, h) + dk.T @ g + g @ dk
    return SymBilinear(out)


def contraction_gap(K, L, z, w):
    """``|(L_K g)_w(w, w) - K^c(L)(w)|``; zero up to truncation by Euler's theorem."""
    w = as_array(w)
    lie = lie_derivative_components(K, L, z, w)
    return abs(lie(w, w) - complete_lift_apply(K, L, z, w))


# isometry along the flow ---------------------------------------------------------

@dataclass
class IsometryReport:
    max_deviation: float
    times: np.ndarray
    deviations: np.ndarray
    steps: int


def isometry_flow_check(K, L, z, w, t_max, steps=10, rtol=1e-10, atol=1e-10, basis=None):
    """Max over ``t`` and basis pairs of ``|g_{dpsi w}(dpsi u1, dpsi u2) - g_w(u1, u2)|``.

    The flow ``psi`` of ``K`` and its differential are integrated together:
    ``z' = K(z)``, ``J' = DK(z) J``, ``J(0) = I``.
    """
    z, w = as_array(z), as_array(w)
    L.require(z, w)
    m = z.size
    basis = np.eye(m) if basis is None else np.asarray(basis, dtype=float)
    g0 = _half_hessian(L, z, w)
    ref = basis @ g0 @ basis.T

    def rhs(s, y):
        zz = y[:m]
        J = y[m:].reshape(m, m)
        return np.concatenate([K(zz), (K.jacobian(zz) @ J).ravel()])

    def check(s, y):
        if not np.all(np.isfinite(y)) or not L.in_chart(y[1:m]):
            raise FlowEscape(s, "flow left the chart")

    times = np.linspace(0.0, t_max, steps + 1)
    y0 = np.concatenate([z, np.eye(m).ravel()])
    try:
        sol = dopri5(rhs, (0.0, t_max), y0, rtol, atol, s_eval=times, check=check)
    except DomainError as exc:
        raise FlowEscape(0.0, str(exc)) from exc
    devs = []
    for s, y in zip(sol.s, sol.y):
        zz = y[:m]
        J = y[m:].reshape(m, m)
        wt = J @ w
        if not in_cone(L.cone, wt):
            raise ConeExit(s, "pushed vector left the cone")
        gt = _half_hessian(L, zz, wt)
        pushed = basis @ J.T @ gt @ J @ basis.T
        devs.append(float(np.max(np.abs(pushed - ref))))
    devs = np.array(devs)
    return IsometryReport(float(devs.max()), sol.s, devs, sol.steps)


# static-splitting conditions -------------------------------------------------------

@dataclass
class StaticCheckReport:
    cond_a: bool
    cond_a_residual: float
    cond_b: float
    cond_c: float
    frobenius: float
    samples: int
    cond_a_per_sample: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def verdict(self, tol=1e-8, frob_fail=1e-3):
        if not self.cond_a:
            return "inconclusive"
        if self.cond_b <= tol and self.cond_c <= tol and self.frobenius <= tol:
            return "static"
        if self.cond_b > tol or self.cond_c > tol or self.frobenius > frob_fail:
            return "stationary-nonstatic"
        return "inconclusive"


def _one_sided(L, z, k, u, h, side):
    """Richardson-extrapolated one-sided derivative of ``s -> L(z, k + s u)`` at 0."""
    def d(hh):
        return side * (L(z, k + side * hh * u) - L(z, k)) / hh

    return 2.0 * d(h / 2) - d(h)


def fiber_covector(L, z, k, h=1e-4):
    """``alpha = d_w L(z, .)`` at ``k``; exact when possible, else by differences."""
    z, k = as_array(z), as_array(k)
    try:
        return fiber_jet(L, z, k).gradient
    except DomainError:
        pass
    m = k.size
    out = np.empty(m)
    scale = max(1.0, float(np.linalg.norm(k)))
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0

        def c(hh):
            return (L(z, k + hh * e) - L(z, k - hh * e)) / (2 * hh)

        hh = h * scale
        out[i] = 2.0 * c(hh / 2) - c(hh)
    return out


def _second_difference_gap(L, z, u, h):
    """Disagreement of one-sided second differences across the time axis."""
    e0 = np.zeros(u.size)
    e0[0] = 1.0

    def d2(side):
        return (L(z, e0 + 2 * side * h * u) - 2 * L(z, e0 + side * h * u) + L(z, e0)) / (h * h)

    return abs(d2(1.0) - d2(-1.0))


def _null_basis(alpha, tol=1e-10):
    a = np.atleast_2d(alpha)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s.max() if s.size else 0.0)))
    return vt[rank:]


def _frobenius(L, K, z, h):
    """Max component of ``alpha ^ d alpha`` with ``alpha = d_w L(z, K(z))``."""
    m = z.size
    alpha = fiber_covector(L, z, K(z))
    dal = np.zeros((m, m))  # dal[i, j] = d_i alpha_j
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        dal[i] = (fiber_covector(L, z + e, K(z + e)) - fiber_covector(L, z - e, K(z - e))) / (2 * h)
    da = dal - dal.T  # (d alpha)_{ij} = d_i alpha_j - d_j alpha_i
    worst = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                c = alpha[i] * da[j, k] + alpha[j] * da[k, i] + alpha[k] * da[i, j]
                worst = max(worst, abs(c))
    return worst


def static_conditions_check(K, L, rng, samples=50, w_per_point=4, strict=True,
                            c1_tol=1e-6, c2_tol=1e-4, h_fd=1e-4, h_frob=1e-5, threads=None):
    """Sampled residuals of the static-splitting conditions for ``K``.

    (a) ``L(z, .)`` is differentiable at ``K_z`` and, where it fails to be
    twice differentiable across the time axis, ``K_z`` lies on that axis;
    (b) ``L(K) = L(-K)``; (c) ``L(w +- K) = L(w) + L(K)`` for ``w`` in the
    kernel ``D`` of ``alpha = d_w L(K)``; and ``alpha ^ d alpha = 0``.
    """
    xs = sample_base(L, rng, samples)
    zs = np.column_stack([rng.uniform(-1.0, 1.0, samples), xs])
    m = L.n + 1
    dirs = rng.normal(size=(samples, 3, m))
    coeffs = rng.normal(size=(samples, w_per_point, m))

    def one(i):
        z = zs[i]
        k = K(z)
        lk = L(z, k)
        scale = max(1.0, abs(lk))
        # (a)
        gap1 = 0.0
        for u in dirs[i]:
            u = u / np.linalg.norm(u)
            if np.linalg.norm(u[1:]) < 1e-3:
                continue
            hh = h_fd * max(1.0, float(np.linalg.norm(k)))
            gap1 = max(gap1, abs(_one_sided(L, z, k, u, hh, 1.0) - _one_sided(L, z, k, u, hh, -1.0)))
        c1_ok = gap1 <= c1_tol * scale
        gap2 = max(_second_difference_gap(L, z, u / np.linalg.norm(u), 1e-3) for u in dirs[i])
        off_axis = float(np.linalg.norm(k[1:]))
        c2_ok = gap2 <= c2_tol * scale or off_axis <= 1e-8
        a_ok = c1_ok and c2_ok
        # (b)
        rb = abs(lk - L(z, -k))
        # (c)
        rc = math.nan
        frob = math.nan
        if c1_ok:
            alpha = fiber_covector(L, z, k, h_fd)
            basis = _null_basis(alpha)
            rc = 0.0
            for c in coeffs[i]:
                w = c[: basis.shape[0]] @ basis
                lw = L(z, w)
                sc = max(1.0, abs(lw), abs(lk))
                for sgn in (1.0, -1.0):
                    rc = max(rc, abs(L(z, w + sgn * k) - lw - lk) / sc)
            try:
                frob = _frobenius(L, K, z, h_frob * max(1.0, float(np.linalg.norm(z))))
            except DomainError:
                frob = math.nan
        return a_ok, max(gap1 / scale, 0.0), rb / scale, rc, frob, z

    res = pmap(one, range(samples), threads)
    cond_a_list = [r[0] for r in res]
    finite = lambda vals: [v for v in vals if not math.isnan(v)]
    rep = StaticCheckReport(
        cond_a=all(cond_a_list),
        cond_a_residual=max(r[1] for r in res),
        cond_b=max(r[2] for r in res),
        cond_c=max(finite([r[3] for r in res]), default=math.nan),
        frobenius=max(finite([r[4] for r in res]), default=math.nan),
        samples=samples,
        cond_a_per_sample=cond_a_list,
        rows=[(i, r[5], r[0], r[1], r[2], r[3], r[4]) for i, r in enumerate(res)],
    )
    if strict and not rep.cond_a:
        exc = NotDifferentiableAtK(
            f"L is not differentiable at K on {cond_a_list.count(False)} of {samples} samples")
        exc.report = rep
        raise exc
    return rep


def static_report_header(n):
    return ["sample", "t"] + [f"x{i}" for i in range(1, n + 1)] + [
        "cond_a", "cond_a_gap", "cond_b", "cond_c", "frobenius"]


def static_report_rows(rep):
    for i, z, a, ga, b, c, f in rep.rows:
        yield [i, *z, int(a), ga, b, c, f]


__all__ = [
    "VectorField", "time_translation", "time_dilation", "coordinate_field",
    "complete_lift_apply", "killing_residual", "lie_derivative_components",
    "contraction_gap", "isometry_flow_check", "static_conditions_check",
    "StaticCheckReport", "KillingReport", "IsometryReport", "IntegrationError",
]
