"""Geodesics of stationary splittings and of Finsler metrics on the base.

* :func:`spacetime_geodesic_ivp` integrates the Euler-Lagrange equations of
  ``L`` in normal form ``H_ww w' = dL/dz - H_wz w``.
* :func:`fermat_geodesic_ivp` integrates the reduced equations on the base
  for a fixed value of the conserved quantity ``c = -Lam tau + B(v)``.
* :func:`lightlike_correspondence_check` runs both on matched lightlike
  data and compares the base curves and the time reconstruction.
* :func:`geodesic_bvp_shoot` solves two-point problems for a Finsler metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import ad
from .errors import (
    ChartExit,
    ConeExit,
    DomainError,
    IllConditionedHessian,
    IntegrationError,
    NoConvergence,
    NoData,
    OutsideCone,
    ZeroVelocity,
)
from .fermat import optical_metrics, reduced_lagrangian
from .lagrangian import FiberLagrangian
from .ode import integrate
from .parallel import pmap
from .types import ConeKind, as_array, in_cone

CONE_GUARD = 1e-6


# normal form with a degenerate-but-consistent fallback --------------------------------

@dataclass
class _SolveStats:
    evaluations: int = 0
    degenerate: int = 0
    min_rel_eig: float = math.inf


def _solve_normal_form(H, rhs, stats, s, strict, positive=False,
                       null_tol=1e-9, consistency_tol=1e-8):
    """Solve ``H a = rhs`` for the accelerations.

    ``H`` is symmetric.  Eigenvalues below ``null_tol`` (relative) are
    treated as null directions; they are admitted only when ``rhs`` has no
    component along them (the equation is then consistent and the
    pseudo-inverse gives the unique solution with no acceleration along the
    null space).  ``positive`` additionally requires the kept spectrum to be
    positive.
    """
    stats.evaluations += 1
    e, U = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(e))))
    rel = np.abs(e) / scale
    stats.min_rel_eig = min(stats.min_rel_eig, float(rel.min()))
    if positive and np.any(e < -null_tol * scale):
        raise IllConditionedHessian(s, f"Hessian not positive definite (min eig {e[0]:.3g})")
    null = rel <= null_tol
    c = U.T @ rhs
    if np.any(null):
        if strict:
            raise IllConditionedHessian(s, f"Hessian is singular (relative eigenvalue {rel.min():.3g})")
        rscale = max(1.0, float(np.linalg.norm(rhs)))
        if np.any(np.abs(c[null]) > consistency_tol * rscale):
            raise IllConditionedHessian(s, "singular Hessian with inconsistent right-hand side")
        stats.degenerate += 1
        c = np.where(null, 0.0, c / np.where(null, 1.0, e))
        return U @ c
    return U @ (c / e)


# trajectories ---------------------------------------------------------------------------

@dataclass
class GeodesicTrajectory:
    n: int
    params: np.ndarray
    states: np.ndarray  # rows (t, x1..xn, tau, v1..vn)
    c_gamma_trace: np.ndarray
    energy_trace: np.ndarray
    solver_stats: dict = field(default_factory=dict)
    special: str = ""

    @property
    def t(self):
        return self.states[:, 0]

    @property
    def x(self):
        return self.states[:, 1:self.n + 1]

    @property
    def tau(self):
        return self.states[:, self.n + 1]

    @property
    def v(self):
        return self.states[:, self.n + 2:]

    def csv_header(self):
        n = self.n
        return (["s", "t"] + [f"x{i}" for i in range(1, n + 1)] + ["tau"]
                + [f"v{i}" for i in range(1, n + 1)] + ["c_gamma", "energy"])

    def csv_rows(self):
        for s, y, c, e in zip(self.params, self.states, self.c_gamma_trace, self.energy_trace):
            yield [s, *y, c, e]


def _time_independent_jet(L, z, w):
    """Jet of ``L`` in ``(x, w)`` with ``t`` frozen; returns gradient and Hessian over ``(z, w)``."""
    m = L.n + 1
    if L.time_independent:
        t = float(z[0])
        u = np.concatenate([z[1:], w])

        def f(q):
            return L.value([t] + q[:m - 1], q[m - 1:])

        j = ad.jet2(f, u)
        g = np.concatenate([[0.0], j.gradient])
        H = np.zeros((2 * m, 2 * m))
        H[1:, 1:] = j.hessian
        return g, H
    from .lagrangian import full_jet
    j = full_jet(L, z, w)
    return j.gradient, j.hessian


def conserved_value(L, z, w):
    """``c = -Lam tau + B(v)``, i.e. half the ``tau`` derivative of ``L``."""
    z, w = as_array(z), as_array(w)
    if L.is_splitting:
        return -L.lam_at(z[1:]) * w[0] + L.b_at(z[1:], w[1:])
    from .lagrangian import fiber_jet
    return 0.5 * float(fiber_jet(L, z, w).gradient[0])


def _traces(L, states):
    m = L.n + 1
    cs = np.array([conserved_value(L, y[:m], y[m:]) for y in states]) if L.time_independent \
        else np.full(len(states), math.nan)
    es = np.array([L(y[:m], y[m:]) for y in states])
    return cs, es


def _t_orbit(L, z0, w0, s_span, s_eval):
    """Flow lines of d/dt through critical points of Lambda are timelike geodesics."""
    x0 = as_array(z0)[1:]
    if not (L.is_splitting and L.b.linear):
        raise OutsideCone(w0, L.cone)
    grad = ad.jet2(lambda xs: L.lam(xs), x0).gradient
    if np.linalg.norm(grad) > 1e-10 * max(1.0, L.lam_at(x0)):
        raise ConeExit(float(s_span[0]), "velocity on the time axis and dLambda != 0: not a geodesic")
    s = np.asarray(s_eval if s_eval is not None else np.linspace(s_span[0], s_span[1], 11), float)
    z0, w0 = as_array(z0), as_array(w0)
    states = np.array([np.concatenate([[z0[0] + w0[0] * (si - s[0])], x0, w0]) for si in s])
    c, e = _traces(L, states)
    return GeodesicTrajectory(L.n, s, states, c, e, {"steps": 0, "rejected": 0}, special="t-orbit")


def spacetime_geodesic_ivp(L, z0, w0, s_span, tol=1e-10, s_eval=None, strict=False):
    """Affinely parametrised geodesic of ``L`` from ``(z0, w0)``.

    Runs stop with :class:`ConeExit` when the velocity comes within the cone
    guard of the time axis, with :class:`ChartExit` when the base point
    leaves the chart.  The partial trajectory is attached to the exception
    as ``exc.trajectory``.
    """
    z0, w0 = as_array(z0), as_array(w0)
    m = L.n + 1
    if np.linalg.norm(w0[1:]) <= CONE_GUARD * np.linalg.norm(w0) and np.any(w0):
        return _t_orbit(L, z0, w0, s_span, s_eval)
    L.require(z0, w0)
    stats = _SolveStats()

    def rhs(s, y):
        z, w = y[:m], y[m:]
        g, H = _time_independent_jet(L, z, w)
        Hww = H[m:, m:]
        Hwz = H[m:, :m]
        acc = _solve_normal_form(Hww, g[:m] - Hwz @ w, stats, s, strict)
        return np.concatenate([w, acc])

    def check(s, y):
        z, w = y[:m], y[m:]
        if not L.in_chart(z[1:]):
            raise ChartExit(s, f"left the chart at x={tuple(z[1:])}")
        if np.linalg.norm(w[1:]) <= CONE_GUARD * np.linalg.norm(w) or not in_cone(L.cone, w):
            raise ConeExit(s, "velocity reached the time axis")
        if L.domain is not None and not L.domain(z[1:], w, 0.0):
            raise ConeExit(s, "velocity left the domain")

    y0 = np.concatenate([z0, w0])
    partial = {}

    def check_and_keep(s, y):
        partial["s"], partial["y"] = s, y.copy()
        check(s, y)

    try:
        sol = integrate(rhs, s_span, y0, tol, tol, s_eval=s_eval, check=check_and_keep)
    except IntegrationError as exc:
        exc.trajectory = None
        raise
    c, e = _traces(L, sol.y)
    st = {"steps": sol.steps, "rejected": sol.rejected, "rtol": tol, "atol": tol,
          "degenerate_evaluations": stats.degenerate, "evaluations": stats.evaluations}
    return GeodesicTrajectory(L.n, sol.s, sol.y, c, e, st)


@dataclass
class ConservedSummary:
    c_gamma: float
    energy: float
    c_drift: float
    energy_drift: float
    max_drift: float
    relative_drift: float
    scale: float


def conserved_quantities(traj, L=None):
    """Means and maximal drifts of ``c_gamma`` and of the energy ``L(gamma')``.

    ``relative_drift`` divides by ``max(1, Lam tau^2, F^2)`` at the first
    sample when ``L`` is given (otherwise by ``max(1, |c|, |C|)``).
    """
    if traj is None or len(traj.params) == 0:
        raise NoData("empty trajectory")
    if traj.special == "t-orbit" or np.any(
            np.linalg.norm(traj.v, axis=1) <= CONE_GUARD * np.linalg.norm(traj.states[:, traj.n + 1:], axis=1)):
        raise NoData("velocity on the time axis: conserved quantities are not sampled there")
    c, e = traj.c_gamma_trace, traj.energy_trace
    cd = float(np.max(np.abs(c - c[0])))
    ed = float(np.max(np.abs(e - e[0])))
    if L is not None and L.is_splitting:
        x0, w0 = traj.x[0], traj.states[0, traj.n + 1:]
        scale = max(1.0, L.lam_at(x0) * w0[0] ** 2, abs(L.f2_at(x0, w0[1:])))
    else:
        scale = max(1.0, abs(c[0]), abs(e[0]))
    return ConservedSummary(float(np.mean(c)), float(np.mean(e)), cd, ed, max(cd, ed),
                            max(cd, ed) / scale, scale)


# reduced equation on the base -----------------------------------------------------------

@dataclass
class BaseTrajectory:
    params: np.ndarray
    x: np.ndarray
    v: np.ndarray
    theta: Optional[np.ndarray] = None
    g_trace: Optional[np.ndarray] = None
    length: Optional[np.ndarray] = None
    solver_stats: dict = field(default_factory=dict)


def _base_rhs(lag, n, stats, positive, strict, extra=None):
    """Right-hand side for the Euler-Lagrange system of ``lag(x, v)`` on the base."""

    def rhs(s, y):
        x, v = y[:n], y[n:2 * n]
        j = ad.jet2(lambda q: lag(q[:n], q[n:]), np.concatenate([x, v]))
        g, H = j.gradient, j.hessian
        acc = _solve_normal_form(H[n:, n:], g[:n] - H[n:, :n] @ v, stats, s, strict, positive)
        out = [v, acc]
        if extra is not None:
            out.append(np.atleast_1d(extra(x, v)))
        return np.concatenate(out)

    return rhs


def fermat_geodesic_ivp(L, c_gamma, x0, v0, s_span, tol=1e-10, s_eval=None, strict=False,
                        theta0=None):
    """Integrate the reduced equations on the base for constant ``c_gamma``.

    The Lagrangian is ``H_c + c^2/(2 Lam)`` with ``H_c = -c B/Lam + (B^2/Lam + F^2)/2``;
    its energy is conserved, which keeps ``G(v) = |c|``.  ``v0`` is rescaled
    to satisfy that normalisation.  When ``theta0`` is given the time
    function ``theta' = F_B(v)`` (for ``c < 0``) or ``-F_B-(v)`` (``c > 0``)
    is integrated alongside.
    """
    x0, v0 = as_array(x0), as_array(v0)
    n = L.n
    if not np.any(v0) or c_gamma == 0:
        raise ZeroVelocity("the reduced equation needs v0 != 0 and c != 0")
    pair = optical_metrics(L)
    g0 = pair.g_aux.at(x0, v0)
    v0 = v0 * (abs(c_gamma) / g0)
    h = reduced_lagrangian(c_gamma, L)
    c2 = c_gamma * c_gamma

    def lag(x, v):
        return h(x, v) + 0.5 * c2 / L.lam(x)

    stats = _SolveStats()
    extra = None
    y0 = np.concatenate([x0, v0])
    if theta0 is not None:
        F = pair.f_b if c_gamma < 0 else pair.f_b_minus
        sign = 1.0 if c_gamma < 0 else -1.0

        def extra(x, v):
            return sign * ad.value_of(F(list(x), list(v)))

        y0 = np.concatenate([y0, [theta0]])
    rhs = _base_rhs(lag, n, stats, True, strict, extra)

    def check(s, y):
        if not L.in_chart(y[:n]):
            raise ChartExit(s, "left the chart")
        if not np.any(y[n:2 * n]):
            raise ZeroVelocity("velocity vanished")

    sol = integrate(rhs, s_span, y0, tol, tol, s_eval=s_eval, check=check)
    xs, vs = sol.y[:, :n], sol.y[:, n:2 * n]
    gt = np.array([pair.g_aux.at(x, v) for x, v in zip(xs, vs)])
    theta = sol.y[:, 2 * n] if theta0 is not None else None
    st = {"steps": sol.steps, "rejected": sol.rejected, "rtol": tol, "atol": tol,
          "degenerate_evaluations": stats.degenerate, "min_relative_eig": stats.min_rel_eig}
    return BaseTrajectory(sol.s, xs, vs, theta, gt, None, st)


def finsler_energy_ivp(F1, x0, v0, s_span, tol=1e-10, s_eval=None, chart=None, n=None,
                       max_step=np.inf):
    """Geodesic of a Finsler metric ``F1`` (Euler-Lagrange of ``F1^2/2``) with its length."""
    x0, v0 = as_array(x0), as_array(v0)
    n = n or x0.size
    stats = _SolveStats()

    def lag(x, v):
        f = F1(x, v)
        return 0.5 * f * f

    def speed(x, v):
        return ad.value_of(F1(list(x), list(v)))

    rhs = _base_rhs(lag, n, stats, True, True, speed)
    if chart is not None:
        inner = rhs

        def rhs(s, y):
            # stage points sample the interior of each step
            if not chart(y[:n]):
                raise ChartExit(s, "left the admissible region")
            return inner(s, y)

    def check(s, y):
        if chart is not None and not chart(y[:n]):
            raise ChartExit(s, "left the admissible region")

    sol = integrate(rhs, s_span, np.concatenate([x0, v0, [0.0]]), tol, tol, s_eval=s_eval,
                    check=check, max_step=max_step)
    return BaseTrajectory(sol.s, sol.y[:, :n], sol.y[:, n:2 * n], None, None, sol.y[:, 2 * n],
                          {"steps": sol.steps, "rejected": sol.rejected})


# lightlike correspondence -----------------------------------------------------------------

@dataclass
class CorrespondenceReport:
    orientation: str
    c_gamma: float
    gap: float
    theta_residual: float
    g_drift: float
    spacetime: GeodesicTrajectory
    base: BaseTrajectory
    tol: float

    def passed(self, gap_tol):
        return self.gap <= gap_tol and self.theta_residual <= gap_tol


def lightlike_correspondence_check(L, z0, v0, s_span, tol=1e-10, past=None, samples=201):
    """Compare a lightlike geodesic of ``L`` with the reduced base geodesic.

    Future runs launch ``(F_B(v0), v0)`` and reconstruct time as
    ``theta(s) = theta(a) + int F_B``; past runs (``past=True`` or a lower
    cone) launch ``(-F_B-(v0), v0)`` and use ``theta(a) - int F_B-``.
    """
    z0, v0 = as_array(z0), as_array(v0)
    if past is None:
        past = L.cone.kind is ConeKind.LOWER_HALF
    if past and not L.cone.admits_past or not past and not L.cone.admits_future:
        raise OutsideCone(v0, L.cone)
    pair = optical_metrics(L)
    x0 = z0[1:]
    tau0 = -pair.f_b_minus.at(x0, v0) if past else pair.f_b.at(x0, v0)
    w0 = np.concatenate([[tau0], v0])
    grid = np.linspace(s_span[0], s_span[1], samples)
    st = spacetime_geodesic_ivp(L, z0, w0, s_span, tol, s_eval=grid)
    c = conserved_value(L, z0, w0)
    base = fermat_geodesic_ivp(L, c, x0, v0, s_span, tol, s_eval=grid, theta0=float(z0[0]))
    k = min(len(st.params), len(base.params))
    gap = float(np.max(np.abs(st.x[:k] - base.x[:k])))
    theta_res = float(np.max(np.abs(st.t[:k] - base.theta[:k])))
    g_drift = float(np.max(np.abs(base.g_trace - abs(c))))
    return CorrespondenceReport("past" if past else "future", c, gap, theta_res, g_drift,
                                st, base, tol)


# two-point problems ---------------------------------------------------------------------------

@dataclass
class ShootingResult:
    initial_velocity: np.ndarray
    endpoint_error: float
    trajectory: Optional[BaseTrajectory]
    converged: bool
    length: float = math.nan
    degenerate: bool = False
    starts: int = 0


def _directions(n, k):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = np.linspace(0, 2 * math.pi, k, endpoint=False)
        return np.column_stack([np.cos(a), np.sin(a)])
    # Fibonacci sphere
    i = np.arange(k) + 0.5
    phi = np.arccos(1 - 2 * i / k)
    th = math.pi * (1 + 5 ** 0.5) * i
    d = np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    if n > 3:
        d = np.column_stack([d, np.zeros((k, n - 3))])
    return d


def geodesic_bvp_shoot(F1, x0, x1, tol=1e-8, n_starts=None, chart=None, ode_tol=1e-10,
                       refine=4, threads=None):
    """Shoot geodesics of the Finsler metric ``F1`` from ``x0`` to ``x1``.

    Unknown is the initial velocity ``p`` of a geodesic on ``s in [0, 1]``;
    the metric length is ``F1(x0, p)``.  ``n_starts`` initial directions
    (32 in the plane, 128 in space) are scaled to the straight-line length
    and screened at a loose tolerance.  Up to ``refine`` distinct basins are
    polished with a hybrid Powell root finder and the shortest converged
    geodesic is returned.  With a ``chart`` predicate, steps are capped so
    that, together with the stage points, excursions out of the admissible
    region are detected.
    """
    x0, x1 = as_array(x0), as_array(x1)
    n = x0.size
    scale = max(1.0, float(np.max(np.abs(x0))), float(np.max(np.abs(x1))))
    if np.allclose(x0, x1, rtol=0, atol=1e-15 * scale):
        return ShootingResult(np.zeros(n), 0.0, None, True, 0.0, degenerate=True)
    F = FiberLagrangian(F1, 1) if not isinstance(F1, FiberLagrangian) else F1
    n_starts = n_starts or (32 if n <= 2 else 128)
    max_step = 1.0 / 16 if chart is not None else np.inf
    chord = x1 - x0

    def shoot(p, acc, s_eval=(0.0, 1.0)):
        try:
            tr = finsler_energy_ivp(F, x0, p, (0.0, 1.0), acc, s_eval=s_eval, chart=chart, n=n,
                                    max_step=max_step)
        except (IntegrationError, DomainError, ZeroVelocity):
            return None
        return tr if len(tr.params) >= 2 and tr.params[-1] == 1.0 else None

    def residual(p):
        tr = shoot(p, ode_tol)
        if tr is None:
            return np.full(n, 1e3 * scale)
        return tr.x[-1] - x1

    ell = F.at(x0, chord)
    dirs = _directions(n, n_starts)
    starts = [d * (ell / F.at(x0, d)) for d in dirs]

    def screen(p):
        tr = shoot(p, 1e-6)
        return math.inf if tr is None else float(np.linalg.norm(tr.x[-1] - x1))

    errs = np.array(pmap(screen, starts, threads))
    order = np.argsort(errs)
    # starts closer than a few lattice spacings share a basin
    spacing = 2 * math.pi / n_starts if n == 2 else math.sqrt(4 * math.pi / n_starts)
    sep = 2.5 * spacing if n > 1 else 0.5
    picked = []
    for i in order:
        if not np.isfinite(errs[i]):
            break
        if all(np.linalg.norm(dirs[i] - dirs[j]) > sep for j in picked):
            picked.append(i)
        if len(picked) >= refine:
            break
    best = None
    good = []
    for i in picked:
        sol = optimize.root(residual, starts[i], method="hybr",
                            options={"xtol": 1e-13, "maxfev": 60 * (n + 1)})
        err = float(np.linalg.norm(residual(sol.x)))
        if best is None or err < best[0]:
            best = (err, sol.x)
        if err <= tol * scale:
            good.append((F.at(x0, sol.x), err, sol.x))
    if not good:
        if best is None:
            best = (math.inf, starts[int(order[0])])
        raise NoConvergence(f"shooting failed (best endpoint error {best[0]:.3g})",
                            ShootingResult(best[1], best[0], shoot(best[1], ode_tol), False,
                                           starts=n_starts))
    length, err, p = min(good, key=lambda g: g[0])
    tr = shoot(p, ode_tol, s_eval=None)
    return ShootingResult(p, err, tr, True, float(tr.length[-1]), starts=n_starts)
