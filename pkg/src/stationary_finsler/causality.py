"""Finsler distances, metric balls, chronological sets and causal-simplicity evidence.

Two independent distance routes are provided: geodesic shooting (the
product path) and Dijkstra on a lattice with edge weights
``F(midpoint, edge)`` (the oracle).  Chronological futures of a stationary
splitting are stacks of forward balls of the optical metric.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse import csgraph
from scipy.spatial import ConvexHull

from . import ad
from .errors import (
    FinslerError,
    HypothesisViolated,
    IntegrationError,
    NoConvergence,
    OutOfBox,
)
from .fermat import fermat_hypotheses, optical_metrics
from .geodesics import _directions, finsler_energy_ivp, geodesic_bvp_shoot
from .lagrangian import FiberLagrangian
from .parallel import pmap
from .types import ConeKind, as_array


class BallKind(str, enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


class TimeSign(str, enum.Enum):
    FUTURE = "Future"
    PAST = "Past"


def _as_fiber(F1):
    return F1 if isinstance(F1, FiberLagrangian) else FiberLagrangian(F1, 1)


def reversed_metric(F1):
    """``F~(x, v) = F(x, -v)``; its forward balls are the backward balls of ``F``."""
    F = _as_fiber(F1)
    return FiberLagrangian(lambda x, v: F.fn(x, [-c for c in v]), 1, name=f"reversed {F.name}")


def evaluate_batch(F1, X, V):
    """Evaluate ``F1`` row-wise on arrays ``X``, ``V`` of shape ``(m, n)``.

    Tries one vectorised call first and falls back to a loop for metrics
    whose code is scalar-only.
    """
    F = _as_fiber(F1)
    X, V = np.asarray(X, float), np.asarray(V, float)
    try:
        out = np.asarray(F.fn(list(X.T), list(V.T)), dtype=float)
        if out.shape == (X.shape[0],):
            return out
    except (TypeError, ValueError, FinslerError):
        pass
    return np.array([ad.value_of(F.fn(list(x), list(v))) for x, v in zip(X, V)])


# lattice distances ---------------------------------------------------------------------

def lattice_offsets(n, order=1):
    """Neighbour offsets: primitive lattice moves with every coordinate at most ``order``.

    Order 1 gives the 3^n - 1 king moves; order 2 adds the knight-type moves.
    """
    reach = int(order)
    if reach < 1:
        raise ValueError("order must be at least 1")
    offs = []
    for o in itertools.product(range(-reach, reach + 1), repeat=n):
        if not any(o):
            continue
        if math.gcd(*[abs(c) for c in o]) != 1:
            continue
        offs.append(o)
    return np.array(offs, dtype=int)


class DistanceGrid:
    """Directed lattice graph over a box with Finsler edge lengths.

    ``resolution`` is the number of cells per axis, so nodes sit at
    ``lo + k (hi - lo)/resolution``.  ``mask(x) -> bool`` removes nodes and
    edges whose midpoint leaves the admissible region.
    """

    def __init__(self, F1, box, resolution=200, order=1, mask=None, threads=None):
        self.F = _as_fiber(F1)
        self.box = np.asarray(box, dtype=float)
        self.n = self.box.shape[0]
        self.resolution = int(resolution)
        self.order = order
        self.shape = (self.resolution + 1,) * self.n
        self.axes = [np.linspace(lo, hi, self.resolution + 1) for lo, hi in self.box]
        self.step = (self.box[:, 1] - self.box[:, 0]) / self.resolution
        grids = np.meshgrid(*self.axes, indexing="ij")
        self.nodes = np.stack([g.ravel() for g in grids], axis=1)
        self.alive = np.ones(len(self.nodes), bool) if mask is None else np.array(
            [bool(mask(p)) for p in self.nodes])
        self.mask = mask
        self.graph = self._build()
        self._rgraph = None

    def _build(self):
        idx = np.indices(self.shape).reshape(self.n, -1).T
        rows, cols, wts = [], [], []
        for off in lattice_offsets(self.n, self.order):
            tgt = idx + off
            ok = np.all((tgt >= 0) & (tgt <= self.resolution), axis=1)
            src = np.flatnonzero(ok)
            dst = np.ravel_multi_index(tgt[ok].T, self.shape)
            keep = self.alive[src] & self.alive[dst]
            src, dst = src[keep], dst[keep]
            if src.size == 0:
                continue
            edge = off * self.step
            mid = self.nodes[src] + 0.5 * edge
            if self.mask is not None:
                mk = np.array([bool(self.mask(p)) for p in mid])
                src, dst, mid = src[mk], dst[mk], mid[mk]
            w = evaluate_batch(self.F, mid, np.broadcast_to(edge, mid.shape))
            rows.append(src)
            cols.append(dst)
            wts.append(w)
        N = len(self.nodes)
        return sparse.csr_matrix((np.concatenate(wts), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(N, N))

    def node_of(self, x):
        x = as_array(x)
        if x.size != self.n or np.any(x < self.box[:, 0] - 1e-12) or np.any(x > self.box[:, 1] + 1e-12):
            raise OutOfBox(f"point {tuple(x)} outside the grid box")
        k = np.rint((x - self.box[:, 0]) / self.step).astype(int)
        k = np.clip(k, 0, self.resolution)
        i = int(np.ravel_multi_index(k, self.shape))
        if not self.alive[i]:
            raise OutOfBox(f"point {tuple(x)} lies in the masked region")
        return i

    def field_from(self, x0):
        """Distances ``d(x0 -> node)`` for all nodes (``inf`` if unreachable)."""
        return csgraph.dijkstra(self.graph, directed=True, indices=self.node_of(x0))

    def field_to(self, x1):
        """Distances ``d(node -> x1)`` via the transposed graph."""
        if self._rgraph is None:
            self._rgraph = self.graph.T.tocsr()
        return csgraph.dijkstra(self._rgraph, directed=True, indices=self.node_of(x1))

    def distance(self, x0, x1):
        return float(self.field_from(x0)[self.node_of(x1)])

    def as_array(self, field_values):
        return np.asarray(field_values).reshape(self.shape)


def finsler_distance(F1, x0, x1, method="shooting", box=None, resolution=200, order=1,
                     mask=None, tol=1e-8, grid=None):
    """Distance ``d(x0 -> x1)`` of the Finsler metric ``F1`` (argument order matters)."""
    x0, x1 = as_array(x0), as_array(x1)
    if np.array_equal(x0, x1):
        return 0.0
    if method == "shooting":
        return geodesic_bvp_shoot(F1, x0, x1, tol, chart=mask).length
    if method == "grid":
        if grid is None:
            if box is None:
                raise OutOfBox("the grid method needs a bounding box")
            grid = DistanceGrid(F1, box, resolution, order, mask)
        return grid.distance(x0, x1)
    raise ValueError(f"unknown method {method!r}")


# balls -------------------------------------------------------------------------------------

@dataclass
class BallBoundary:
    center: np.ndarray
    radius: float
    kind: BallKind
    directions: np.ndarray  # unit chart directions from the center to each boundary point
    points: np.ndarray
    initial_velocities: Optional[np.ndarray] = None
    tol: float = 0.0
    method: str = "shooting"
    ray_lengths: Optional[np.ndarray] = None  # metric length of each ray (shooting)

    @property
    def worst_radius_error(self):
        if self.ray_lengths is None:
            return math.nan
        return float(np.max(np.abs(self.ray_lengths - self.radius)))

    @property
    def angles(self):
        return np.arctan2(self.directions[:, 1], self.directions[:, 0])

    @property
    def extents(self):
        """Chart distances from the center to each boundary point."""
        return np.linalg.norm(self.points - self.center, axis=1)

    def csv_rows(self, t=""):
        for a, p in zip(self.angles, self.points):
            yield [self.kind.value, t, self.radius, a, *p]

    def radial_function(self):
        """Boundary extent as a function of the chart direction (n = 2 only)."""
        if self.center.size != 2:
            raise ValueError("radial functions are for planar balls")
        order = np.argsort(self.angles)
        a, rho = self.angles[order], self.extents[order]
        a = np.concatenate([a, [a[0] + 2 * math.pi]])
        rho = np.concatenate([rho, [rho[0]]])
        spline = CubicSpline(a, rho, bc_type="periodic")
        return lambda phi: spline((np.asarray(phi) - a[0]) % (2 * math.pi) + a[0])

    def contains(self, x, tol=1e-9):
        """Strict membership in the open ball, using the sampled boundary."""
        d = as_array(x) - self.center
        dist = float(np.linalg.norm(d))
        if dist == 0.0:
            return True
        if self.center.size == 2:
            rho = float(self.radial_function()(math.atan2(d[1], d[0])))
            return dist < rho - tol * max(1.0, self.radius)
        hull = self._hull()
        eq = hull.equations
        return bool(np.all(eq[:, :-1] @ as_array(x) + eq[:, -1] < -tol * max(1.0, self.radius)))

    def _hull(self):
        if not hasattr(self, "_hull_cache"):
            self._hull_cache = ConvexHull(self.points)
        return self._hull_cache


def ball_boundary(F1, center, r, kind=BallKind.FORWARD, n_dirs=64, method="shooting",
                  grid=None, tol=1e-6, threads=None, mask=None):
    """Boundary of ``B+(center, r)`` (forward) or ``B-(center, r)`` (backward).

    ``shooting``: unit-speed geodesic rays of ``F1`` (of the reversed
    metric for backward balls) integrated to length ``r``; the initial
    velocities are the chart directions rescaled to ``F1 = 1``.  Integration
    runs at ``tol * r`` accuracy.  ``grid``: bisection along chart rays for
    the crossing of the level ``r`` in the lattice distance field.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    kind = BallKind(kind)
    center = as_array(center)
    n = center.size
    F = _as_fiber(F1)
    G = F if kind is BallKind.FORWARD else reversed_metric(F)
    dirs = _directions(n, n_dirs)
    if method == "shooting":
        ode_tol = min(1e-10, tol * r * 1e-2)

        def ray(d):
            u = d / G.at(center, d)
            tr = finsler_energy_ivp(G, center, u, (0.0, r), ode_tol, s_eval=[0.0, r], chart=mask, n=n)
            return u, tr.x[-1], tr.length[-1]

        res = pmap(ray, list(dirs), threads)
        us = np.array([u for u, _, _ in res])
        pts = np.array([p for _, p, _ in res])
        lengths = np.array([ell for _, _, ell in res])
    elif method == "grid":
        if grid is None:
            raise ValueError("the grid method needs a DistanceGrid")
        fld = grid.field_from(center) if kind is BallKind.FORWARD else grid.field_to(center)
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator(grid.axes, grid.as_array(fld), bounds_error=False,
                                         fill_value=np.inf)
        reach = float(np.min(grid.box[:, 1] - grid.box[:, 0]))
        pts = []
        for d in dirs:
            lo, hi = 0.0, reach
            while interp(center + hi * d)[0] <= r and hi < 4 * reach:
                hi *= 1.5
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if interp(center + mid * d)[0] < r:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= tol * r:
                    break
            pts.append(center + 0.5 * (lo + hi) * d)
        pts = np.array(pts)
        us = lengths = None
    else:
        raise ValueError(f"unknown method {method!r}")
    off = pts - center
    norms = np.linalg.norm(off, axis=1)
    dirs_out = off / np.where(norms > 0, norms, 1.0)[:, None]
    return BallBoundary(center, float(r), kind, dirs_out, pts, us, tol, method, lengths)


# chronological sets ------------------------------------------------------------------------

@dataclass
class ChronoSet:
    base_point: np.ndarray  # (t0, x0)
    sign: TimeSign
    slices: list  # (t, BallBoundary)
    metric: FiberLagrangian
    ball_kind: BallKind
    time_direction: float  # +1: slices at t0 + r, -1: at t0 - r
    n_dirs: int = 128
    _cache: dict = field(default_factory=dict, repr=False)

    def slice_at_radius(self, r):
        for t, b in self.slices:
            if abs(b.radius - r) <= 1e-14 * max(1.0, r):
                return b
        if r not in self._cache:
            self._cache[r] = ball_boundary(self.metric, self.base_point[1:], r, self.ball_kind,
                                           self.n_dirs)
        return self._cache[r]

    def contains(self, q, tol=1e-9):
        """Membership of ``q = (t, x)``: the slice at ``t`` must contain ``x`` strictly."""
        q = as_array(q)
        r = self.time_direction * (q[0] - self.base_point[0])
        if r <= 0:
            return False
        return self.slice_at_radius(r).contains(q[1:], tol)

    def csv_rows(self):
        for t, b in self.slices:
            yield from b.csv_rows(t)


def chronological_set(L, p0, radii, n_dirs=128, sign=TimeSign.FUTURE, rng=None, check=True,
                      threads=None):
    """Slices of ``I+(p0)`` or ``I-(p0)`` as stacked optical-metric balls.

    Upper and full cones use ``F_B``: the future is ``{t0 + r} x B+(x0, r)``
    and the past ``{t0 - r} x B-(x0, r)``.  Lower cones use ``F_B-`` with
    time reversed: the future is ``{t0 - r} x B+(x0, r)`` and the past
    ``{t0 + r} x B-(x0, r)``.
    """
    sign = TimeSign(sign)
    p0 = as_array(p0)
    pair = optical_metrics(L)
    lower = L.cone.kind is ConeKind.LOWER_HALF
    if check:
        hyp = fermat_hypotheses(L, rng if rng is not None else np.random.default_rng(0),
                                points=20, directions=24)
        which = "past" if lower else "future"
        if not getattr(hyp, which):
            raise HypothesisViolated(which, "; ".join(hyp.failed(which)))
    metric = pair.f_b_minus if lower else pair.f_b
    kind = BallKind.FORWARD if sign is TimeSign.FUTURE else BallKind.BACKWARD
    direction = 1.0 if (sign is TimeSign.FUTURE) != lower else -1.0
    slices = []
    for r in radii:
        b = ball_boundary(metric, p0[1:], r, kind, n_dirs, threads=threads)
        slices.append((float(p0[0] + direction * r), b))
    return ChronoSet(p0, sign, slices, metric, kind, direction, n_dirs)


# causal simplicity evidence --------------------------------------------------------------------

@dataclass
class ConnectednessEvidence:
    pairs: int
    successes: int
    failures: list  # (x, y) pairs without a connecting geodesic inside the region
    max_relative_gap: float

    @property
    def success_rate(self):
        return self.successes / self.pairs if self.pairs else math.nan


@dataclass
class CompletenessEvidence:
    rays: int
    exited_box: int
    stalled_inside: list  # (direction, parameter reached, reason)


@dataclass
class IntersectionEvidence:
    x: np.ndarray
    y: np.ndarray
    r: float
    s: float
    cells: int
    touches_box: bool

    @property
    def bounded(self):
        return not self.touches_box

    @property
    def nonempty(self):
        return self.cells > 0


@dataclass
class Causality2Evidence:
    label: str
    connectedness: ConnectednessEvidence
    completeness: CompletenessEvidence
    intersection: IntersectionEvidence


def _sample_in(box, rng, mask, k):
    box = np.asarray(box, float)
    out = []
    while len(out) < k:
        p = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(box.shape[0])
        if mask is None or mask(p):
            out.append(p)
    return out


def _sample_nodes(grid, rng, k, margin=0.1):
    """Random live lattice nodes away from the box faces (no snapping error)."""
    lo = grid.box[:, 0] + margin * (grid.box[:, 1] - grid.box[:, 0])
    hi = grid.box[:, 1] - margin * (grid.box[:, 1] - grid.box[:, 0])
    ok = grid.alive & np.all((grid.nodes >= lo) & (grid.nodes <= hi), axis=1)
    idx = rng.choice(np.flatnonzero(ok), size=k, replace=False)
    return [grid.nodes[i].copy() for i in idx]


def _box_exit_ray(F, x0, u, box, s_max, mask):
    """Follow a ray until it leaves the box; anything else stopping it is reported."""
    box = np.asarray(box, float)
    where = {}

    def chart(x):
        if not (np.all(x >= box[:, 0]) and np.all(x <= box[:, 1])):
            where["why"] = "exit"
            return False
        if mask is not None and not mask(x):
            where["why"] = "masked region reached"
            return False
        return True

    try:
        finsler_energy_ivp(F, x0, u, (0.0, s_max), 1e-9, s_eval=[0.0, s_max], chart=chart)
    except IntegrationError as exc:
        return where.get("why", str(exc)), exc.s
    return "ray stayed inside the box", s_max


def _default_lens(grid):
    """Two points on a horizontal line of the box with radii 3/4 of their distance."""
    box = grid.box
    w = box[:, 1] - box[:, 0]
    center = box.mean(axis=1)
    for off in (0.0, 0.3, -0.3):
        x, y = center.copy(), center.copy()
        x[0] -= 0.15 * w[0]
        y[0] += 0.15 * w[0]
        if grid.n > 1:
            x[1] += off * w[1]
            y[1] += off * w[1]
        try:
            dxy = grid.distance(x, y)
        except OutOfBox:
            continue
        if np.isfinite(dxy):
            return x, y, 0.75 * dxy, 0.75 * dxy
    raise OutOfBox("no admissible default lens points")


def causality2_evidence(F1, box, resolution=200, rng=None, pairs=10, rays=16, mask=None,
                        order=2, lens=None, threads=None):
    """Desk-scale evidence on geodesic connectedness, completeness and ball intersections.

    (1) random pairs are shot inside the region and compared with grid
    distances; (2) unit-speed rays from the box center are followed until
    they leave the box or the admissible region; (3) the lattice set
    ``{d(x, .) <= r} & {d(., y) <= s}`` is tested for touching the box.
    ``lens = (x, y, r, s)`` picks the intersection data (default: two
    points on the horizontal midline of the box).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    box = np.asarray(box, float)
    F = _as_fiber(F1)
    grid = DistanceGrid(F, box, resolution, order, mask)
    n = box.shape[0]

    pts = _sample_nodes(grid, rng, 2 * pairs)
    plist = list(zip(pts[::2], pts[1::2]))

    def one(pq):
        x, y = pq
        dg = grid.distance(x, y)
        try:
            sr = geodesic_bvp_shoot(F, x, y, chart=mask)
        except NoConvergence:
            return False, math.nan
        return True, abs(sr.length - dg) / max(dg, 1e-12)

    res = pmap(one, plist, threads)
    ok = sum(1 for s, _ in res if s)
    fails = [pq for pq, (s, _) in zip(plist, res) if not s]
    gaps = [g for s, g in res if s]
    conn = ConnectednessEvidence(len(plist), ok, fails, float(max(gaps)) if gaps else math.nan)

    center = box.mean(axis=1)
    if mask is not None and not mask(center):
        center = _sample_nodes(grid, rng, 1)[0]
    s_max = 10.0 * float(np.max(box[:, 1] - box[:, 0])) * max(
        1.0, max(F.at(center, d) for d in _directions(n, 8)))
    exited, stalled = 0, []
    for d in _directions(n, rays):
        u = d / F.at(center, d)
        status, s_stop = _box_exit_ray(F, center, u, box, s_max, mask)
        if status == "exit":
            exited += 1
        else:
            stalled.append((d, s_stop, status))
    comp = CompletenessEvidence(rays, exited, stalled)

    if lens is None:
        lens = _default_lens(grid)
    x, y, r, s = lens
    fx = grid.as_array(grid.field_from(x))
    fy = grid.as_array(grid.field_to(y))
    inter = (fx <= r) & (fy <= s)
    touches = False
    for ax in range(n):
        touches |= bool(np.any(np.take(inter, 0, axis=ax)) or np.any(np.take(inter, -1, axis=ax)))
    isect = IntersectionEvidence(as_array(x), as_array(y), float(r), float(s), int(inter.sum()), touches)
    return Causality2Evidence("EVIDENCE", conn, comp, isect)


def punctured_mask(center, radius):
    """Admissible region outside the closed disk/ball ``|x - center| <= radius``."""
    c = as_array(center)
    return lambda x: float(np.linalg.norm(np.asarray(x, float) - c)) > radius


def ball_csv_header(n):
    return ["kind", "t", "r", "direction-angle"] + [f"boundary-x{i}" for i in range(1, n + 1)]
