"""Chart-level domain types and the cone guard.

Points and vectors are thin immutable wrappers around float tuples; every
operation in the package also accepts plain array-likes laid out as
``(t, x1..xn)`` for spacetime points and ``(tau, v1..vn)`` for spacetime
vectors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


def _finite_tuple(values, what):
    out = tuple(float(c) for c in values)
    if not all(math.isfinite(c) for c in out):
        raise ValueError(f"{what} has non-finite entries: {out}")
    return out


@dataclass(frozen=True)
class BasePoint:
    coords: tuple

    def __post_init__(self):
        c = _finite_tuple(np.ravel(self.coords), "BasePoint")
        if len(c) < 1:
            raise ValueError("BasePoint needs n >= 1 coordinates")
        object.__setattr__(self, "coords", c)

    @property
    def n(self):
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype or float)


@dataclass(frozen=True)
class SpaceVector:
    comps: tuple

    def __post_init__(self):
        object.__setattr__(self, "comps", _finite_tuple(np.ravel(self.comps), "SpaceVector"))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.comps, dtype=dtype or float)


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: BasePoint

    def __post_init__(self):
        object.__setattr__(self, "t", _finite_tuple([self.t], "SpacetimePoint.t")[0])
        if not isinstance(self.x, BasePoint):
            object.__setattr__(self, "x", BasePoint(self.x))

    def __array__(self, dtype=None, copy=None):
        return np.asarray((self.t,) + self.x.coords, dtype=dtype or float)


@dataclass(frozen=True)
class SpacetimeVector:
    tau: float
    v: SpaceVector

    def __post_init__(self):
        object.__setattr__(self, "tau", _finite_tuple([self.tau], "SpacetimeVector.tau")[0])
        if not isinstance(self.v, SpaceVector):
            object.__setattr__(self, "v", SpaceVector(self.v))

    def __array__(self, dtype=None, copy=None):
        return np.asarray((self.tau,) + self.v.comps, dtype=dtype or float)


def as_array(obj):
    return np.asarray(obj, dtype=float).ravel()


@dataclass(frozen=True)
class SymBilinear:
    """Symmetric bilinear form in chart components."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("SymBilinear needs a square matrix")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    def __call__(self, u1, u2):
        return float(as_array(u1) @ self.entries @ as_array(u2))

    @property
    def dim(self):
        return self.entries.shape[0]


class ConeKind(str, enum.Enum):
    UPPER_HALF = "UpperHalf"
    LOWER_HALF = "LowerHalf"
    FULL_SLIT = "FullSlit"


@dataclass(frozen=True)
class ConeSpec:
    """One of T+M~ minus T, T-M~ minus T, or TM~ minus T (T = span of d/dt).

    ``guard_eps`` is a relative margin: membership is decided on ratios
    ``tau/|w|`` and ``|v|/|w|`` so the test is scale free.
    """

    kind: ConeKind = ConeKind.FULL_SLIT
    guard_eps: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "kind", ConeKind(self.kind))
        if not self.guard_eps > 0:
            raise ValueError("guard_eps must be > 0")

    @property
    def admits_future(self):
        return self.kind in (ConeKind.UPPER_HALF, ConeKind.FULL_SLIT)

    @property
    def admits_past(self):
        return self.kind in (ConeKind.LOWER_HALF, ConeKind.FULL_SLIT)


UPPER = ConeSpec(ConeKind.UPPER_HALF)
LOWER = ConeSpec(ConeKind.LOWER_HALF)
FULL = ConeSpec(ConeKind.FULL_SLIT)


def in_cone(cone, w):
    w = as_array(w)
    v2 = float(w[1:] @ w[1:])
    norm = math.sqrt(float(w[0]) ** 2 + v2)
    if norm == 0.0:
        return False
    eps = cone.guard_eps * norm
    if not math.sqrt(v2) > eps:
        return False
    if cone.kind is ConeKind.UPPER_HALF:
        return w[0] > eps
    if cone.kind is ConeKind.LOWER_HALF:
        return w[0] < -eps
    return True
