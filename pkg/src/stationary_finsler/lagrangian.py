"""Stationary splitting Lagrangians ``L = -Lam tau^2 + 2 B(v) tau + F^2(v)``.

A :class:`SpacetimeLagrangian` is a chart-local function of a spacetime
point ``z = (t, x1..xn)`` and a vector ``w = (tau, v1..vn)``.  Component
functions are written against :mod:`stationary_finsler.ad` primitives so
the same code evaluates floats and Taylor numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import ad
from .errors import DomainError, NonPositiveLambda, OutsideCone
from .types import ConeSpec, as_array, in_cone


@dataclass(frozen=True)
class ScalarField:
    """A function of the base point, ``fn(x)`` with ``x`` a sequence."""

    fn: Callable
    name: str = ""

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class FiberLagrangian:
    """A fiberwise homogeneous function ``fn(x, v)`` of degree 1 or 2.

    ``linear`` marks one-forms (so ``B(-v) = -B(v)`` holds exactly and the
    function is smooth across ``v = 0``).  ``coefficients(x)``, when given,
    returns the one-form components (degree 1) or the Gram matrix
    (degree 2) so that fiber derivatives can be read off without AD.
    """

    fn: Callable
    degree: int
    smooth_off_zero: bool = True
    name: str = ""
    linear: bool = False
    coefficients: Optional[Callable] = None

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError("degree must be 1 or 2")

    def __call__(self, x, v):
        return self.fn(x, v)

    def at(self, x, v):
        """Float value at array-like ``x``, ``v``."""
        return ad.value_of(self.fn(list(as_array(x)), list(as_array(v))))


def constant_field(c, name=""):
    return ScalarField(lambda x: c, name or f"const {c!r}")


def one_form(coeffs, name="one-form"):
    """``B(x, v) = sum_i coeffs(x)[i] * v_i``; ``coeffs`` maps x to a list."""

    def fn(x, v):
        cs = coeffs(x)
        out = 0.0
        for c, vi in zip(cs, v):
            out = out + c * vi
        return out

    return FiberLagrangian(fn, 1, name=name, linear=True, coefficients=coeffs)


def zero_form(name="zero"):
    return FiberLagrangian(lambda x, v: 0.0, 1, name=name, linear=True,
                           coefficients=lambda x: [0.0] * len(x))


def euclidean_f2(name="euclidean"):
    def fn(x, v):
        out = 0.0
        for vi in v:
            out = out + vi * vi
        return out

    return FiberLagrangian(fn, 2, name=name, coefficients=lambda x: np.eye(len(x)))


def quadratic_f2(matrix, name="quadratic"):
    """``F^2 = v^T g(x) v`` with ``matrix(x)`` a nested list."""

    def fn(x, v):
        g = matrix(x)
        out = 0.0
        for i, vi in enumerate(v):
            row = 0.0
            for j, vj in enumerate(v):
                row = row + g[i][j] * vj
            out = out + vi * row
        return out

    return FiberLagrangian(fn, 2, name=name, coefficients=matrix)


@dataclass(frozen=True)
class SpacetimeLagrangian:
    """A Lorentz-Finsler function on one chart of ``R x M``.

    ``value_fn(z, w)`` is the full Lagrangian.  Splitting entries also
    carry ``lam``, ``b`` and ``f2`` so that optical metrics and index
    checks can use the components directly.  ``domain(x, v)`` is an extra
    fiberwise predicate (beyond the cone) required by derivative-taking
    operations, called as ``domain(x, w, margin)`` with a relative margin;
    ``chart(x)`` restricts base points.  ``sample_box`` bounds the base
    region used by the built-in samplers and ``plane_guard`` makes them
    avoid velocities close to coordinate planes.
    """

    n: int
    value_fn: Callable
    cone: ConeSpec
    y_field_sign: int = 1
    lam: Optional[ScalarField] = None
    b: Optional[FiberLagrangian] = None
    f2: Optional[FiberLagrangian] = None
    name: str = ""
    domain: Optional[Callable] = None
    chart: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    kind: str = "example"
    time_independent: bool = True
    sample_box: tuple = ()
    plane_guard: float = 0.0

    @property
    def is_splitting(self):
        return self.lam is not None and self.b is not None and self.f2 is not None

    def value(self, z, w):
        """Lagrangian at sequences ``z``, ``w`` (floats or Taylor numbers)."""
        return self.value_fn(z, w)

    def __call__(self, z, w):
        return ad.value_of(self.value_fn(list(as_array(z)), list(as_array(w))))

    # split components at float arguments
    def lam_at(self, x):
        return ad.value_of(self.lam(list(as_array(x))))

    def b_at(self, x, v):
        return self.b.at(x, v)

    def f2_at(self, x, v):
        return self.f2.at(x, v)

    def in_chart(self, x):
        return self.chart is None or bool(self.chart(as_array(x)))

    def require(self, z, w):
        """Raise unless ``w`` is a legal point for derivatives of L."""
        z, w = as_array(z), as_array(w)
        if z.size != self.n + 1 or w.size != self.n + 1:
            raise ValueError(f"expected {self.n + 1} components, got {z.size} and {w.size}")
        if not in_cone(self.cone, w):
            raise OutsideCone(w, self.cone)
        if not self.in_chart(z[1:]):
            raise DomainError(self.name or "lagrangian", tuple(z), "base point outside the chart")
        if self.domain is not None and not self.domain(z[1:], w, 0.0):
            raise DomainError(self.name or "lagrangian", tuple(w), "vector outside the domain")


def _checked_lambda(lam, x):
    val = lam(x)
    if not ad.value_of(val) > 0.0:
        raise NonPositiveLambda([ad.value_of(c) for c in x], ad.value_of(val))
    return val


def make_stationary_splitting(lam, b, f2, cone, n, *, y_field_sign=1, name="", domain=None,
                              chart=None, params=None, kind="example", sample_box=(),
                              plane_guard=0.0):
    """Assemble ``L(tau, v) = -lam tau^2 + 2 b(v) tau + f2(v)``."""
    if b.degree != 1 or f2.degree != 2:
        raise ValueError("b must have degree 1 and f2 degree 2")

    def value_fn(z, w):
        x = z[1:]
        tau, v = w[0], w[1:]
        return -_checked_lambda(lam, x) * tau * tau + 2.0 * b(x, v) * tau + f2(x, v)

    return SpacetimeLagrangian(
        n=int(n), value_fn=value_fn, cone=cone, y_field_sign=y_field_sign,
        lam=lam, b=b, f2=f2, name=name, domain=domain, chart=chart,
        params=dict(params or {}), kind=kind, sample_box=tuple(sample_box),
        plane_guard=plane_guard,
    )


# derivatives ---------------------------------------------------------------

def fiber_jet(L, z, w):
    """Jet of ``L(z, .)`` at ``w`` in the fiber variables only."""
    zl = list(as_array(z))
    return ad.jet2(lambda ws: L.value(zl, ws), w)


def full_jet(L, z, w):
    """Jet of ``L`` in all ``2(n+1)`` variables ``(z, w)``."""
    z, w = as_array(z), as_array(w)
    m = z.size

    def f(u):
        return L.value(u[:m], u[m:])

    return ad.jet2(f, np.concatenate([z, w]))


def fiber_gradient_fd(L, z, w, h=1e-6):
    """Central-difference fiber gradient, used where jets are undefined."""
    z, w = as_array(z), as_array(w)
    g = np.empty(w.size)
    for i in range(w.size):
        e = np.zeros(w.size)
        e[i] = h
        g[i] = (L(z, w + e) - L(z, w - e)) / (2 * h)
    return g
