"""Second-order forward-mode automatic differentiation.

Numbers are truncated multivariate Taylor expansions ``Taylor2(v, g, h)``
holding the value, the gradient and the (full, symmetric) Hessian with
respect to ``m`` seed variables.  Every arithmetic rule below keeps ``h``
exactly symmetric, so a Hessian read out of a result needs no
symmetrisation.

The elementary functions in this module (``sqrt``, ``sin``, ...) dispatch
on their argument: Taylor numbers propagate derivatives, numpy arrays are
handled elementwise (used for vectorised grid evaluation) and plain floats
go through :mod:`math`.  Metric components are written once against these
primitives and can then be evaluated, differentiated or vectorised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from numbers import Real

import numpy as np

from .errors import DomainError

__all__ = [
    "Taylor2", "Jet2", "jet2", "fd_jet2", "value_of", "is_jet",
    "sqrt", "sin", "cos", "exp", "log", "power",
]


class Taylor2:
    __slots__ = ("v", "g", "h")

    def __init__(self, v, g, h):
        self.v = v
        self.g = g
        self.h = h

    def __repr__(self):
        return f"Taylor2({self.v!r}, grad={self.g!r})"

    def __float__(self):
        return float(self.v)

    # arithmetic ------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Taylor2):
            return Taylor2(self.v + other.v, self.g + other.g, self.h + other.h)
        return Taylor2(self.v + other, self.g, self.h)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Taylor2):
            return Taylor2(self.v - other.v, self.g - other.g, self.h - other.h)
        return Taylor2(self.v - other, self.g, self.h)

    def __rsub__(self, other):
        return Taylor2(other - self.v, -self.g, -self.h)

    def __neg__(self):
        return Taylor2(-self.v, -self.g, -self.h)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Taylor2):
            o = self.g[:, None] * other.g
            o += o.T
            o += self.v * other.h
            o += other.v * self.h
            return Taylor2(self.v * other.v, self.v * other.g + other.v * self.g, o)
        return Taylor2(self.v * other, self.g * other, self.h * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Taylor2):
            return self * _reciprocal(other)
        return Taylor2(self.v / other, self.g / other, self.h / other)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)

    def __rpow__(self, base):
        if base <= 0:
            raise DomainError("pow", base, "base of a variable exponent must be > 0")
        return exp(self * math.log(base))

    # comparisons act on the value only
    def __lt__(self, other):
        return self.v < value_of(other)

    def __le__(self, other):
        return self.v <= value_of(other)

    def __gt__(self, other):
        return self.v > value_of(other)

    def __ge__(self, other):
        return self.v >= value_of(other)


def _chain(x, f0, f1, f2):
    return Taylor2(f0, f1 * x.g, f1 * x.h + f2 * (x.g[:, None] * x.g))


def _reciprocal(x):
    if x.v == 0.0:
        raise DomainError("division", 0.0, "division by zero")
    r = 1.0 / x.v
    return _chain(x, r, -r * r, 2.0 * r * r * r)


def is_jet(x):
    return isinstance(x, Taylor2)


def value_of(x):
    """Plain float value of a Taylor number or a real."""
    if isinstance(x, Taylor2):
        return float(x.v)
    return float(x)


# elementary functions ------------------------------------------------------

def sqrt(x):
    if isinstance(x, Taylor2):
        if not x.v > 0.0:
            raise DomainError("sqrt", x.v, "not differentiable at arguments <= 0")
        s = math.sqrt(x.v)
        return _chain(x, s, 0.5 / s, -0.25 / (s * x.v))
    if isinstance(x, np.ndarray):
        if np.any(x < 0):
            raise DomainError("sqrt", float(x.min()))
        return np.sqrt(x)
    if x < 0:
        raise DomainError("sqrt", x)
    return math.sqrt(x)


def sin(x):
    if isinstance(x, Taylor2):
        s, c = math.sin(x.v), math.cos(x.v)
        return _chain(x, s, c, -s)
    if isinstance(x, np.ndarray):
        return np.sin(x)
    return math.sin(x)


def cos(x):
    if isinstance(x, Taylor2):
        s, c = math.sin(x.v), math.cos(x.v)
        return _chain(x, c, -s, -c)
    if isinstance(x, np.ndarray):
        return np.cos(x)
    return math.cos(x)


def exp(x):
    if isinstance(x, Taylor2):
        e = math.exp(x.v)
        return _chain(x, e, e, e)
    if isinstance(x, np.ndarray):
        return np.exp(x)
    return math.exp(x)


def log(x):
    if isinstance(x, Taylor2):
        if not x.v > 0.0:
            raise DomainError("log", x.v)
        r = 1.0 / x.v
        return _chain(x, math.log(x.v), r, -r * r)
    if isinstance(x, np.ndarray):
        if np.any(x <= 0):
            raise DomainError("log", float(x.min()))
        return np.log(x)
    if x <= 0:
        raise DomainError("log", x)
    return math.log(x)


def _int_exponent(p):
    if isinstance(p, (int, np.integer)):
        return int(p)
    if isinstance(p, Real) and float(p).is_integer() and abs(p) < 2**31:
        return int(p)
    return None


def power(x, p):
    """``x**p`` for a constant real exponent ``p``.

    Integer exponents use exact integer powers so that derivatives at zero
    (e.g. of ``y**4``) come out as exact zeros.
    """
    if isinstance(p, Taylor2):
        return exp(p * log(x))
    k = _int_exponent(p)
    if isinstance(x, Taylor2):
        v = x.v
        if k is not None:
            if k == 0:
                return 1.0
            if k == 1:
                return x
            if k == 2:
                return x * x
            if k < 0 and v == 0.0:
                raise DomainError("pow", v, f"negative power {k} of zero")
            if k == 3:
                return _chain(x, v * v * v, 3.0 * v * v, 6.0 * v)
            return _chain(x, v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))
        if not v > 0.0:
            raise DomainError("pow", v, f"fractional power {p} needs a positive base")
        vp = v**p
        return _chain(x, vp, p * vp / v, p * (p - 1.0) * vp / (v * v))
    if isinstance(x, np.ndarray):
        if k is None and np.any(x < 0):
            raise DomainError("pow", float(x.min()))
        return np.power(x, p)
    if k is None and x < 0:
        raise DomainError("pow", x, f"fractional power {p} of a negative number")
    if k is not None and k < 0 and x == 0:
        raise DomainError("pow", x, f"negative power {k} of zero")
    return x**k if k is not None else float(x) ** p


# jets ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _upper_indices(m):
    return np.triu_indices(m)


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar map at one point.

    The Hessian is stored as its packed upper triangle (row major); the
    full matrix is rebuilt by mirroring and is therefore exactly symmetric.
    """

    value: float
    gradient: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_full(cls, value, gradient, hessian):
        iu = _upper_indices(len(gradient))
        return cls(float(value), np.array(gradient, dtype=float),
                   np.array(hessian, dtype=float)[iu])

    @cached_property
    def hessian(self):
        m = len(self.gradient)
        h = np.zeros((m, m))
        iu = _upper_indices(m)
        h[iu] = self.upper
        h.T[iu] = self.upper
        return h


def seed(point):
    """Independent Taylor variables at ``point``."""
    p = np.asarray(point, dtype=float).ravel()
    m = p.size
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return [Taylor2(float(p[i]), eye[i], zero) for i in range(m)]


def jet2(f, point):
    """Exact-to-roundoff value, gradient and Hessian of ``f`` at ``point``.

    ``f`` receives a list of Taylor variables and must be built from the
    arithmetic operators and the primitives of this module.
    """
    p = np.asarray(point, dtype=float).ravel()
    out = f(seed(p))
    m = p.size
    if isinstance(out, Taylor2):
        return Jet2.from_full(out.v, out.g, out.h)
    return Jet2.from_full(float(out), np.zeros(m), np.zeros((m, m)))


def fd_jet2(f, point, h=None):
    """Central-difference value, gradient and Hessian (test oracle).

    Default steps are ``cbrt(eps)*scale`` for the gradient and
    ``eps**0.25*scale`` for the Hessian, with ``scale = max(1, |x_i|)``
    per coordinate.  A scalar ``h`` overrides both.
    """
    p = np.asarray(point, dtype=float).ravel()
    m = p.size
    scale = np.maximum(1.0, np.abs(p))
    eps = np.finfo(float).eps
    if h is None:
        hg = np.cbrt(eps) * scale
        hh = eps**0.25 * scale
    else:
        hg = hh = np.full(m, float(h))

    def F(q):
        return float(f(list(q)))

    f0 = F(p)
    grad = np.empty(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = hg[i]
        grad[i] = (F(p + e) - F(p - e)) / (2 * hg[i])
    hess = np.empty((m, m))
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = hh[i]
        hess[i, i] = (F(p + ei) - 2 * f0 + F(p - ei)) / hh[i] ** 2
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = hh[j]
            d = (F(p + ei + ej) - F(p + ei - ej) - F(p - ei + ej) + F(p - ei - ej))
            hess[i, j] = hess[j, i] = d / (4 * hh[i] * hh[j])
    return Jet2.from_full(f0, grad, hess)
