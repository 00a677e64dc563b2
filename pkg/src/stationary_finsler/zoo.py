"""Named example Lagrangians and samplers.

Entries of kind ``"example"`` are the standard examples of stationary
splittings (and the Bogoslovsky function as a degeneracy exhibit).
Entries of kind ``"testbed"`` are extra inputs used to exercise the
checkers: Randers-type variations, an indefinite ``B``, a static
splitting, a non-integrable one-form and a time-dependent perturbation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import ad
from . import expr as _expr
from .errors import ParamOutOfRange, UnknownZooEntry
from .lagrangian import (
    FiberLagrangian,
    ScalarField,
    SpacetimeLagrangian,
    constant_field,
    euclidean_f2,
    make_stationary_splitting,
    one_form,
    quadratic_f2,
    zero_form,
)
from .types import ConeKind, ConeSpec, as_array, in_cone


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    lo: float = -math.inf
    hi: float = math.inf
    kind: str = "float"  # float | int | profile
    doc: str = ""

    def coerce(self, value):
        if self.kind == "profile":
            return _profile(value, self.name)
        try:
            num = float(value)
        except (TypeError, ValueError):
            raise ParamOutOfRange(f"{self.name}: expected a number, got {value!r}") from None
        if self.kind == "int":
            if not num.is_integer():
                raise ParamOutOfRange(f"{self.name}: expected an integer, got {value!r}")
            num = int(num)
        if not (self.lo <= num <= self.hi) or not math.isfinite(num):
            raise ParamOutOfRange(f"{self.name}={value!r} outside [{self.lo}, {self.hi}]")
        return num


def _profile(value, name):
    """A radial profile: a number, a callable of r, or an expression in r."""
    if callable(value):
        return value
    if isinstance(value, str):
        try:
            c = float(value)
        except ValueError:
            tree = _expr.parse(value, ["r"])
            return lambda r, tree=tree: _expr.evaluate(tree, {"r": r})
        return lambda r, c=c: c
    if isinstance(value, (int, float)):
        c = float(value)
        return lambda r, c=c: c
    raise ParamOutOfRange(f"{name}: a profile must be a number, expression or callable")


@dataclass(frozen=True)
class ZooEntry:
    name: str
    builder: Callable
    params: tuple
    kind: str = "example"
    doc: str = ""

    def resolve(self, params):
        params = dict(params or {})
        known = {p.name: p for p in self.params}
        unknown = set(params) - set(known)
        if unknown:
            raise ParamOutOfRange(f"unknown parameters for {self.name}: {sorted(unknown)}")
        out = {}
        for p in self.params:
            out[p.name] = p.coerce(params.get(p.name, p.default))
        return out

    def build(self, params=None):
        return self.builder(self.resolve(params))


# example entries -------------------------------------------------------------

def _flat_randers(p):
    n, b = p["n"], p["b"]
    return make_stationary_splitting(
        constant_field(1.0, "1"),
        one_form(lambda x: [b] + [0.0] * (n - 1), name=f"{b} dx1"),
        euclidean_f2(),
        ConeSpec(ConeKind.FULL_SLIT), n,
        name="flat_randers", params=p, sample_box=((-2.0, 2.0),) * n,
    )


def _standard_stationary(p):
    la, wa, ga = p["lambda_amp"], p["omega_amp"], p["g_amp"]

    def lam(x):
        return 1.0 + la * ad.sin(x[0]) * ad.cos(x[1])

    def omega(x):
        return [wa * ad.cos(x[1]), 0.5 * wa * ad.sin(x[0])]

    def g(x):
        s2 = ad.sin(x[1])
        c1 = ad.cos(x[0])
        g12 = ga * ad.sin(x[0] + x[1])
        return [[1.0 + ga * s2 * s2, g12], [g12, 1.0 + ga * c1 * c1]]

    return make_stationary_splitting(
        ScalarField(lam, "1 + a sin x1 cos x2"), one_form(omega, "omega"), quadratic_f2(g, "g"),
        ConeSpec(ConeKind.FULL_SLIT), 2,
        name="standard_stationary", params=p, sample_box=((-math.pi, math.pi),) * 2,
    )


def _kerr_perturbation(p):
    M, a = p["M"], p["a"]
    if abs(a) > M:
        raise ParamOutOfRange(f"|a|={abs(a)} exceeds M={M}")
    psi = [p["psi0"], p["psi1"], p["psi2"], p["psi3"]]

    def parts(x):
        r, th = x[0], x[1]
        ct, st = ad.cos(th), ad.sin(th)
        rho2 = r * r + a * a * ct * ct
        return r, st, rho2

    def lam(x):
        r, _, rho2 = parts(x)
        return 1.0 - 2.0 * M * r / rho2 + psi[0](r)

    def bfun(x, v):
        r, st, rho2 = parts(x)
        return -(M * r * a * st * st / rho2) * v[2]

    def f2(x, v):
        r, st, rho2 = parts(x)
        delta = r * r - 2.0 * M * r + a * a
        rho4 = rho2 * rho2
        s2 = st * st
        k = r * r + a * a + 2.0 * M * a * a * s2 / rho2
        c1 = rho4 / (delta * delta) + psi[1](r)
        c2 = rho4 + psi[2](r)
        c3 = k * k * s2 * s2 + psi[3](r)
        vr, vt, vp = v[0], v[1], v[2]
        return ad.sqrt(c1 * ad.power(vr, 4) + c2 * ad.power(vt, 4) + c3 * ad.power(vp, 4))

    def chart(x):
        r, th = x[0], x[1]
        return r > 0 and 0 < th < math.pi and r * r - 2 * M * r + a * a != 0

    rh = M + math.sqrt(max(M * M - a * a, 0.0))
    r_lo = 2.0 * M + 1.0 if M > 0 else 1.0
    return make_stationary_splitting(
        ScalarField(lam, "1 - 2Mr/rho^2 + psi0"),
        FiberLagrangian(bfun, 1, name="-(M r a sin^2 / rho^2) dphi", linear=True),
        FiberLagrangian(f2, 2, name="quartic root"),
        ConeSpec(ConeKind.FULL_SLIT), 3,
        name="kerr_perturbation", params={**p, "horizon": rh}, chart=chart,
        sample_box=((max(r_lo, 3.0 * M), 10.0 * M), (0.3, math.pi - 0.3), (0.0, 2 * math.pi)),
        plane_guard=1e-2,
    )


def _rutz(p):
    M, eps = p["M"], p["epsilon"]

    def lam(x):
        return 1.0 - 2.0 * M / x[0]

    def angular(x, v):
        st = ad.sin(x[1])
        return v[1] * v[1] + st * st * v[2] * v[2]

    def bfun(x, v):
        return 0.5 * eps * lam(x) * ad.sqrt(angular(x, v))

    def f2(x, v):
        return v[0] * v[0] / lam(x) + x[0] * x[0] * angular(x, v)

    def chart(x):
        return x[0] > 0 and x[0] != 2 * M and 0 < x[1] < math.pi

    def conic(x, w, margin=0.0):
        v = as_array(w)[1:]
        st = math.sin(x[1])
        ang = v[1] ** 2 + (st * v[2]) ** 2
        return ang > max(margin, 1e-12) ** 2 * float(v @ v)

    if eps == 0:
        kind, b, domain = ConeKind.FULL_SLIT, zero_form(), None
    else:
        kind = ConeKind.UPPER_HALF if eps > 0 else ConeKind.LOWER_HALF
        b, domain = FiberLagrangian(bfun, 1, name="rutz B"), conic

    return make_stationary_splitting(
        ScalarField(lam, "1 - 2M/r"), b, FiberLagrangian(f2, 2, name="schwarzschild spatial"),
        ConeSpec(kind), 3, name="rutz", params=p, chart=chart, domain=domain,
        sample_box=((3.0 * M, 10.0 * M), (0.3, math.pi - 0.3), (0.0, 2 * math.pi)),
    )


def _bogoslovsky(p):
    n, bb = p["n"], p["b"]

    def value_fn(z, w):
        tau, v = w[0], w[1:]
        q = tau * tau
        for vi in v:
            q = q - vi * vi
        return -ad.power(q, 1.0 - bb) * ad.power(tau - v[0], 2.0 * bb)

    def domain(x, w, margin=0.0):
        w = as_array(w)
        nw2 = float(w @ w)
        q = w[0] ** 2 - float(w[1:] @ w[1:])
        return q > margin * nw2 and w[0] - w[1] > margin * math.sqrt(nw2)

    return SpacetimeLagrangian(
        n=n, value_fn=value_fn, cone=ConeSpec(ConeKind.UPPER_HALF), name="bogoslovsky",
        domain=domain, params=p, sample_box=((-2.0, 2.0),) * n,
    )


# testbed entries -------------------------------------------------------------

def _randers_variation(p):
    sign, kappa, om = p["sign"], p["kappa"], p["omega"]
    if sign not in (-1, 1):
        raise ParamOutOfRange("sign must be +1 or -1")

    def bfun(x, v):
        return sign * kappa * (om * v[0] + ad.sqrt(v[0] * v[0] + v[1] * v[1]))

    kind = ConeKind.UPPER_HALF if sign > 0 else ConeKind.LOWER_HALF
    return make_stationary_splitting(
        ScalarField(lambda x: 1.0 + 0.2 * ad.sin(x[0]) * ad.sin(x[1]), "1 + 0.2 sin x1 sin x2"),
        FiberLagrangian(bfun, 1, name="+-kappa(omega + |v|)"), euclidean_f2(),
        ConeSpec(kind), 2, y_field_sign=sign, name="randers_variation", params=p, kind="testbed",
        sample_box=((-2.0, 2.0),) * 2,
    )


def _indefinite_b(p):
    kappa = p["kappa"]

    def bfun(x, v):
        r2 = v[0] * v[0] + v[1] * v[1]
        if not ad.is_jet(r2) and r2 == 0.0:
            return 0.0  # continuous extension to v = 0
        return kappa * (ad.power(v[0], 4) + ad.power(v[1], 4)) / ad.power(r2, 1.5)

    return make_stationary_splitting(
        constant_field(1.0), FiberLagrangian(bfun, 1, name="kappa (v1^4+v2^4)/|v|^3"),
        euclidean_f2(), ConeSpec(ConeKind.UPPER_HALF), 2,
        name="indefinite_b", params=p, kind="testbed", sample_box=((-2.0, 2.0),) * 2,
    )


def _static_b0(p):
    amp = p["amp"]

    def lam(x):
        return 1.0 + amp * ad.sin(x[0]) * ad.cos(x[1]) + 0.5 * amp * ad.sin(x[2])

    def g(x):
        d = amp * ad.cos(x[0] + x[2])
        return [[1.0 + d * d, 0.0, 0.0], [0.0, 1.0, 0.5 * d], [0.0, 0.5 * d, 1.0]]

    return make_stationary_splitting(
        ScalarField(lam, "lambda"), zero_form(), quadratic_f2(g, "g"),
        ConeSpec(ConeKind.FULL_SLIT), 3, name="static_b0", params=p, kind="testbed",
        sample_box=((-2.0, 2.0),) * 3,
    )


def _twisted_oneform(p):
    c = p["c"]
    return make_stationary_splitting(
        constant_field(1.0), one_form(lambda x: [c * x[1], 0.0, 0.0], name="c x2 dx1"),
        euclidean_f2(), ConeSpec(ConeKind.FULL_SLIT), 3,
        name="twisted_oneform", params=p, kind="testbed", sample_box=((-1.0, 1.0),) * 3,
    )


def perturb_in_time(L, amp=0.1):
    """``L`` with ``Lambda`` replaced by ``Lambda (1 + amp sin t)``.

    The result is not a stationary splitting: ``d/dt`` is no longer Killing.
    """
    if not L.is_splitting:
        raise ValueError("time perturbation needs a splitting Lagrangian")
    lam, b, f2 = L.lam, L.b, L.f2

    def value_fn(z, w):
        x = z[1:]
        tau, v = w[0], w[1:]
        lt = lam(x) * (1.0 + amp * ad.sin(z[0]))
        return -lt * tau * tau + 2.0 * b(x, v) * tau + f2(x, v)

    return replace(L, value_fn=value_fn, lam=None, b=None, f2=None,
                   name=f"{L.name}+time", time_independent=False,
                   params={**L.params, "time_amp": amp}, kind="testbed")


def _time_perturbed(p):
    base = _standard_stationary(ZOO["standard_stationary"].resolve({}))
    return perturb_in_time(base, p["amp"])


ZOO = {}


def _register(entry):
    ZOO[entry.name] = entry


_register(ZooEntry("flat_randers", _flat_randers, (
    Param("b", 0.5, -10.0, 10.0, doc="coefficient of the one-form b dx1"),
    Param("n", 2, 1, 3, "int"),
), doc="Lambda=1, B=b dx1, F Euclidean"))
_register(ZooEntry("standard_stationary", _standard_stationary, (
    Param("lambda_amp", 0.25, 0.0, 0.9),
    Param("omega_amp", 0.3, 0.0, 2.0),
    Param("g_amp", 0.1, 0.0, 0.45),
), doc="Lorentzian standard stationary metric on R x R^2"))
_register(ZooEntry("kerr_perturbation", _kerr_perturbation, (
    Param("M", 1.0, 1e-6, 1e6),
    Param("a", 0.5, -1e6, 1e6),
    Param("psi0", 0.0, kind="profile"),
    Param("psi1", 0.0, kind="profile"),
    Param("psi2", 0.0, kind="profile"),
    Param("psi3", 0.0, kind="profile"),
), doc="quartic-root Finsler perturbation of Kerr in (r, theta, phi)"))
_register(ZooEntry("rutz", _rutz, (
    Param("M", 1.0, 1e-6, 1e6),
    Param("epsilon", 0.5, -1.0, 1.0),
), doc="spherically symmetric Finsler solution; B smooth only off the radial directions"))
_register(ZooEntry("bogoslovsky", _bogoslovsky, (
    Param("b", 0.25, 0.0, 0.9),
    Param("n", 3, 1, 3, "int"),
), doc="very special relativity line element, degenerate along (1,1,0..)"))
_register(ZooEntry("randers_variation", _randers_variation, (
    Param("sign", 1, -1, 1, "int"),
    Param("kappa", 0.5, 0.0, 5.0),
    Param("omega", 0.3, -0.99, 0.99),
), kind="testbed", doc="B = sign kappa (omega dx1 + |v|)"))
_register(ZooEntry("indefinite_b", _indefinite_b, (
    Param("kappa", 0.5, 0.0, 5.0),
), kind="testbed", doc="B with an indefinite fiber Hessian"))
_register(ZooEntry("static_b0", _static_b0, (
    Param("amp", 0.2, 0.0, 0.5),
), kind="testbed", doc="B = 0, varying Lambda and F on R^3"))
_register(ZooEntry("twisted_oneform", _twisted_oneform, (
    Param("c", 1.0, -10.0, 10.0),
), kind="testbed", doc="Lambda = 1, B = c x2 dx1 on R^3"))
_register(ZooEntry("time_perturbed", _time_perturbed, (
    Param("amp", 0.1, 0.0, 0.9),
), kind="testbed", doc="standard_stationary with Lambda (1 + amp sin t)"))

EXAMPLE_ENTRIES = tuple(k for k, e in ZOO.items() if e.kind == "example")


def load_zoo(name, params=None):
    try:
        entry = ZOO[name]
    except KeyError:
        raise UnknownZooEntry(name) from None
    return entry.build(params)


def zoo_names(kind=None):
    return [k for k, e in ZOO.items() if kind is None or e.kind == kind]


# samplers ----------------------------------------------------------------------

def sample_base(L, rng, k):
    box = np.asarray(L.sample_box, dtype=float)
    if box.size == 0:
        box = np.array([(-1.0, 1.0)] * L.n)
    return rng.uniform(box[:, 0], box[:, 1], size=(k, L.n))


def sample_vector(L, x, rng, margin=1e-3, tau_range=3.0):
    """One random ``w`` in the cone and domain of ``L`` at base point ``x``.

    Vectors within relative distance ``margin`` of the time axis and,
    when ``L.plane_guard`` is set, near coordinate planes are rejected.
    """
    cone = L.cone
    for _ in range(10000):
        v = rng.normal(size=L.n)
        tau = rng.uniform(-tau_range, tau_range)
        if L.domain is not None and not L.is_splitting:
            # entries defined only inside a causal cone: draw tau above |v|
            tau = float(np.linalg.norm(v)) * rng.uniform(1.05, 3.0)
        if cone.kind is ConeKind.UPPER_HALF:
            tau = abs(tau)
        elif cone.kind is ConeKind.LOWER_HALF:
            tau = -abs(tau)
        w = np.concatenate([[tau], v])
        nw = np.linalg.norm(w)
        if np.linalg.norm(v) < margin * nw or not in_cone(cone, w):
            continue
        if L.plane_guard and np.min(np.abs(v)) < L.plane_guard * np.linalg.norm(v):
            continue
        if L.domain is not None and not L.domain(x, w, margin):
            continue
        return w
    raise RuntimeError(f"could not sample a vector for {L.name}")


def sample_pairs(L, rng, k, margin=1e-3, t_range=5.0):
    """``k`` random ``(z, w)`` with ``w`` in the cone of ``L``."""
    xs = sample_base(L, rng, k)
    ts = rng.uniform(-t_range, t_range, size=k)
    Z = np.column_stack([ts, xs])
    W = np.array([sample_vector(L, x, rng, margin) for x in xs])
    return Z, W
