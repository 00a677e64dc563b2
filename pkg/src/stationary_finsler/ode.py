"""Adaptive embedded Runge-Kutta integrators of Dormand-Prince type.

``dopri5`` is the classical 5(4) pair with FSAL; ``dop853`` is the 8(5,3)
pair (coefficients taken from scipy).  Both use a scaled RMS error norm and
a ``0.9 * err**(-1/(q+1))`` step controller.  Steps are clipped so that
requested output parameters are hit exactly, which keeps sampled output
free of interpolation error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scipy.integrate._ivp import dop853_coefficients as _d853

from .errors import DomainError, IntegrationError, StepFailure

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4


def _dopri5_step(f, s, y, k1, hs):
    K = [k1]
    for i in range(1, 7):
        yi = y + hs * sum(a * K[j] for j, a in enumerate(A[i]) if a != 0.0)
        K.append(f(s + C[i] * hs, yi))
    y_new = y + hs * sum(b * K[j] for j, b in enumerate(B5) if b != 0.0)
    err_vec = hs * sum(e * K[j] for j, e in enumerate(E) if e != 0.0)
    return y_new, K[6], lambda sc: float(np.sqrt(np.mean((err_vec / sc) ** 2)))


_A8 = _d853.A[:12, :12]
_C8 = _d853.C[:12]


def _dop853_step(f, s, y, k1, hs):
    K = np.empty((13, y.size))
    K[0] = k1
    for i in range(1, 12):
        K[i] = f(s + _C8[i] * hs, y + hs * (_A8[i, :i] @ K[:i]))
    y_new = y + hs * (_d853.B @ K[:12])
    K[12] = f(s + hs, y_new)

    def norm(sc):
        e5 = (_d853.E5 @ K) / sc
        e3 = (_d853.E3 @ K) / sc
        n5, n3 = float(e5 @ e5), float(e3 @ e3)
        if n5 == 0.0 and n3 == 0.0:
            return 0.0
        return abs(hs) * n5 / np.sqrt((n5 + 0.01 * n3) * sc.size)

    return y_new, K[12], norm


_METHODS = {"dopri5": (_dopri5_step, 5), "dop853": (_dop853_step, 8)}


@dataclass
class OdeResult:
    s: np.ndarray
    y: np.ndarray
    steps: int = 0
    rejected: int = 0
    rtol: float = 0.0
    atol: float = 0.0
    stopped: bool = False
    stop_reason: str = ""
    stats: dict = field(default_factory=dict)


def _initial_step(f, s0, y0, f0, rtol, atol, direction):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    try:
        f1 = f(s0 + direction * h0, y1)
    except DomainError:
        return h0
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(f, s_span, y0, rtol=1e-10, atol=1e-10, s_eval=None, check=None,
           max_steps=1_000_000, h0=None, min_step=1e-14, max_step=np.inf):
    """Integrate ``y' = f(s, y)`` over ``s_span`` with the 5(4) pair."""
    return integrate(f, s_span, y0, rtol, atol, s_eval, check, max_steps, h0, min_step,
                     "dopri5", max_step)


def dop853(f, s_span, y0, rtol=1e-10, atol=1e-10, s_eval=None, check=None,
           max_steps=1_000_000, h0=None, min_step=1e-14, max_step=np.inf):
    """Integrate ``y' = f(s, y)`` over ``s_span`` with the 8(5,3) pair."""
    return integrate(f, s_span, y0, rtol, atol, s_eval, check, max_steps, h0, min_step,
                     "dop853", max_step)


def integrate(f, s_span, y0, rtol=1e-10, atol=1e-10, s_eval=None, check=None,
              max_steps=1_000_000, h0=None, min_step=1e-14, method="dop853", max_step=np.inf):
    """Integrate ``y' = f(s, y)`` over ``s_span`` with ``method`` (dopri5 or dop853).

    ``s_eval`` (sorted, inside the span) selects output parameters; when it
    is omitted every accepted step is recorded.  ``check(s, y)`` runs after
    each accepted step and may raise an :class:`IntegrationError` subclass
    to stop the run, or return a string to stop it quietly with that reason.
    ``max_step`` caps the step so that ``check`` sees the solution densely.
    A ``DomainError`` inside a trial stage rejects the step; if the step
    shrinks below ``min_step`` a :class:`StepFailure` is raised.
    """
    step, order = _METHODS[method]
    expo = -1.0 / order
    s0, s1 = float(s_span[0]), float(s_span[1])
    direction = 1.0 if s1 >= s0 else -1.0
    y = np.array(y0, dtype=float)
    s = s0
    if s_eval is None:
        targets = []
        out_s, out_y = [s0], [y.copy()]
    else:
        ev = [float(t) for t in s_eval]
        targets = [t for t in ev if direction * (t - s0) > 0]
        keep0 = any(t == s0 for t in ev)
        out_s, out_y = ([s0], [y.copy()]) if keep0 else ([], [])
    end = s1
    if s1 == s0:
        return OdeResult(np.array(out_s), np.array(out_y), rtol=rtol, atol=atol)

    k1 = f(s, y)
    h = h0 if h0 is not None else _initial_step(f, s, y, k1, rtol, atol, direction)
    steps = rejected = 0
    ti = 0
    span = abs(end - s0)
    while direction * (end - s) > 1e-15 * max(1.0, span):
        if steps + rejected >= max_steps:
            raise StepFailure(s, "maximum number of steps exceeded")
        stop_at = targets[ti] if ti < len(targets) else end
        h = min(h, max_step)
        h_free = h
        hit = False
        if h >= abs(stop_at - s) * (1 - 1e-12):
            h = abs(stop_at - s)
            hit = True
        if h < min_step * max(1.0, abs(s)):
            raise StepFailure(s, f"step size underflow (h={h:.3g})")
        hs = direction * h
        try:
            y_new, k_last, err_norm = step(f, s, y, k1, hs)
        except DomainError:
            rejected += 1
            h *= 0.25
            continue
        if not np.all(np.isfinite(y_new)):
            rejected += 1
            h *= 0.25
            continue
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = err_norm(sc)
        if err <= 1.0:
            s = stop_at if hit else s + hs
            y = y_new
            k1 = k_last
            steps += 1
            if s_eval is None:
                out_s.append(s)
                out_y.append(y.copy())
            elif hit and ti < len(targets):
                out_s.append(s)
                out_y.append(y.copy())
                ti += 1
            if check is not None:
                reason = check(s, y)
                if reason:
                    return OdeResult(np.array(out_s), np.array(out_y), steps, rejected, rtol, atol,
                                     True, str(reason))
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** expo))
            # a step shortened to land on an output point does not shrink the next one
            h = max(h * fac, h_free) if hit else h * fac
        else:
            rejected += 1
            h *= max(0.2, 0.9 * err ** expo)
    return OdeResult(np.array(out_s), np.array(out_y), steps, rejected, rtol, atol)


__all__ = ["dopri5", "dop853", "integrate", "OdeResult", "IntegrationError"]
