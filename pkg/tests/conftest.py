import numpy as np
import pytest

from stationary_finsler import ad


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_composition(rng, m, depth=3):
    """A random smooth scalar function of ``m`` variables built from ad primitives.

    Arguments of sqrt and log are kept positive so the function is smooth
    everywhere; returns ``f(u)`` accepting floats or Taylor variables.
    """
    unary = [
        lambda a: ad.sin(a),
        lambda a: ad.cos(a),
        lambda a: ad.exp(0.3 * a),
        lambda a: ad.sqrt(1.0 + a * a),
        lambda a: ad.log(2.0 + ad.sin(a)),
        lambda a: a ** 3,
    ]
    binary = [
        lambda a, b: a + b,
        lambda a, b: a * b,
        lambda a, b: a - 0.5 * b,
        lambda a, b: a / (1.5 + ad.cos(b)),
    ]

    def build(d):
        if d == 0:
            i = int(rng.integers(m))
            c = float(rng.uniform(0.5, 1.5))
            return lambda u, i=i, c=c: c * u[i]
        if rng.random() < 0.4:
            g = unary[int(rng.integers(len(unary)))]
            a = build(d - 1)
            return lambda u, g=g, a=a: g(a(u))
        g = binary[int(rng.integers(len(binary)))]
        a, b = build(d - 1), build(d - 1)
        return lambda u, g=g, a=a, b=b: g(a(u), b(u))

    return build(depth)


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
