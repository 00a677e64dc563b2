import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stationary_finsler.types import (
    FULL,
    LOWER,
    UPPER,
    BasePoint,
    ConeKind,
    ConeSpec,
    SpacetimeVector,
    SpaceVector,
    SymBilinear,
    in_cone,
)


def test_upper_interior():
    assert in_cone(UPPER, [1.0, 1.0, 0.0])


def test_upper_on_time_axis():
    assert not in_cone(UPPER, [1.0, 0.0, 0.0])


def test_full_slit_negative_tau():
    assert in_cone(FULL, [-3.0, 1.0, 0.0])


def test_lower_mirror():
    assert in_cone(LOWER, [-1.0, 0.3, 0.0])
    assert not in_cone(LOWER, [1.0, 0.3, 0.0])


def test_zero_vector_outside_every_cone():
    for c in (UPPER, LOWER, FULL):
        assert not in_cone(c, [0.0, 0.0, 0.0])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(1e-3, 1e3),
       st.sampled_from([UPPER, LOWER, FULL]))
def test_cone_membership_is_scale_free(w, lam, cone):
    w = np.array(w)
    assert in_cone(cone, w) == in_cone(cone, lam * w)


def test_guard_must_be_positive():
    with pytest.raises(ValueError):
        ConeSpec(ConeKind.UPPER_HALF, 0.0)


def test_points_reject_non_finite():
    with pytest.raises(ValueError):
        BasePoint((1.0, float("nan")))


def test_spacetime_vector_array():
    w = SpacetimeVector(2.0, SpaceVector((1.0, 0.0)))
    assert np.asarray(w).tolist() == [2.0, 1.0, 0.0]


def test_sym_bilinear_symmetrises_and_evaluates():
    m = SymBilinear(np.array([[1.0, 2.0], [0.0, 3.0]]))
    assert np.array_equal(m.entries, m.entries.T)
    assert m([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)
