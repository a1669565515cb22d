import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from funcwave.errors import InvalidParams, NonDifferentiable, OutOfDomain, UnknownKind
from funcwave.geometry import (
    Criticality,
    Interval,
    ProfileKind,
    classify,
    classify_profile,
    make_profile,
    normalize_nu,
    profile_from_json,
    profile_to_json,
    with_nu,
)


def test_interval_rejects_reversed_and_nan():
    with pytest.raises(InvalidParams):
        Interval.closed(1.0, 0.0)
    with pytest.raises(InvalidParams):
        Interval.closed(math.nan, 1.0)


def test_interval_membership_respects_open_ends():
    iv = Interval.half_open(0.0, 1.0)
    assert iv.contains(0.0) and not iv.contains(1.0)
    assert iv.contains(1.0, tol=1e-12)
    np.testing.assert_array_equal(iv.contains(np.array([-0.1, 0.5, 1.0])), [False, True, False])


def test_interior_points_exclude_ends():
    xs = Interval.closed(-1.0, 1.0).interior(3)
    np.testing.assert_allclose(xs, [-0.5, 0.0, 0.5])


def test_triangle_depth_and_kink():
    p = make_profile("isosceles_triangle", {"tau": 0.35})
    assert p.d(0.0) == pytest.approx(0.35)
    assert p.d(0.5) == pytest.approx(0.175)
    assert classify(p, 0.5) is Criticality.SUBCRITICAL
    with pytest.raises(NonDifferentiable):
        classify(p, 0.0)


def test_classify_outside_domain():
    p = make_profile("hyperbolic_lens", {"c": 2.0})
    with pytest.raises(OutOfDomain):
        classify(p, 1.5)


def test_slope_classes_follow_nu():
    p = make_profile("wedge", {"tau": 0.5, "b": 0.0})
    assert classify(p, -1.0) is Criticality.SUBCRITICAL
    assert classify(with_nu(p, 0.5), -1.0) is Criticality.CRITICAL_WITHIN_TOLERANCE
    assert classify(with_nu(p, 0.25), -1.0) is Criticality.SUPERCRITICAL


def test_parabolic_segment_is_critical_at_its_end():
    p = make_profile("parabolic_segment")
    # |d'| reaches nu = 1 only at x = 1/2
    assert abs(p.d_prime(0.5)) == pytest.approx(1.0)
    assert classify(p, 0.25) is Criticality.SUBCRITICAL


def test_semi_ellipse_profile_is_supercritical_near_ends():
    assert classify_profile(make_profile("semi_ellipse")) is Criticality.SUPERCRITICAL


def test_unknown_kind_and_params():
    with pytest.raises(UnknownKind):
        make_profile("zigzag")
    with pytest.raises(InvalidParams):
        make_profile("isosceles_triangle", {"tau": 0.3, "c": 2})
    with pytest.raises(InvalidParams):
        make_profile("hyperbolic_lens", {"c": 0.5})
    with pytest.raises(InvalidParams):
        make_profile("isosceles_triangle", {"tau": 0.3}, nu=-1.0)


def test_every_builtin_kind_constructs():
    params = {
        ProfileKind.WEDGE: {"tau": 0.5},
        ProfileKind.ISOSCELES_TRIANGLE: {"tau": 0.35},
        ProfileKind.HYPERBOLIC_LENS: {"c": 2.0},
        ProfileKind.HYPERBOLIC_HUMP: {"tau": 0.5},
        ProfileKind.DAI_HYPERBOLA: {"r": 1.0},
        ProfileKind.CUSTOM: {"samples": [[0, 0], [0.5, 0.2], [1, 0]]},
    }
    for kind in ProfileKind:
        p = make_profile(kind, params.get(kind))
        xs = p.window.interior(20)
        xs = xs[p.domain.contains(xs)]
        assert np.all(np.asarray(p.d(xs)) >= 0)


def test_json_round_trip():
    p = make_profile("hyperbolic_hump", {"tau": 0.3}, nu=2.0)
    q = profile_from_json(profile_to_json(p))
    xs = np.linspace(-2, 2, 9)
    np.testing.assert_array_equal(p.d(xs), q.d(xs))
    assert q.nu == 2.0


@given(tau=st.floats(0.05, 0.9), nu=st.floats(0.5, 3.0), x=st.floats(-0.95, 0.95))
def test_normalize_nu_preserves_ray_endpoints(tau, nu, x):
    # rescaling z leaves x +/- d(x)/nu unchanged
    p = make_profile("isosceles_triangle", {"tau": tau}, nu=nu)
    q = normalize_nu(p)
    assert q.nu == 1.0
    for s in (1, -1):
        assert float(q.delta(s, x)) == pytest.approx(float(p.delta(s, x)), abs=1e-14)


@given(scale=st.floats(0.2, 3.0), nu=st.floats(0.5, 3.0), x=st.floats(-0.9, 0.9))
def test_normalize_nu_scaled_kinds(scale, nu, x):
    p = make_profile("hyperbolic_lens", {"c": 2.0, "scale": scale}, nu=nu)
    q = normalize_nu(p)
    assert float(q.d(x)) == pytest.approx(float(p.d(x)) / nu, rel=1e-13)
