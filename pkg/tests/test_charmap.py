import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from funcwave.charmap import (
    ITERATION_CAP,
    build_forward_map,
    invert_increasing,
    iterate,
    map_from_abel,
    reflection_identity_residual,
)
from funcwave.errors import IterationCapExceeded, NotInvertible, OutOfDomain
from funcwave.geometry import make_profile

CATALOG = [
    ("wedge", {"tau": 0.5, "b": 0.0}),
    ("isosceles_triangle", {"tau": 0.35}),
    ("hyperbolic_lens", {"c": 2.0}),
    ("hyperbolic_hump", {"tau": 0.5}),
    ("dai_hyperbola", {"r": 1.0}),
    ("parabolic_segment", {}),
]


def brute_T(profile, x):
    """T(x) = delta_+(y) where delta_-(y) = x, by bracketing on the window."""
    dom = profile.domain
    lo = dom.lo if math.isfinite(dom.lo) else profile.window.lo - 50
    hi = dom.hi if math.isfinite(dom.hi) else profile.window.hi + 50
    y = brentq(lambda t: float(profile.delta(-1, t)) - x, lo + 1e-15, hi, xtol=1e-15)
    return float(profile.delta(+1, y))


@pytest.mark.parametrize("kind,params", CATALOG)
def test_closed_form_matches_brute_force(kind, params):
    p = make_profile(kind, params)
    T = build_forward_map(p)
    for x in p.window.interior(9)[1:-1]:
        assert float(T(x)) == pytest.approx(brute_T(p, x), abs=1e-10)


@pytest.mark.parametrize("kind,params", [c for c in CATALOG if c[0] != "dai_hyperbola"])
def test_numeric_map_agrees_with_closed_form(kind, params):
    p = make_profile(kind, params)
    xs = p.window.interior(50)
    a = build_forward_map(p, "closed_form")
    b = build_forward_map(p, "numeric")
    np.testing.assert_allclose(b(xs), a(xs), atol=1e-10)


@pytest.mark.parametrize("kind,params", CATALOG)
def test_inverse_round_trip(kind, params):
    T = build_forward_map(make_profile(kind, params))
    xs = T.window.interior(40)
    np.testing.assert_allclose(T.inverse(T(xs)), xs, atol=1e-10)


def test_numeric_map_refuses_supercritical_part():
    # r/x is steeper than the rays for x < 1; only the closed form covers it
    p = make_profile("dai_hyperbola", {"r": 1.0})
    with pytest.raises(NotInvertible):
        build_forward_map(p, "numeric")
    ok = make_profile("dai_hyperbola", {"r": 1.0, "window_lo": 1.5, "window_hi": 4.0})
    xs = np.linspace(2.0, 4.0, 9)
    np.testing.assert_allclose(build_forward_map(ok, "numeric")(xs), np.sqrt(4 + xs * xs), atol=1e-10)


def test_triangle_values():
    T = build_forward_map(make_profile("isosceles_triangle", {"tau": 0.35}))
    p = 0.65 / 1.35
    assert T(-0.35) == pytest.approx(0.35)
    # right branch is affine with fixed point 1 and slope p
    assert iterate(T, 0.0, 2) == pytest.approx(1 - p * p, abs=1e-14)


def test_wedge_is_affine():
    T = build_forward_map(make_profile("wedge", {"tau": 0.5, "b": 0.0}))
    assert T(-1.0) == pytest.approx(-1 / 3)
    assert T.fixed_points[1] == 0.0


def test_semi_ellipse_has_no_inverse():
    T = build_forward_map(make_profile("semi_ellipse"))
    assert T(0.0) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(NotInvertible):
        T.inverse(0.5)
    with pytest.raises(NotInvertible):
        build_forward_map(make_profile("semi_ellipse"), "numeric")


def test_iterate_checks_domain_and_cap():
    T = build_forward_map(make_profile("hyperbolic_lens", {"c": 2.0}))
    with pytest.raises(OutOfDomain):
        iterate(T, 1.5, 1)
    with pytest.raises(IterationCapExceeded):
        iterate(T, 0.0, ITERATION_CAP + 1)
    assert iterate(T, 0.2, 0) == 0.2


@pytest.mark.parametrize("kind,params", CATALOG + [("semi_ellipse", {})])
def test_reflection_identity(kind, params):
    p = make_profile(kind, params)
    T = build_forward_map(p)
    xs = np.random.default_rng(3).uniform(p.window.lo, p.window.hi, 100)
    assert np.max(reflection_identity_residual(p, T, xs)) < 1e-9


@given(x=st.floats(-0.99, 0.99), k=st.integers(-6, 6))
def test_iterates_compose(x, k):
    T = build_forward_map(make_profile("hyperbolic_lens", {"c": 2.0}))
    y = iterate(T, x, k)
    assert iterate(T, y, -k) == pytest.approx(x, abs=1e-9)


@given(x=st.floats(-0.99, 0.99))
def test_lens_conjugate_to_shift(x):
    # arctanh(T(x)) = arctanh(x) + arctanh(1/2)
    T = build_forward_map(make_profile("hyperbolic_lens", {"c": 2.0}))
    assert math.atanh(T(x)) == pytest.approx(math.atanh(x) + math.atanh(0.5), abs=1e-9)


@given(target=st.floats(-5, 5))
def test_invert_increasing(target):
    g = lambda t: t ** 3 + t
    x = invert_increasing(g, lambda t: 3 * t * t + 1, target, -10.0, 10.0)
    assert g(x) == pytest.approx(target, abs=1e-11)


def test_map_from_abel_recovers_lens_map():
    q = math.atanh(0.5)
    T = map_from_abel(np.arctanh, q, inverse=np.tanh)
    lens = build_forward_map(make_profile("hyperbolic_lens", {"c": 2.0}))
    xs = np.linspace(-0.9, 0.9, 11)
    np.testing.assert_allclose(T(xs), lens(xs), atol=1e-12)
