"""Characteristic maps and the forward map ``T``.

A ray leaving the surface at ``x`` reflects off the bottom and returns to
the surface at ``T(x)``.  With ``delta_pm(x) = x +/- d(x)/nu`` the forward
map is ``delta_plus o delta_minus^{-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import IterationCapExceeded, NotInvertible, OutOfDomain
from .geometry import DepthProfile, Interval, ProfileKind

__all__ = [
    "ITERATION_CAP",
    "ForwardMap",
    "build_forward_map",
    "delta",
    "invert_increasing",
    "iterate",
    "map_from_abel",
    "reflection_identity_residual",
]

ITERATION_CAP = 10_000

_BISECT_WIDTH = 1e-8
_NEWTON_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ForwardMap:
    """The forward map ``T`` with its inverse.

    ``fixed_points`` holds the ends of ``domain`` that ``T`` fixes (possibly
    infinite); an entry is ``None`` when that end is not fixed.
    """

    eval: Callable
    eval_inverse: Optional[Callable]
    domain: Interval
    fixed_points: tuple
    form: str = "closed_form"
    profile: Optional[DepthProfile] = None
    params: Mapping[str, float] = field(default_factory=dict)
    window: Optional[Interval] = None
    name: str = ""
    range_exceeds_domain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        if self.window is None:
            if self.profile is not None:
                w = self.profile.window
            elif self.domain.is_bounded:
                w = Interval.closed(self.domain.lo, self.domain.hi)
            else:
                raise ValueError("maps on unbounded domains need a sampling window")
            object.__setattr__(self, "window", w)

    def __call__(self, x):
        return self.eval(x)

    def inverse(self, x):
        if self.eval_inverse is None:
            raise NotInvertible(f"{self.name or 'map'} has no registered inverse")
        return self.eval_inverse(x)


def delta(profile: DepthProfile, sign: int, x):
    """``x + sign * d(x)/nu`` for ``x`` in the profile domain."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not np.all(profile.domain.contains(x, tol=1e-12)):
        raise OutOfDomain(f"x outside {profile.domain}")
    out = profile.delta(sign, x)
    return float(out) if np.ndim(out) == 0 else out


def _scalar_or_array(v, like):
    return float(np.ravel(v)[0]) if np.ndim(like) == 0 else v


def invert_increasing(g: Callable, g_prime: Optional[Callable], target, lo: float, hi: float):
    """Solve ``g(y) = target`` for an increasing ``g`` on ``[lo, hi]``.

    Vectorised bisection down to a bracket of width 1e-8, then Newton steps
    kept inside the bracket until ``|g(y) - target| <= 1e-12``; bisection
    resumes for points where Newton stalls (kinks, vanishing slope).
    Infinite ends are handled by bracket doubling.
    """
    t = np.atleast_1d(np.asarray(target, dtype=float)).copy()
    a = np.full_like(t, lo)
    b = np.full_like(t, hi)
    for side, arr, sgn in ((lo, a, -1.0), (hi, b, 1.0)):
        if math.isinf(side):
            step = np.ones_like(t)
            arr[:] = np.where(np.isfinite(t), t, 0.0) + sgn
            for _ in range(1100):
                bad = (g(arr) > t) if sgn < 0 else (g(arr) < t)
                if not np.any(bad):
                    break
                arr[bad] += sgn * step[bad]
                step[bad] *= 2.0
            else:
                raise NotInvertible("could not bracket the inverse on an unbounded domain")
    ga, gb = g(a), g(b)
    if np.any(t < ga - 1e-12) or np.any(t > gb + 1e-12):
        raise OutOfDomain("target outside the range of the map")
    for _ in range(200):
        active = (b - a) > _BISECT_WIDTH
        if not np.any(active):
            break
        m = 0.5 * (a + b)
        below = g(m) < t
        a = np.where(active & below, m, a)
        b = np.where(active & ~below, m, b)
    y = 0.5 * (a + b)
    if g_prime is not None:
        for _ in range(8):
            r = g(y) - t
            done = np.abs(r) <= _NEWTON_TOL
            if np.all(done):
                break
            with np.errstate(divide="ignore", invalid="ignore"):
                step = r / g_prime(y)
            cand = y - step
            ok = np.isfinite(cand) & (cand >= a) & (cand <= b) & ~done
            y = np.where(ok, cand, y)
    r = g(y) - t
    stuck = np.abs(r) > _NEWTON_TOL
    if np.any(stuck):
        # finish by bisection down to machine resolution
        a = np.where(stuck, a, y)
        b = np.where(stuck, b, y)
        for _ in range(80):
            m = 0.5 * (a + b)
            below = g(m) < t
            a = np.where(below, m, a)
            b = np.where(below, b, m)
        y = np.where(stuck, 0.5 * (a + b), y)
    return _scalar_or_array(y, target) if np.ndim(target) == 0 else y.reshape(np.shape(target))


# --------------------------------------------------------------------------
# closed forms

def _effective(profile: DepthProfile) -> float:
    """Multiplier of the catalog shape in ``d/nu``."""
    return profile.params.get("scale", 1.0) / profile.nu


def _closed_form(profile: DepthProfile):
    """Registered closed forms of ``(T, T^-1, fixed points, derived params)``."""
    kind, p, k = profile.kind, profile.params, _effective(profile)
    if kind is ProfileKind.WEDGE:
        tau, b = p["tau"] * k, p["b"]
        if not tau < 1:
            return None
        q, s = (1 - tau) / (1 + tau), b * 2 * tau / (1 + tau)
        return (lambda x: q * np.asarray(x, dtype=float) + s,
                lambda y: (np.asarray(y, dtype=float) - s) / q,
                (-math.inf, b), {"p": q, "s": s})
    if kind is ProfileKind.ISOSCELES_TRIANGLE:
        tau = p["tau"] * k
        if not tau < 1:
            return None
        q = (1 - tau) / (1 + tau)
        sp, sm = 2 * tau / (1 + tau), 2 * tau / (1 - tau)

        def T(x):
            x = np.asarray(x, dtype=float)
            # x == -tau takes the first branch; both agree there
            return np.where(x <= -tau, x / q + sm, q * x + sp)

        def Tinv(y):
            y = np.asarray(y, dtype=float)
            return np.where(y <= tau, q * y - sp, y / q - sm)

        return T, Tinv, (-1.0, 1.0), {"p": q, "s_plus": sp, "s_minus": sm, "tau_eff": tau}
    if kind is ProfileKind.HYPERBOLIC_LENS and k == 1.0:
        c = p["c"]
        return (lambda x: (1 + c * np.asarray(x, dtype=float)) / (c + np.asarray(x, dtype=float)),
                lambda y: (c * np.asarray(y, dtype=float) - 1) / (c - np.asarray(y, dtype=float)),
                (-1.0, 1.0), {"c": c})
    if kind is ProfileKind.HYPERBOLIC_HUMP and k == 1.0:
        tau = p["tau"]
        a, b = (1 + tau**2) / (1 - tau**2), 2 * tau / (1 - tau**2)

        def T(x):
            x = np.asarray(x, dtype=float)
            return a * x + b * np.sqrt(1 + x * x)

        def Tinv(y):
            y = np.asarray(y, dtype=float)
            return a * y - b * np.sqrt(1 + y * y)

        return T, Tinv, (-math.inf, math.inf), {"tau": tau}
    if kind is ProfileKind.SEMI_ELLIPSE:
        nu = 1.0 / k
        n2 = nu * nu

        def T(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore"):
                return (2 * np.sqrt(1 - n2 * (x * x - 1)) + (n2 - 1) * x) / (n2 + 1)

        # T is not injective on [-1, 1]; no inverse is registered
        return T, None, (None, None), {"nu_eff": nu, "theta_nu": math.atan(1.0 / nu)}
    if kind is ProfileKind.DAI_HYPERBOLA and "d0" not in p:
        four_r = 4 * p["r"] * k

        def T(x):
            x = np.asarray(x, dtype=float)
            return np.sqrt(four_r + x * x)

        def Tinv(y):
            y = np.asarray(y, dtype=float)
            with np.errstate(invalid="ignore"):
                return np.sqrt(y * y - four_r)

        return T, Tinv, (None, math.inf), {"r_eff": four_r / 4}
    if kind is ProfileKind.PARABOLIC_SEGMENT and k == 1.0:
        return (lambda x: 2 * np.asarray(x, dtype=float) * (1 - np.asarray(x, dtype=float)),
                lambda y: 0.5 * (1 - np.sqrt(1 - 2 * np.asarray(y, dtype=float))),
                (0.0, 0.5), {})
    return None


def _map_domain(profile: DepthProfile) -> Interval:
    if profile.kind is ProfileKind.DAI_HYPERBOLA and "d0" not in profile.params:
        # delta_minus sends (0, inf) onto the whole line
        return Interval.open(-math.inf, math.inf)
    return profile.domain


def _numeric(profile: DepthProfile):
    dom = profile.domain
    lo, hi = dom.lo, dom.hi
    nu = profile.nu
    w = profile.window
    lat = np.linspace(max(lo, w.lo), min(hi, w.hi), 64)
    lat = lat[1:-1] if not (dom.lo_closed and dom.hi_closed) else lat
    for sign, label in ((-1, "delta_minus"), (1, "delta_plus")):
        vals = profile.delta(sign, lat)
        if not np.all(np.isfinite(vals)) or np.any(np.diff(vals) <= 0):
            raise NotInvertible(f"{label} is not strictly increasing on {dom}; "
                                "the profile is not subcritical there")

    def dm(y):
        return profile.delta(-1, y)

    def dp(y):
        return profile.delta(1, y)

    def dm_prime(y):
        return 1.0 - profile.d_prime(y) / nu

    def dp_prime(y):
        return 1.0 + profile.d_prime(y) / nu

    def T(x):
        return dp(invert_increasing(dm, dm_prime, x, lo, hi))

    def Tinv(y):
        return dm(invert_increasing(dp, dp_prime, y, lo, hi))

    fixed = (lo if (math.isinf(lo) or profile.closed_ends) else None,
             hi if (math.isinf(hi) or profile.closed_ends) else None)
    return T, Tinv, fixed


def build_forward_map(profile: DepthProfile, method: str = "auto") -> ForwardMap:
    """Forward map of a profile.

    Parameters
    ----------
    profile : DepthProfile
    method : {"auto", "closed_form", "numeric"}
        ``auto`` uses a registered closed form when one exists for the
        profile (with its ``nu``), and numeric inversion of ``delta_minus``
        otherwise.

    Raises
    ------
    NotInvertible
        The numeric path found ``delta_minus`` or ``delta_plus`` not
        strictly increasing, or ``closed_form`` was requested for a
        profile without one.
    """
    if method not in ("auto", "closed_form", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    cf = _closed_form(profile) if method != "numeric" else None
    if cf is not None:
        T, Tinv, fixed, params = cf
        return ForwardMap(T, Tinv, _map_domain(profile), fixed, "closed_form", profile,
                          params, profile.window, f"T[{profile.kind.value}]",
                          range_exceeds_domain=profile.kind is ProfileKind.SEMI_ELLIPSE)
    if method == "closed_form":
        raise NotInvertible(f"no closed-form map registered for {profile!r}")
    T, Tinv, fixed = _numeric(profile)
    return ForwardMap(T, Tinv, profile.domain, fixed, "numeric", profile, {},
                      profile.window, f"T[{profile.kind.value}, numeric]")


def iterate(fmap: ForwardMap, x, k: int, cap: int = ITERATION_CAP):
    """``T^[k](x)``; negative ``k`` uses the inverse.

    Every point the map is applied to must lie in the map domain; so must
    the result, except for maps flagged ``range_exceeds_domain``.
    """
    k = int(k)
    if abs(k) > cap:
        raise IterationCapExceeded(f"|k|={abs(k)} exceeds the iteration cap {cap}")
    y = np.asarray(x, dtype=float)
    step = fmap.eval if k >= 0 else fmap.inverse
    for i in range(abs(k)):
        _check_orbit(fmap, y)
        y = np.asarray(step(y), dtype=float)
        if np.any(np.isnan(y)):
            raise OutOfDomain(f"{fmap.name or 'map'} undefined along the orbit")
    if k and not fmap.range_exceeds_domain:
        _check_orbit(fmap, y)
    return float(y) if y.ndim == 0 else y


def _check_orbit(fmap, y):
    if not np.all(fmap.domain.contains(y, tol=1e-12)):
        raise OutOfDomain(f"orbit left the domain {fmap.domain}")


def reflection_identity_residual(profile: DepthProfile, fmap: ForwardMap, x):
    """``|d((x + T(x))/2) - nu |T(x) - x|/2|``: the ray reflects halfway.

    The chord is unsigned so that involutions, which send either end of a
    ray pair to the other, satisfy the same identity.
    """
    x = np.asarray(x, dtype=float)
    tx = np.asarray(fmap.eval(x), dtype=float)
    out = np.abs(profile.d(0.5 * (x + tx)) - profile.nu * 0.5 * np.abs(tx - x))
    return float(out) if out.ndim == 0 else out


def map_from_abel(a, Q: float, inverse: Optional[Callable] = None,
                  domain: Optional[Interval] = None,
                  window: Optional[Interval] = None) -> ForwardMap:
    """``T(x) = a^{-1}(a(x) + Q)`` for an invertible Abel solution ``a``.

    ``a`` is an :class:`~funcwave.abel.AbelSolution` or a plain callable; in
    the latter case ``inverse`` must be given.  Iterates then follow from
    ``T^[k](x) = a^{-1}(a(x) + kQ)``.
    """
    inv = inverse if inverse is not None else getattr(a, "inverse", None)
    if inv is None:
        raise NotInvertible("the Abel solution has no registered inverse")
    if domain is None:
        domain = getattr(a, "domain", None) or Interval.open(-math.inf, math.inf)
    if window is None:
        window = getattr(a, "window", None)
        if window is None:
            window = (Interval.closed(domain.lo, domain.hi) if domain.is_bounded
                      else Interval.closed(-5.0, 5.0))

    def T(x):
        return inv(a(np.asarray(x, dtype=float)) + Q)

    def Tinv(y):
        return inv(a(np.asarray(y, dtype=float)) - Q)

    return ForwardMap(T, Tinv, domain, (domain.lo, domain.hi), "closed_form", None,
                      {"Q": Q}, window, "T[from Abel]")
