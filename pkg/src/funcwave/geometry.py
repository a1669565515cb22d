"""Intervals, depth profiles and the slope classification of a bottom.

A profile describes the bottom ``z = -d(x)`` of a two-dimensional fluid
domain bounded above by ``z = 0``.  Rays of the wave equation leave the
surface with slope ``nu``; a bottom point is subcritical when the bottom is
less steep than the rays there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import InvalidParams, NonDifferentiable, OutOfDomain, UnknownKind

__all__ = [
    "CRITICALITY_TOL",
    "Criticality",
    "DepthProfile",
    "Interval",
    "ProfileKind",
    "classify",
    "classify_profile",
    "make_profile",
    "normalize_nu",
    "profile_from_json",
    "profile_to_json",
]

CRITICALITY_TOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """An interval of the extended real line.

    Infinite endpoints are always open.
    """

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise InvalidParams("interval endpoints must not be NaN")
        if lo > hi:
            raise InvalidParams(f"empty interval: lo={lo} > hi={hi}")
        if (math.isinf(lo) and self.lo_closed) or (math.isinf(hi) and self.hi_closed):
            raise InvalidParams("an infinite endpoint cannot be closed")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def closed(cls, lo, hi):
        return cls(lo, hi, not math.isinf(lo), not math.isinf(hi))

    @classmethod
    def open(cls, lo, hi):
        return cls(lo, hi, False, False)

    @classmethod
    def half_open(cls, lo, hi):
        """``[lo, hi)``"""
        return cls(lo, hi, not math.isinf(lo), False)

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0):
        """Membership test; ``tol`` widens the interval on both sides."""
        x = np.asarray(x, dtype=float)
        lo_ok = x >= self.lo - tol if self.lo_closed or tol > 0 else x > self.lo
        hi_ok = x <= self.hi + tol if self.hi_closed or tol > 0 else x < self.hi
        out = lo_ok & hi_ok
        return bool(out) if out.ndim == 0 else out

    def interior(self, n: int) -> np.ndarray:
        """``n`` uniformly spaced points strictly inside a bounded interval."""
        if not self.is_bounded:
            raise InvalidParams("interior sampling needs a bounded interval")
        return np.linspace(self.lo, self.hi, n + 2)[1:-1]

    def to_json(self) -> list:
        return [_json_float(self.lo), _json_float(self.hi), self.lo_closed, self.hi_closed]


def _json_float(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


class ProfileKind(str, Enum):
    WEDGE = "wedge"
    ISOSCELES_TRIANGLE = "isosceles_triangle"
    SEMI_ELLIPSE = "semi_ellipse"
    HYPERBOLIC_LENS = "hyperbolic_lens"
    HYPERBOLIC_HUMP = "hyperbolic_hump"
    DAI_HYPERBOLA = "dai_hyperbola"
    PARABOLIC_SEGMENT = "parabolic_segment"
    INVOLUTION_DERIVED = "involution_derived"
    CUSTOM = "custom"


class Criticality(Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL_WITHIN_TOLERANCE = "critical_within_tolerance"
    SUPERCRITICAL = "supercritical"


_SEVERITY = {
    Criticality.SUBCRITICAL: 0,
    Criticality.CRITICAL_WITHIN_TOLERANCE: 1,
    Criticality.SUPERCRITICAL: 2,
}


@dataclass(frozen=True, eq=False)
class DepthProfile:
    """Bottom topography ``d`` on ``domain`` together with the ray slope ``nu``.

    ``d`` and ``d_prime`` accept scalars or arrays.  Outside the physical
    domain they return whatever the defining formula yields (negative or NaN
    values), which callers use to mask points below the bottom.
    """

    kind: ProfileKind
    params: Mapping[str, float]
    domain: Interval
    nu: float
    d: Callable
    d_prime: Callable
    kinks: tuple = ()
    closed_ends: bool = False
    window: Interval = field(default=None)

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidParams(f"nu must be positive, got {self.nu}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        if self.window is None:
            lo = self.params.get("window_lo", self.domain.lo)
            hi = self.params.get("window_hi", self.domain.hi)
            object.__setattr__(self, "window", Interval.closed(lo, hi))
        if not self.window.is_bounded:
            raise InvalidParams("unbounded domains need window_lo/window_hi params")

    def delta(self, sign: int, x):
        """Surface points ``x +/- d(x)/nu`` joined to ``(x, -d(x))`` by rays."""
        return np.asarray(x, dtype=float) + sign * self.d(x) / self.nu

    def __repr__(self):
        ps = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"DepthProfile({self.kind.value}, nu={self.nu!r}{', ' + ps if ps else ''})"


# --------------------------------------------------------------------------
# catalog

def _require(cond, msg):
    if not cond:
        raise InvalidParams(msg)


def _wedge(p):
    tau, b, s = p["tau"], p.get("b", 0.0), p.get("scale", 1.0)
    _require(tau > 0, "wedge needs tau > 0")
    p.setdefault("b", b)
    p.setdefault("window_lo", b - 10.0)
    p.setdefault("window_hi", b)

    def d(x):
        return s * tau * (b - np.asarray(x, dtype=float))

    def dp(x):
        return np.full_like(np.asarray(x, dtype=float), -s * tau)

    return Interval(-math.inf, b, False, True), d, dp, (), True


def _triangle(p):
    tau, s = p["tau"], p.get("scale", 1.0)
    _require(tau > 0, "isosceles_triangle needs tau > 0")

    def d(x):
        return s * tau * (1.0 - np.abs(np.asarray(x, dtype=float)))

    def dp(x):
        return -s * tau * np.sign(np.asarray(x, dtype=float))

    return Interval.closed(-1.0, 1.0), d, dp, (0.0,), True


def _semi_ellipse(p):
    s = p.get("scale", 1.0)

    def d(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            return s * np.sqrt(1.0 - x * x)

    def dp(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return -s * x / np.sqrt(1.0 - x * x)

    return Interval.closed(-1.0, 1.0), d, dp, (), True


def _lens(p):
    c, s = p["c"], p.get("scale", 1.0)
    _require(c > 1, "hyperbolic_lens needs c > 1")

    def d(x):
        x = np.asarray(x, dtype=float)
        return s * (c - np.sqrt(c * c - 1.0 + x * x))

    def dp(x):
        x = np.asarray(x, dtype=float)
        return -s * x / np.sqrt(c * c - 1.0 + x * x)

    return Interval.closed(-1.0, 1.0), d, dp, (), True


def _hump(p):
    tau, s = p["tau"], p.get("scale", 1.0)
    _require(0 < tau < 1, "hyperbolic_hump needs 0 < tau < 1")
    p.setdefault("window_lo", -5.0)
    p.setdefault("window_hi", 5.0)
    k = 1.0 / (1.0 - tau * tau)

    def d(x):
        x = np.asarray(x, dtype=float)
        return s * tau * np.sqrt(k + x * x)

    def dp(x):
        x = np.asarray(x, dtype=float)
        return s * tau * x / np.sqrt(k + x * x)

    return Interval.open(-math.inf, math.inf), d, dp, (), False


def _hyperbola(p):
    r, s = p["r"], p.get("scale", 1.0)
    _require(r > 0, "dai_hyperbola needs r > 0")
    p.setdefault("window_lo", 0.25)
    p.setdefault("window_hi", 4.0)
    if "d0" in p:
        # d(x) = 1/(d0 + r x); only the nu = 1 form is supported
        d0 = p["d0"]
        _require(d0 > 0, "dai_hyperbola variant needs d0 > 0")

        def d(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return s / (d0 + r * x)

        def dp(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return -s * r / (d0 + r * x) ** 2

        return Interval.open(-d0 / r, math.inf), d, dp, (), False

    # r/|x| so that the mirrored profile of the symmetric plots is available too
    def d(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return s * r / np.abs(x)

    def dp(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return -s * r * np.sign(x) / (x * x)

    return Interval.open(0.0, math.inf), d, dp, (), False


def _parabolic(p):
    # reflection of T(x) = 2x(1-x) off the bottom, solved for d
    s = p.get("scale", 1.0)
    if "c" in p:
        _require(0 < p["c"] < 0.5, "parabolic_segment normalisation c must lie in (0, 1/2)")

    def d(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            return s * (x - 0.75 + np.sqrt(9.0 - 16.0 * x) / 4.0)

    def dp(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return s * (1.0 - 2.0 / np.sqrt(9.0 - 16.0 * x))

    return Interval.closed(0.0, 0.5), d, dp, (), True


def _involution_profile(p):
    """Bottoms solving ``invol(x - d) = x + d`` for the tabulated involutions.

    The family is selected by the parameter names: ``{}`` reciprocal,
    ``{b, x0}`` fractional linear, ``{b}`` circle, ``{m, x0}`` piecewise linear.
    """
    s = p.get("scale", 1.0)
    keys = {k for k in p if k not in ("scale", "window_lo", "window_hi")}
    if not keys:
        p.setdefault("window_lo", -4.0)
        p.setdefault("window_hi", -1.0)

        def d(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore"):
                return s * np.where(x <= -1.0, np.sqrt(np.abs(x * x - 1.0)), np.nan)

        def dp(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                return s * np.where(x < -1.0, x / np.sqrt(np.abs(x * x - 1.0)), np.nan)

        return Interval(-math.inf, -1.0, False, True), d, dp, (), True
    if keys == {"b", "x0"}:
        b, x0 = p["b"], p["x0"]
        _require(b > 0 and 1 + x0 * b > 0, "fractional linear family needs b > 0, 1 + x0 b > 0")
        edge = -1.0 / b - math.sqrt(1 + x0 * b) / b
        p.setdefault("window_lo", edge - 3.0)
        p.setdefault("window_hi", edge)
        k = (1 + x0 * b) / b**2

        def d(x):
            x = np.asarray(x, dtype=float)
            r = (x + 1.0 / b) ** 2 - k
            with np.errstate(invalid="ignore"):
                return s * np.where(x <= edge, np.sqrt(np.abs(r)), np.nan)

        def dp(x):
            x = np.asarray(x, dtype=float)
            r = (x + 1.0 / b) ** 2 - k
            with np.errstate(invalid="ignore", divide="ignore"):
                return s * np.where(x < edge, (x + 1.0 / b) / np.sqrt(np.abs(r)), np.nan)

        return Interval(-math.inf, edge, False, True), d, dp, (), True
    if keys == {"b"}:
        b = p["b"]
        _require(b > 0, "circle family needs b > 0")
        lo = b / math.sqrt(2.0)

        def d(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore"):
                return s * np.sqrt(b * b - x * x)

        def dp(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore", divide="ignore"):
                return -s * x / np.sqrt(b * b - x * x)

        return Interval.closed(lo, b), d, dp, (), True
    if keys == {"m", "x0"}:
        m, x0 = p["m"], p["x0"]
        _require(m > 1, "piecewise linear family needs m > 1")
        p.setdefault("window_lo", x0)
        p.setdefault("window_hi", x0 + 2.0)
        slope = (m + 1.0) / (m - 1.0)

        def d(x):
            return s * slope * (np.asarray(x, dtype=float) - x0)

        def dp(x):
            return np.full_like(np.asarray(x, dtype=float), s * slope)

        return Interval(x0, math.inf, True, False), d, dp, (), True
    raise InvalidParams(f"no involution family takes parameters {sorted(keys)}")


def _custom(p):
    samples = np.asarray(p.pop("samples"), dtype=float)
    _require(samples.ndim == 2 and samples.shape[1] == 2 and len(samples) >= 2,
             "custom profile needs samples [[x, d], ...]")
    xs, ds = samples[:, 0], samples[:, 1] * p.get("scale", 1.0)
    _require(np.all(np.diff(xs) > 0), "custom samples must have increasing x")
    _require(np.all(ds >= 0), "custom depths must be nonnegative")
    interp = PchipInterpolator(xs, ds, extrapolate=False)
    deriv = interp.derivative()

    def d(x):
        return interp(np.asarray(x, dtype=float))

    def dp(x):
        return deriv(np.asarray(x, dtype=float))

    p["_samples"] = samples
    return Interval.closed(xs[0], xs[-1]), d, dp, tuple(xs[1:-1]), False


_BUILDERS = {
    ProfileKind.WEDGE: (_wedge, {"tau", "b"}),
    ProfileKind.ISOSCELES_TRIANGLE: (_triangle, {"tau"}),
    ProfileKind.SEMI_ELLIPSE: (_semi_ellipse, set()),
    ProfileKind.HYPERBOLIC_LENS: (_lens, {"c"}),
    ProfileKind.HYPERBOLIC_HUMP: (_hump, {"tau"}),
    ProfileKind.DAI_HYPERBOLA: (_hyperbola, {"r", "d0"}),
    ProfileKind.PARABOLIC_SEGMENT: (_parabolic, {"c"}),
    ProfileKind.INVOLUTION_DERIVED: (_involution_profile, {"b", "x0", "m"}),
    ProfileKind.CUSTOM: (_custom, {"samples"}),
}
_COMMON = {"scale", "window_lo", "window_hi"}
_REQUIRED = {
    ProfileKind.WEDGE: {"tau"},
    ProfileKind.ISOSCELES_TRIANGLE: {"tau"},
    ProfileKind.HYPERBOLIC_LENS: {"c"},
    ProfileKind.HYPERBOLIC_HUMP: {"tau"},
    ProfileKind.DAI_HYPERBOLA: {"r"},
    ProfileKind.CUSTOM: {"samples"},
}


def _as_kind(kind) -> ProfileKind:
    try:
        return ProfileKind(kind)
    except ValueError:
        raise UnknownKind(f"unknown profile kind {kind!r}") from None


def make_profile(kind, params: Mapping | None = None, nu: float = 1.0) -> DepthProfile:
    """Build a catalog profile.

    Parameters
    ----------
    kind : str or ProfileKind
        One of the :class:`ProfileKind` values.
    params : mapping, optional
        Shape parameters.  ``tau`` for the wedge (plus ``b``, its right end),
        triangle and hump; ``c`` for the lens; ``r`` (and optionally ``d0``)
        for the hyperbola ``r / |x|``.  Every kind accepts ``scale``, a multiplier on
        ``d``, and ``window_lo``/``window_hi`` for the sampling window.
    nu : float
        Ray slope.

    Raises
    ------
    UnknownKind, InvalidParams
    """
    kind = _as_kind(kind)
    p = dict(params or {})
    builder, allowed = _BUILDERS[kind]
    unknown = set(p) - allowed - _COMMON
    if unknown:
        raise InvalidParams(f"{kind.value} does not take parameters {sorted(unknown)}")
    missing = _REQUIRED.get(kind, set()) - set(p)
    if missing:
        raise InvalidParams(f"{kind.value} needs parameters {sorted(missing)}")
    if kind is not ProfileKind.CUSTOM:
        try:
            p = {k: float(v) for k, v in p.items()}
        except (TypeError, ValueError):
            raise InvalidParams(f"parameters of {kind.value} must be numbers") from None
    if not (isinstance(nu, (int, float)) and nu > 0):
        raise InvalidParams(f"nu must be positive, got {nu!r}")
    if p.get("scale", 1.0) <= 0:
        raise InvalidParams("scale must be positive")
    domain, d, dp, kinks, closed = builder(p)
    return DepthProfile(kind, p, domain, float(nu), d, dp, kinks, closed)


def classify(profile: DepthProfile, x: float, tol: float = CRITICALITY_TOL) -> Criticality:
    """Pointwise slope class of the bottom at ``x``.

    Raises
    ------
    OutOfDomain
        ``x`` is not an interior point of the profile domain.
    NonDifferentiable
        ``x`` is a registered kink (e.g. the apex of the triangle).
    """
    x = float(x)
    if not (profile.domain.lo < x < profile.domain.hi):
        raise OutOfDomain(f"x={x} is not inside {profile.domain}")
    if any(abs(x - k) <= 1e-12 for k in profile.kinks):
        raise NonDifferentiable(f"{profile.kind.value} has a kink at x={x}")
    excess = abs(float(profile.d_prime(x))) - profile.nu
    if excess < -tol:
        return Criticality.SUBCRITICAL
    if excess > tol:
        return Criticality.SUPERCRITICAL
    return Criticality.CRITICAL_WITHIN_TOLERANCE


def classify_profile(profile: DepthProfile, n: int = 200, tol: float = CRITICALITY_TOL) -> Criticality:
    """Worst pointwise class over ``n`` interior samples of the window."""
    worst = Criticality.SUBCRITICAL
    for x in profile.window.interior(n):
        if not (profile.domain.lo < x < profile.domain.hi):
            continue
        try:
            c = classify(profile, x, tol)
        except NonDifferentiable:
            continue
        if _SEVERITY[c] > _SEVERITY[worst]:
            worst = c
    return worst


def normalize_nu(profile: DepthProfile) -> DepthProfile:
    """Stretch ``z`` so that ``nu`` becomes 1 (``d -> d/nu``)."""
    nu = profile.nu
    if nu == 1.0:
        return profile
    p = dict(profile.params)
    kind = profile.kind
    if kind in (ProfileKind.WEDGE, ProfileKind.ISOSCELES_TRIANGLE):
        p["tau"] = p["tau"] / nu
    elif kind is ProfileKind.DAI_HYPERBOLA and "d0" not in p:
        p["r"] = p["r"] / nu
    elif kind is ProfileKind.DAI_HYPERBOLA:
        p["d0"], p["r"] = p["d0"] * nu, p["r"] * nu
    else:
        p["scale"] = p.get("scale", 1.0) / nu
    if kind is ProfileKind.CUSTOM:
        samples = p.pop("_samples")
        p.pop("scale")
        p["samples"] = samples * [1.0, profile.params.get("scale", 1.0) / nu]
    return make_profile(kind, p, 1.0)


def profile_to_json(profile: DepthProfile) -> dict:
    params = {}
    for k, v in profile.params.items():
        if k == "_samples":
            params["samples"] = np.asarray(v).tolist()
        else:
            params[k] = v
    return {"kind": profile.kind.value, "params": params, "nu": profile.nu}


def profile_from_json(obj: Mapping) -> DepthProfile:
    """Inverse of :func:`profile_to_json`; ``nu`` defaults to 1."""
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise InvalidParams("profile JSON must be an object with a 'kind' field")
    return make_profile(obj["kind"], obj.get("params") or {}, obj.get("nu", 1.0))


def with_nu(profile: DepthProfile, nu: float) -> DepthProfile:
    """Same bottom with a different ray slope."""
    return replace(profile, nu=float(nu))
