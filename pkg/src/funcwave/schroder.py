"""Standing-wave profile functions: solutions of ``f(T(x)) = f(x)``.

Constructions:

* ``P o a`` for an Abel solution ``a`` and a periodic ``P`` whose period
  divides the flux of ``a``;
* post-composition ``F o f`` of an existing solution;
* the semi-ellipse reduction to a constant-shift equation in an angle
  variable, which yields the Chebyshev modes;
* symmetric (cyclic) functions of the orbit of an involution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .abel import AbelSolution
from .charmap import ForwardMap, build_forward_map
from .errors import (
    InvalidModeNumbers,
    InvalidParams,
    NotCyclicInvariant,
    NotInvolution,
    PeriodMismatch,
)
from .geometry import Interval, make_profile

__all__ = [
    "Involution",
    "PeriodicFunction",
    "WaveProfileFunction",
    "as_wave_function",
    "barcilon_solution",
    "compose_periodic",
    "convex_combination",
    "detect_involution",
    "general_abel_solution",
    "involution_catalog",
    "involution_map",
    "involution_solution",
    "periodic",
    "periodic_from_json",
    "pointwise_min",
    "postcompose",
    "symmetric_function",
    "tabulated_periodic",
    "triangle_wave",
    "verify_involution",
]

PERIOD_TOL = 1e-9


def _out(v, like):
    v = np.asarray(v, dtype=float)
    return float(v) if np.ndim(like) == 0 else v


def triangle_wave(theta):
    """Even, ``2 pi``-periodic, piecewise linear; equals cos at 0 and pi."""
    t = np.asarray(theta, dtype=float)
    return _out(1.0 - 2.0 * np.abs(np.mod(t + np.pi, 2 * np.pi) - np.pi) / np.pi, theta)


@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    period: float
    kind: str
    eval: Callable
    derivative_bound: Optional[float] = None
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise InvalidParams(f"period must be positive, got {self.period}")

    def __call__(self, x):
        return self.eval(x)

    def to_json(self) -> dict:
        if self.kind == "tabulated":
            return {"kind": "tabulated", "samples": self._samples.tolist()}
        return {"kind": self.kind, "period": self.period,
                "amplitude": self.amplitude, "phase": self.phase}


_WAVES = {
    "cosine": (np.cos, 1.0),
    "sine": (np.sin, 1.0),
    "triangle_wave": (triangle_wave, 2.0 / math.pi),
}


def periodic(kind: str, period: float, amplitude: float = 1.0, phase: float = 0.0) -> PeriodicFunction:
    """``amplitude * w(2 pi x / period + phase)`` for ``w`` in cosine, sine, triangle_wave."""
    if kind not in _WAVES:
        raise InvalidParams(f"unknown periodic kind {kind!r}")
    w, slope = _WAVES[kind]
    period, amplitude, phase = float(period), float(amplitude), float(phase)
    if not period > 0:
        raise InvalidParams(f"period must be positive, got {period}")
    omega = 2 * math.pi / period

    def P(x):
        x = np.asarray(x, dtype=float)
        return _out(amplitude * w(omega * x + phase), x)

    return PeriodicFunction(period, kind, P, abs(amplitude) * slope * omega, amplitude, phase)


def tabulated_periodic(samples) -> PeriodicFunction:
    """Linear interpolation of one period ``[[x, y], ...]``.

    The first and last abscissae span exactly one period and must carry the
    same value.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2 or s.shape[1] != 2 or len(s) < 2:
        raise InvalidParams("tabulated samples must be [[x, y], ...] with at least two rows")
    xs, ys = s[:, 0], s[:, 1]
    if np.any(np.diff(xs) <= 0):
        raise InvalidParams("tabulated abscissae must increase")
    if ys[0] != ys[-1]:
        raise InvalidParams("first and last tabulated values must agree")
    period = float(xs[-1] - xs[0])
    x0 = xs[0]
    xp, yp = xs[:-1] - x0, ys[:-1]

    def P(x):
        x = np.asarray(x, dtype=float)
        return _out(np.interp(np.mod(x - x0, period), xp, yp, period=period), x)

    bound = float(np.max(np.abs(np.diff(ys) / np.diff(xs))))
    out = PeriodicFunction(period, "tabulated", P, bound)
    object.__setattr__(out, "_samples", s)
    return out


def periodic_from_json(obj: Mapping, default_period: Optional[float] = None) -> PeriodicFunction:
    """``{"kind", "period", "amplitude", "phase"}`` or ``{"kind": "tabulated", "samples"}``.

    ``period`` may be omitted when the caller supplies ``default_period``.
    """
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise InvalidParams("periodic function JSON needs a 'kind'")
    if obj["kind"] == "tabulated":
        return tabulated_periodic(obj.get("samples"))
    period = obj.get("period", default_period)
    if period is None:
        raise InvalidParams("periodic function JSON needs a 'period'")
    return periodic(obj["kind"], period, obj.get("amplitude", 1.0), obj.get("phase", 0.0))


@dataclass(frozen=True, eq=False)
class WaveProfileFunction:
    """Surface profile ``f`` whose d'Alembert extension is the stream function.

    ``flux`` is the ``Q`` in ``f(x + d/nu) = f(x - d/nu) + Q``; zero for
    standing waves.
    """

    domain: Interval
    eval: Callable
    provenance: str
    flux: float = 0.0
    map: Optional[ForwardMap] = None
    label: str = ""

    def __call__(self, x):
        return self.eval(x)


def as_wave_function(a: AbelSolution) -> WaveProfileFunction:
    """Use an Abel solution directly as a profile function with flux ``a.Q``."""
    return WaveProfileFunction(a.domain, a.eval, "custom", a.Q, a.map, f"abel[{a.tag}]")


def _integer_ratio(num: float, den: float) -> Optional[int]:
    n = num / den
    r = round(n)
    if r >= 1 and abs(n - r) <= PERIOD_TOL * max(1.0, n):
        return int(r)
    return None


def compose_periodic(a: AbelSolution, P: PeriodicFunction) -> WaveProfileFunction:
    """``f = P o a``; ``|Q|`` must be a positive integer multiple of the period of ``P``.

    Then ``P(a(T x)) = P(a(x) + Q) = P(a(x))``.
    """
    n = _integer_ratio(abs(a.Q), P.period)
    if n is None:
        raise PeriodMismatch(
            f"|Q| = {abs(a.Q)} is not an integer multiple of the period {P.period}")
    ae, Pe = a.eval, P.eval

    def f(x):
        return Pe(ae(x))

    return WaveProfileFunction(a.domain, f, "periodic_composition", 0.0, a.map,
                               f"{P.kind}[{a.tag}]")


def general_abel_solution(a: AbelSolution, P: PeriodicFunction) -> AbelSolution:
    """``u + P(u)`` with ``u = a/Q`` rescaled to unit flux and ``P`` of period 1.

    The result is flagged increasing when ``a`` is and ``sup |P'| < 1``.
    """
    if abs(P.period - 1.0) > PERIOD_TOL:
        raise PeriodMismatch(f"P must have period 1 after rescaling, got {P.period}")
    Q, ae, Pe = a.Q, a.eval, P.eval

    def agen(x):
        u = np.asarray(ae(x), dtype=float) / Q
        return _out(u + Pe(u), x)

    inc = bool(a.increasing and Q > 0 and P.derivative_bound is not None
               and P.derivative_bound < 1.0)
    return AbelSolution(a.map, 1.0, agen, a.domain, None, a.seed, f"general[{a.tag}]",
                        inc, a.window)


def postcompose(f: WaveProfileFunction, F: Callable) -> WaveProfileFunction:
    """``F o f``; still a standing-wave solution, with possibly more nodal curves."""
    if f.flux != 0:
        raise InvalidParams("post-composition needs a zero-flux solution")
    fe = f.eval

    def g(x):
        y = fe(x)
        return _out(F(np.asarray(y, dtype=float)), y)

    return WaveProfileFunction(f.domain, g, "postcomposed", 0.0, f.map, f"F[{f.label}]")


def pointwise_min(f0: WaveProfileFunction, f1: WaveProfileFunction) -> WaveProfileFunction:
    if f0.flux != f1.flux:
        raise InvalidParams("both solutions must carry the same flux")

    def g(x):
        return _out(np.minimum(f0.eval(x), f1.eval(x)), x)

    return WaveProfileFunction(f0.domain, g, "custom", f0.flux, f0.map, "min")


def convex_combination(f0: WaveProfileFunction, f1: WaveProfileFunction, t: float) -> WaveProfileFunction:
    if not 0.0 <= t <= 1.0:
        raise InvalidParams("t must lie in [0, 1]")
    if f0.flux != f1.flux:
        raise InvalidParams("both solutions must carry the same flux")

    def g(x):
        return _out((1 - t) * np.asarray(f0.eval(x)) + t * np.asarray(f1.eval(x)), x)

    return WaveProfileFunction(f0.domain, g, "custom", f0.flux, f0.map, f"convex[{t}]")


# --------------------------------------------------------------------------
# semi-ellipse

def barcilon_solution(m: int, k: int, P: Optional[PeriodicFunction] = None):
    """Standing wave in the semi-ellipse ``d = sqrt(1 - x^2)``.

    With ``theta = m pi / k`` the ray slope is ``nu = cot(theta)`` and
    ``f(X) = P(arccos(X cos(theta)))``.  ``P`` must be even and its period
    must divide both ``2 theta`` and ``2 pi``; the default
    ``P = cos(k .)`` gives the Chebyshev mode ``T_k(X cos(theta))``.

    Returns
    -------
    nu : float
    f : WaveProfileFunction
    """
    if not (isinstance(m, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise InvalidModeNumbers("m and k must be integers")
    if not (m > 0 and k > 0 and 2 * m < k):
        raise InvalidModeNumbers(f"need 0 < m/k < 1/2, got m={m}, k={k}")
    theta = m * math.pi / k
    nu = math.cos(theta) / math.sin(theta)
    if P is None:
        P = periodic("cosine", 2 * math.pi / k)
    if _integer_ratio(2 * theta, P.period) is None or _integer_ratio(2 * math.pi, P.period) is None:
        raise PeriodMismatch(
            f"period {P.period} must divide both 2*theta = {2 * theta} and 2*pi")
    t = np.linspace(0.0, P.period, 97)
    if np.max(np.abs(np.asarray(P(-t)) - np.asarray(P(t)))) > 1e-12:
        raise InvalidParams("the periodic function must be even")
    c = math.cos(theta)
    Pe = P.eval

    def f(X):
        u = np.asarray(X, dtype=float) * c
        # absorb rounding overshoot at |u| = 1 only
        u = np.where(np.abs(u) > 1.0, np.where(np.abs(u) <= 1.0 + 1e-12, np.sign(u), np.nan), u)
        return _out(Pe(np.arccos(u)), X)

    fmap = build_forward_map(make_profile("semi_ellipse", nu=nu))
    half = 1.0 / c
    fw = WaveProfileFunction(Interval.closed(-half, half), f, "barcilon", 0.0, fmap,
                             f"semi_ellipse_mode[m={m},k={k},{P.kind}]")
    return nu, fw


# --------------------------------------------------------------------------
# involutions

@dataclass(frozen=True, eq=False)
class Involution:
    """A map whose ``order``-fold self-composition is the identity.

    ``domain`` is where the identity is checked.  Iterates may leave it: the
    order-3 map ``1/(1-x)`` cycles through three disjoint intervals, so
    ``solution_domain``, the hull on which orbit solutions are evaluated, is
    wider than ``domain``.
    """

    order: int
    eval: Callable
    domain: Interval
    name: str = ""
    window: Optional[Interval] = None
    solution_domain: Optional[Interval] = None

    def __post_init__(self):
        if self.solution_domain is None:
            object.__setattr__(self, "solution_domain", self.domain)
        if self.order < 2:
            raise InvalidParams("involution order must be at least 2")
        if self.window is None:
            object.__setattr__(self, "window", Interval.closed(self.domain.lo, self.domain.hi))

    def __call__(self, x):
        return self.eval(x)

    def power(self, j: int, x):
        y = np.asarray(x, dtype=float)
        for _ in range(j % self.order):
            y = np.asarray(self.eval(y), dtype=float)
        return _out(y, x)


def _probes(window: Interval, domain: Interval, n: int) -> np.ndarray:
    xs = window.interior(n)
    return xs[domain.contains(xs)]


def _identity_error(y, x):
    with np.errstate(invalid="ignore"):
        return np.max(np.abs(y - x) / np.maximum(1.0, np.abs(x)))


def verify_involution(invol: Involution, n: int = 100, tol: float = 1e-10) -> float:
    """Largest relative deviation of ``invol^[order]`` from the identity.

    Raises
    ------
    NotInvolution
    """
    xs = _probes(invol.window, invol.domain, n)
    y = xs.copy()
    for _ in range(invol.order):
        y = np.asarray(invol.eval(y), dtype=float)
    err = _identity_error(y, xs)
    if not err <= tol:
        raise NotInvolution(f"{invol.name or 'map'}: order-{invol.order} composition "
                            f"misses the identity by {err:.3g}")
    return float(err)


def involution_map(invol: Involution) -> ForwardMap:
    """View an involution as a forward map (inverse = ``order - 1`` iterates)."""

    def inv(y):
        return invol.power(invol.order - 1, y)

    return ForwardMap(invol.eval, inv, invol.domain, (None, None), "closed_form", None,
                      {"order": invol.order}, invol.window, f"invol[{invol.name}]")


def detect_involution(fmap: ForwardMap, max_order: int = 8, n: int = 100,
                      tol: float = 1e-10) -> Optional[int]:
    """Smallest ``k`` in ``2..max_order`` with ``T^[k] = id`` on ``n`` probes.

    The identity map itself (order 1) is reported as ``None``.
    """
    xs = _probes(fmap.window, fmap.domain, n)
    if xs.size == 0:
        return None
    y = xs.copy()
    for k in range(1, max_order + 1):
        with np.errstate(all="ignore"):
            y = np.asarray(fmap.eval(y), dtype=float)
        if not np.all(np.isfinite(y)):
            return None
        if _identity_error(y, xs) <= tol:
            return None if k == 1 else k
    return None


def _sym_sum(*u):
    return sum(np.asarray(v, dtype=float) for v in u)


def _sym_product(*u):
    out = 1.0
    for v in u:
        out = out * np.asarray(v, dtype=float)
    return out


SYMMETRIC_FUNCTIONS = {
    "sum": _sym_sum,
    "product": _sym_product,
    "min": lambda *u: np.minimum.reduce([np.asarray(v, dtype=float) for v in u]),
    "max": lambda *u: np.maximum.reduce([np.asarray(v, dtype=float) for v in u]),
    "sum_squares": lambda *u: _sym_sum(*(np.asarray(v, dtype=float) ** 2 for v in u)),
    "sum_fourth_powers": lambda *u: _sym_sum(*(np.asarray(v, dtype=float) ** 4 for v in u)),
}


def symmetric_function(name: str) -> Callable:
    try:
        return SYMMETRIC_FUNCTIONS[name]
    except KeyError:
        raise InvalidParams(f"unknown symmetric function {name!r}; "
                            f"choose from {sorted(SYMMETRIC_FUNCTIONS)}") from None


def involution_solution(invol: Involution, S: Callable, n_check: int = 100,
                        seed: int = 0) -> WaveProfileFunction:
    """``f(x) = S(x, h(x), ..., h^[k-1](x))`` for an involution ``h`` of order ``k``.

    ``S`` must be invariant under cyclic rotation of its ``k`` arguments;
    this is checked on ``n_check`` random tuples.
    """
    verify_involution(invol)
    k = invol.order
    rng = np.random.default_rng(seed)
    w = invol.window
    args = [rng.uniform(w.lo, w.hi, n_check) for _ in range(k)]
    s0 = np.asarray(S(*args), dtype=float)
    s1 = np.asarray(S(*args[1:], args[0]), dtype=float)
    if np.max(np.abs(s0 - s1) / np.maximum(1.0, np.abs(s0))) > 1e-12:
        raise NotCyclicInvariant("S changes under cyclic rotation of its arguments")

    def f(x):
        x = np.asarray(x, dtype=float)
        orbit = [x]
        for _ in range(k - 1):
            orbit.append(np.asarray(invol.eval(orbit[-1]), dtype=float))
        return _out(S(*orbit), x)

    return WaveProfileFunction(invol.solution_domain, f, "involution", 0.0, involution_map(invol),
                               f"S[{invol.name}]")


def _reciprocal(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return _out(1.0 / x, x)


def involution_catalog(name: str, params: Optional[Mapping] = None) -> Involution:
    """Named involutions.

    ``reciprocal`` (1/x on x < 0), ``mobius`` ((x0 - x)/(1 + b x)),
    ``circle`` (sqrt(2 b^2 - x^2)), ``quadrant`` (sign(x) sqrt(1 - x^2)),
    ``piecewise_linear`` (PL(x0, m, x)) and the order-3 map ``order3``
    (1/(1 - x)).
    """
    p = dict(params or {})
    if name == "reciprocal":
        return Involution(2, _reciprocal, Interval.open(-math.inf, 0.0), name,
                          Interval.closed(-4.0, -0.25))
    if name == "mobius":
        x0, b = float(p.get("x0", 0.0)), float(p.get("b", 1.0))
        if not (b > 0 and 1 + b * x0 > 0):
            raise InvalidParams("mobius involution needs b > 0 and 1 + b x0 > 0")
        pole = -1.0 / b

        def h(x):
            x = np.asarray(x, dtype=float)
            return _out((x0 - x) / (1 + b * x), x)

        return Involution(2, h, Interval.open(-math.inf, pole), name,
                          Interval.closed(pole - 4.0, pole - 0.25))
    if name == "circle":
        b = float(p.get("b", 1.0))
        if not b > 0:
            raise InvalidParams("circle involution needs b > 0")

        def h(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore"):
                return _out(np.sqrt(2 * b * b - x * x), x)

        return Involution(2, h, Interval.closed(0.0, math.sqrt(2) * b), name)
    if name == "quadrant":
        def h(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(invalid="ignore"):
                return _out(np.sign(x) * np.sqrt(1 - x * x), x)

        return Involution(2, h, Interval.open(-1.0, 1.0), name, Interval.closed(-1.0, 1.0))
    if name == "piecewise_linear":
        x0, m = float(p.get("x0", 0.0)), float(p.get("m", 2.0))
        if not m > 1:
            raise InvalidParams("piecewise linear involution needs m > 1")
        a, c = 0.5 * (m - 1 / m), 0.5 * (m + 1 / m)

        def h(x):
            x = np.asarray(x, dtype=float)
            return _out(a * np.abs(x0 - x) + c * (x0 - x) + x0, x)

        return Involution(2, h, Interval.open(-math.inf, math.inf), name,
                          Interval.closed(x0 - 2.0, x0 + 2.0))
    if name == "order3":
        def h(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return _out(1.0 / (1.0 - x), x)

        # the orbit of x < 0 runs through (0, 1) and (1, inf)
        return Involution(3, h, Interval.open(-math.inf, 0.0), name,
                          Interval.closed(-4.0, -0.25), Interval.open(-math.inf, math.inf))
    raise InvalidParams(f"unknown involution {name!r}")
