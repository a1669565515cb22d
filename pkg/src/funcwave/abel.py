"""Solutions of the Abel equation ``a(T(x)) = a(x) + Q``.

Two routes are provided: extension of a seed prescribed on a fundamental
interval ``[x0, T(x0))`` to the whole domain, and a catalog of closed forms
for the profiles whose forward map is known explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .charmap import ITERATION_CAP, ForwardMap, build_forward_map
from .errors import (
    InvalidParams,
    InvolutionObstruction,
    IterationCapExceeded,
    NotInvertible,
    NotPositive,
    NotSchroderSolution,
    OutOfDomain,
    ScaleIsOne,
    SeedJumpMismatch,
    UnknownKind,
)
from .geometry import Interval, ProfileKind, make_profile

__all__ = [
    "AbelSolution",
    "SeedFunction",
    "closed_form_abel",
    "extend_seed",
    "locate_interval",
    "schroder_to_abel",
]

MEMBERSHIP_TOL = 1e-12


def _out(v, like):
    v = np.asarray(v, dtype=float)
    return float(v) if np.ndim(like) == 0 else v


@dataclass(frozen=True, eq=False)
class SeedFunction:
    """A strictly increasing ``a0`` prescribed on ``[x0, x1)``.

    ``eval`` must be defined up to and including ``x1`` so that the jump
    ``a0(x1) - a0(x0)`` is available.
    """

    interval: Interval
    eval: Callable

    def __post_init__(self):
        iv = self.interval
        if not iv.is_bounded:
            raise InvalidParams("the fundamental interval must be bounded")
        lat = np.linspace(iv.lo, iv.hi, 65)
        vals = np.asarray(self.eval(lat), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise SeedJumpMismatch("seed is not finite on the closed fundamental interval")
        if np.any(np.diff(vals) <= 0):
            raise InvalidParams("seed must be strictly increasing")

    @classmethod
    def tabulated(cls, xs, ys):
        """Monotone cubic interpolation of ``(xs, ys)``; the last node is ``x1``."""
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        interp = PchipInterpolator(xs, ys, extrapolate=True)
        return cls(Interval.half_open(xs[0], xs[-1]), interp)

    @property
    def x0(self) -> float:
        return self.interval.lo

    @property
    def jump(self) -> float:
        return float(self.eval(self.interval.hi)) - float(self.eval(self.interval.lo))


@dataclass(frozen=True, eq=False)
class AbelSolution:
    """A solution ``a`` of ``a(T(x)) = a(x) + Q`` over ``map``.

    ``tag`` names the closed form (``"arctanh"``, ...) or ``"seed"`` for
    extensions.  ``increasing`` is ``True`` only when strict monotonicity
    is known.
    """

    map: ForwardMap
    Q: float
    eval: Callable
    domain: Interval
    inverse: Optional[Callable] = None
    seed: Optional[SeedFunction] = None
    tag: str = ""
    increasing: bool = False
    window: Optional[Interval] = None
    branch: Optional[Callable] = None

    def __post_init__(self):
        if not (math.isfinite(self.Q) and self.Q != 0):
            raise InvalidParams("Q must be finite and nonzero")
        if self.window is None:
            object.__setattr__(self, "window", self.map.window)

    def __call__(self, x):
        return self.eval(x)


# --------------------------------------------------------------------------
# extension of a seed

def _pull_back(fmap: ForwardMap, x0: float, x1: float, x, cap: int):
    """Bring every ``x`` into ``[x0, x1)`` by iterating ``T`` or its inverse.

    Returns ``(k, y)`` with ``y = T^[-k](x)`` in the fundamental interval.
    Each point moves in one direction only, so tolerance at the ends cannot
    make it oscillate.
    """
    y = np.atleast_1d(np.asarray(x, dtype=float)).astype(float)
    dom = fmap.domain
    inside = (y > dom.lo) & (y < dom.hi)
    if not np.all(inside):
        raise OutOfDomain(f"x must lie strictly inside {dom}")
    k = np.zeros(y.shape, dtype=np.int64)
    back = y >= x1 - MEMBERSHIP_TOL
    fwd = y < x0 - MEMBERSHIP_TOL
    for _ in range(cap + 1):
        back &= y >= x1 - MEMBERSHIP_TOL
        fwd &= y < x0 - MEMBERSHIP_TOL
        if not (back.any() or fwd.any()):
            return k, y
        if back.any():
            y[back] = fmap.inverse(y[back])
            k[back] += 1
        if fwd.any():
            y[fwd] = fmap.eval(y[fwd])
            k[fwd] -= 1
    raise IterationCapExceeded(
        f"more than {cap} applications of T needed; x is too close to an end of {dom}")


def locate_interval(fmap: ForwardMap, x0: float, x: float, cap: int = ITERATION_CAP) -> int:
    """The ``k`` with ``x`` in ``[T^[k](x0), T^[k+1](x0))``."""
    x0 = float(x0)
    k, _ = _pull_back(fmap, x0, float(fmap.eval(x0)), float(x), cap)
    return int(k[0])


def extend_seed(fmap: ForwardMap, seed: SeedFunction, Q: Optional[float] = None,
                cap: int = ITERATION_CAP) -> AbelSolution:
    """Extend ``seed`` from ``[x0, T(x0))`` to the whole domain of ``fmap``.

    On ``[T^[k](x0), T^[k+1](x0))`` the extension is
    ``a0(T^[-k](x)) + k Q`` with ``Q = a0(T(x0)) - a0(x0)``.

    Raises
    ------
    InvolutionObstruction
        ``fmap`` has finite order, so no Abel solution with ``Q != 0`` exists.
    SeedJumpMismatch
        The seed interval does not end at ``T(x0)`` or ``Q`` disagrees with
        the jump of the seed.
    """
    from .schroder import detect_involution

    order = detect_involution(fmap, max_order=8)
    if order is not None:
        raise InvolutionObstruction(
            f"{fmap.name or 'map'} is an involution of order {order}; "
            "summing the Abel equation around one cycle forces Q = 0")
    x0 = seed.x0
    x1 = float(fmap.eval(x0))
    if not x1 > x0:
        raise SeedJumpMismatch(f"T(x0)={x1} does not exceed x0={x0}")
    if abs(seed.interval.hi - x1) > 1e-10 * max(1.0, abs(x1)):
        raise SeedJumpMismatch(
            f"seed interval ends at {seed.interval.hi}, but T(x0) = {x1}")
    jump = float(seed.eval(x1)) - float(seed.eval(x0))
    if Q is None:
        Q = jump
    elif abs(Q - jump) > 1e-9 * max(1.0, abs(Q)):
        raise SeedJumpMismatch(f"seed jump {jump} differs from Q={Q}")
    if fmap.eval_inverse is None:
        raise NotInvertible("seed extension needs the inverse map")
    Q = float(Q)
    a0 = seed.eval

    def a(x):
        k, y = _pull_back(fmap, x0, x1, x, cap)
        return _out((np.asarray(a0(y), dtype=float) + k * Q).reshape(np.shape(x)), x)

    def branch(x, k: int):
        """Formula of the ``k``-th piece evaluated at ``x`` (no membership test)."""
        y = np.asarray(x, dtype=float)
        step = fmap.inverse if k >= 0 else fmap.eval
        for _ in range(abs(k)):
            y = np.asarray(step(y), dtype=float)
        return _out(np.asarray(a0(y), dtype=float) + k * Q, x)

    return AbelSolution(fmap, Q, a, Interval.open(fmap.domain.lo, fmap.domain.hi),
                        None, seed, "seed", True, fmap.window, branch)


# --------------------------------------------------------------------------
# closed forms

def _closed_form_parts(profile, fmap, Q):
    kind, p = profile.kind, profile.params
    if kind is ProfileKind.WEDGE:
        q, b = fmap.params["p"], p["b"]
        Q = 1.0 if Q is None else Q
        lq = math.log(q)

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(Q * np.log(b - x) / lq, x)

        def ainv(y):
            y = np.asarray(y, dtype=float)
            return _out(b - np.exp(lq * y / Q), y)

        return a, ainv, Q, "log", Interval(-math.inf, b, False, False)

    if kind is ProfileKind.ISOSCELES_TRIANGLE:
        tau, q = fmap.params["tau_eff"], fmap.params["p"]
        Q0 = 2 * tau
        Q = Q0 if Q is None else Q
        lq = math.log(q)

        def a(x):
            x = np.asarray(x, dtype=float)
            out = x.astype(float).copy()
            right = x >= tau
            left = x < -tau
            with np.errstate(divide="ignore", invalid="ignore"):
                lr = np.log((1 - x) / (1 - tau)) / lq
                nr = np.floor(lr) + 1
                ll = np.log((x + 1) / (1 - tau)) / lq
                nl = np.maximum(np.ceil(ll), 1)
            out = np.where(right, q ** (-nr) * (x - 1) + 1 + Q0 * nr, out)
            out = np.where(left, q ** (-nl) * (x + 1) - 1 - Q0 * nl, out)
            return _out(out * (Q / Q0), x)

        return a, None, Q, "piecewise_linear", Interval.open(-1.0, 1.0)

    if kind is ProfileKind.HYPERBOLIC_LENS:
        Q0 = math.atanh(1.0 / p["c"])
        Q = Q0 if Q is None else Q

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(np.arctanh(x) * (Q / Q0), x)

        def ainv(y):
            y = np.asarray(y, dtype=float)
            return _out(np.tanh(y * (Q0 / Q)), y)

        return a, ainv, Q, "arctanh", Interval.open(-1.0, 1.0)

    if kind is ProfileKind.HYPERBOLIC_HUMP:
        Q0 = 2 * math.atanh(p["tau"])
        Q = Q0 if Q is None else Q

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(np.arcsinh(x) * (Q / Q0), x)

        def ainv(y):
            y = np.asarray(y, dtype=float)
            return _out(np.sinh(y * (Q0 / Q)), y)

        return a, ainv, Q, "arcsinh", Interval.open(-math.inf, math.inf)

    if kind is ProfileKind.DAI_HYPERBOLA and "d0" not in p:
        r_eff = fmap.params["r_eff"]
        Q = 1.0 if Q is None else Q

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(Q * x * x / (4 * r_eff), x)

        def ainv(y):
            # the branch on the positive half-line
            y = np.asarray(y, dtype=float)
            with np.errstate(invalid="ignore"):
                return _out(np.sqrt(4 * r_eff * y / Q), y)

        return a, ainv, Q, "quadratic", Interval.open(-math.inf, math.inf)

    if kind is ProfileKind.DAI_HYPERBOLA:
        d0, r = p["d0"], p["r"]
        Q = 1.0 if Q is None else Q

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(0.5 * Q * (d0 * x + 0.5 * r * x * x), x)

        def ainv(y):
            y = np.asarray(y, dtype=float)
            with np.errstate(invalid="ignore"):
                return _out((-d0 + np.sqrt(d0 * d0 + 4 * r * y / Q)) / r, y)

        return a, ainv, Q, "quadratic", Interval.open(-d0 / r, math.inf)

    if kind is ProfileKind.PARABOLIC_SEGMENT:
        c = p.get("c", 0.25)
        Q = 1.0 if Q is None else Q
        lc, l2 = math.log1p(-2 * c), math.log(2.0)

        def a(x):
            x = np.asarray(x, dtype=float)
            return _out(Q * np.log(np.log1p(-2 * x) / lc) / l2, x)

        def ainv(y):
            y = np.asarray(y, dtype=float)
            return _out(-0.5 * np.expm1(np.exp2(y / Q) * lc), y)

        return a, ainv, Q, "loglog", Interval.open(0.0, 0.5)
    return None


def closed_form_abel(kind, params: Optional[Mapping] = None, nu: float = 1.0,
                     Q: Optional[float] = None) -> AbelSolution:
    """Catalog Abel solution for a profile kind.

    Parameters
    ----------
    kind, params, nu
        As for :func:`funcwave.geometry.make_profile`.
    Q : float, optional
        Target flux.  Defaults to the natural one of each closed form
        (``2 tau`` for the triangle, ``arctanh(1/c)`` for the lens,
        ``2 arctanh(tau)`` for the hump and 1 otherwise).  Any other value
        rescales the solution.

    Raises
    ------
    UnknownKind
        No closed form is registered for this kind (or for these
        parameters, e.g. the lens with ``nu != 1``).
    """
    profile = make_profile(kind, params, nu)
    if Q is not None and not (math.isfinite(Q) and Q != 0):
        raise InvalidParams("Q must be finite and nonzero")
    if profile.kind is ProfileKind.DAI_HYPERBOLA and "d0" in profile.params:
        if profile.nu != 1.0 or profile.params.get("scale", 1.0) != 1.0:
            raise UnknownKind("the shifted hyperbolic profile 1/(d0 + r x) is only solved for nu = 1")
        fmap = build_forward_map(profile, "numeric")
    else:
        try:
            fmap = build_forward_map(profile, "closed_form")
        except NotInvertible:
            raise UnknownKind(f"no closed-form Abel solution for {profile!r}") from None
    parts = _closed_form_parts(profile, fmap, Q)
    if parts is None:
        raise UnknownKind(f"no closed-form Abel solution for {profile!r}")
    a, ainv, Q, tag, dom = parts
    increasing = Q > 0 and tag != "quadratic"
    return AbelSolution(fmap, float(Q), a, dom, ainv, None, tag, increasing, profile.window)


def schroder_to_abel(f: Callable, s: float, fmap: ForwardMap, n: int = 200,
                     tol: float = 1e-9) -> AbelSolution:
    """``a = log(f)/log(s)`` from a positive solution of ``f(T(x)) = s f(x)``.

    The result solves the Abel equation with ``Q = 1``.
    """
    s = float(s)
    if not s > 0:
        raise NotPositive(f"the Schroder factor must be positive, got {s}")
    if s == 1.0:
        raise ScaleIsOne("log(s) vanishes for s = 1")
    xs = fmap.window.interior(n)
    xs = xs[fmap.domain.contains(xs)]
    fx = np.asarray(f(xs), dtype=float)
    if np.any(~(fx > 0)):
        raise NotPositive("f must be positive on the domain")
    ftx = np.asarray(f(fmap.eval(xs)), dtype=float)
    err = np.abs(ftx - s * fx) / np.maximum(1.0, np.abs(s * fx))
    if not np.all(err <= tol):
        raise NotSchroderSolution(f"f(T(x)) != s f(x): worst relative error {np.nanmax(err):.3g}")
    ls = math.log(s)

    def a(x):
        return _out(np.log(np.asarray(f(np.asarray(x, dtype=float)), dtype=float)) / ls, x)

    increasing = bool(np.all(np.diff(a(xs)) > 0))
    return AbelSolution(fmap, 1.0, a, Interval.open(fmap.domain.lo, fmap.domain.hi),
                        None, None, "schroder_log", increasing, fmap.window)
