"""Build profiles, forward maps and solutions from JSON-style specs.

Shared by the verification suite and the command line.  A solution spec is
an object with a ``type``:

``abel``
    catalog closed form for the profile; optional ``Q``.
``extend_seed``
    ``seed`` is ``"closed_form"`` (restriction of the catalog solution),
    ``"identity"`` or ``{"samples": [[x, y], ...]}``; ``x0`` is the left end
    of the fundamental interval; optional ``Q``.
``periodic``
    ``P o a`` with ``abel`` a nested solution spec (default ``abel``) and
    ``periodic`` a periodic-function spec whose period defaults to ``|Q|``.
``semi_ellipse_mode``
    semi-ellipse mode with integers ``m``, ``k`` and optional ``periodic``.
``involution``
    ``involution`` catalog name with ``params`` and a ``symmetric`` function.
``postcompose``
    ``base`` solution spec and ``outer`` in square, cosine, triangle_wave.
``min`` / ``convex``
    ``first`` and ``second`` solution specs (and ``t`` for ``convex``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from .abel import AbelSolution, SeedFunction, closed_form_abel, extend_seed
from .charmap import ForwardMap, build_forward_map
from .errors import InvalidParams
from .geometry import DepthProfile, Interval, make_profile, profile_from_json
from .schroder import (
    WaveProfileFunction,
    as_wave_function,
    barcilon_solution,
    compose_periodic,
    convex_combination,
    involution_catalog,
    involution_map,
    involution_solution,
    periodic_from_json,
    pointwise_min,
    postcompose,
    symmetric_function,
    triangle_wave,
)

__all__ = ["Built", "build_solution", "load_config", "OUTER_FUNCTIONS"]

OUTER_FUNCTIONS = {
    "square": np.square,
    "cosine": np.cos,
    "triangle_wave": triangle_wave,
}


@dataclass(frozen=True, eq=False)
class Built:
    """A constructed solution with everything needed to check it."""

    solution: Union[AbelSolution, WaveProfileFunction]
    profile: Optional[DepthProfile]
    map: ForwardMap

    @property
    def is_abel(self) -> bool:
        return isinstance(self.solution, AbelSolution)

    @property
    def flux(self) -> float:
        return self.solution.Q if self.is_abel else self.solution.flux

    @property
    def wave(self) -> WaveProfileFunction:
        return as_wave_function(self.solution) if self.is_abel else self.solution

    @property
    def nu(self) -> float:
        return self.profile.nu if self.profile is not None else 1.0

    def perturbed(self, eps: float) -> "Built":
        """``f + eps x``; used to confirm the checks catch a broken solution."""
        w = self.wave
        fe = w.eval

        def g(x):
            return np.asarray(fe(x), dtype=float) + eps * np.asarray(x, dtype=float)

        return replace(self, solution=replace(w, eval=g, label=f"{w.label}+{eps}x"))


def _need_profile(profile, what):
    if profile is None:
        raise InvalidParams(f"solution type {what!r} needs a profile")
    return profile


def _seed(spec, fmap: ForwardMap, profile: DepthProfile) -> SeedFunction:
    x0 = float(spec.get("x0", fmap.window.lo))
    x1 = float(fmap.eval(x0))
    iv = Interval.half_open(x0, x1)
    kind = spec.get("seed", "closed_form")
    if kind == "closed_form":
        a = closed_form_abel(profile.kind, dict(profile.params), profile.nu, spec.get("Q"))
        return SeedFunction(iv, a.eval)
    if kind == "identity":
        return SeedFunction(iv, lambda x: np.asarray(x, dtype=float))
    if isinstance(kind, Mapping) and "samples" in kind:
        s = np.asarray(kind["samples"], dtype=float)
        return SeedFunction.tabulated(s[:, 0], s[:, 1])
    raise InvalidParams(f"unknown seed {kind!r}")


def build_solution(spec: Mapping, profile: Optional[DepthProfile] = None) -> Built:
    """Construct the solution described by ``spec`` (see module docstring)."""
    if not isinstance(spec, Mapping):
        raise InvalidParams("solution spec must be an object")
    t = spec.get("type", "abel")
    if t == "abel":
        p = _need_profile(profile, t)
        a = closed_form_abel(p.kind, dict(p.params), p.nu, spec.get("Q"))
        return Built(a, p, a.map)
    if t == "extend_seed":
        p = _need_profile(profile, t)
        fmap = build_forward_map(p, spec.get("method", "auto"))
        a = extend_seed(fmap, _seed(spec, fmap, p), spec.get("Q"))
        return Built(a, p, fmap)
    if t == "periodic":
        inner = build_solution(spec.get("abel", {"type": "abel"}), profile)
        if not inner.is_abel:
            raise InvalidParams("'abel' must describe an Abel solution")
        P = periodic_from_json(spec.get("periodic", {"kind": "cosine"}),
                               default_period=abs(inner.solution.Q))
        return Built(compose_periodic(inner.solution, P), inner.profile, inner.map)
    if t == "semi_ellipse_mode":
        P = periodic_from_json(spec["periodic"]) if "periodic" in spec else None
        nu, f = barcilon_solution(int(spec["m"]), int(spec["k"]), P)
        return Built(f, make_profile("semi_ellipse", nu=nu), f.map)
    if t == "involution":
        invol = involution_catalog(spec.get("involution", "reciprocal"), spec.get("params"))
        f = involution_solution(invol, symmetric_function(spec.get("symmetric", "sum")))
        return Built(f, profile, involution_map(invol))
    if t == "postcompose":
        base = build_solution(spec["base"], profile)
        outer = spec.get("outer", "square")
        if outer not in OUTER_FUNCTIONS:
            raise InvalidParams(f"unknown outer function {outer!r}")
        return replace(base, solution=postcompose(base.wave, OUTER_FUNCTIONS[outer]))
    if t in ("min", "convex"):
        b0 = build_solution(spec["first"], profile)
        b1 = build_solution(spec["second"], profile)
        if t == "min":
            f = pointwise_min(b0.wave, b1.wave)
        else:
            f = convex_combination(b0.wave, b1.wave, float(spec.get("t", 0.5)))
        return replace(b0, solution=f)
    raise InvalidParams(f"unknown solution type {t!r}")


def build_case(cfg: Mapping) -> Built:
    """Profile (optional) plus solution from a config object."""
    profile = profile_from_json(cfg["profile"]) if "profile" in cfg else None
    return build_solution(cfg.get("solution", {"type": "abel"}), profile)


def _bundled(kind: str, name: str) -> Optional[str]:
    fname = name if name.endswith(".json") else name + ".json"
    res = resources.files("funcwave").joinpath("data", kind, fname)
    return res.read_text() if res.is_file() else None


def load_config(ref: Union[str, Path], kind: str = "configs") -> dict:
    """Read JSON from a path, falling back to a bundled file of that name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
    else:
        text = _bundled(kind, str(ref))
        if text is None:
            raise InvalidParams(f"no config file or bundled {kind[:-1]} named {str(ref)!r}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidParams(f"{ref}: invalid JSON ({e})") from None
    if not isinstance(obj, dict):
        raise InvalidParams(f"{ref}: top level must be an object")
    return obj


def bundled_names(kind: str = "configs") -> list:
    d = resources.files("funcwave").joinpath("data", kind)
    return sorted(p.name for p in d.iterdir() if p.name.endswith(".json"))
