"""Stream functions ``psi(x, z) = f(x - z/nu) - f(x + z/nu)`` and their grids.

Grids are stored row-major with ``x`` varying fastest: ``values[j, i]`` is
the node ``(x[i], z[j])``, ``z`` ascends so the surface row ``z = 0`` is
last.  Nodes below the bottom are masked and hold an exact zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams, OutOfExtensionDomain
from .geometry import DepthProfile
from .schroder import WaveProfileFunction

__all__ = [
    "DOMAIN_TOL",
    "FieldGrid",
    "Rect",
    "ResidualReport",
    "StreamField",
    "boundary_residual",
    "extend_field",
    "nodal_cells",
    "parity_residual",
    "pde_residual",
    "sample_grid",
]

DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class Rect:
    x_lo: float
    x_hi: float
    z_lo: float
    z_hi: float

    def __post_init__(self):
        vals = (self.x_lo, self.x_hi, self.z_lo, self.z_hi)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParams("window bounds must be finite")
        if not (self.x_lo < self.x_hi and self.z_lo < self.z_hi):
            raise InvalidParams(f"empty window {vals}")

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """From ``"x0,x1,z0,z1"``."""
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) != 4:
            raise InvalidParams(f"window needs four comma-separated numbers, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise InvalidParams(f"bad window {text!r}") from None

    @classmethod
    def of(cls, w) -> "Rect":
        return w if isinstance(w, Rect) else cls(*(float(v) for v in w))

    def as_tuple(self):
        return (self.x_lo, self.x_hi, self.z_lo, self.z_hi)


@dataclass(frozen=True)
class ResidualReport:
    samples: int
    max_abs: float
    mean_abs: float
    argmax: tuple

    @classmethod
    def from_errors(cls, err, *coords) -> "ResidualReport":
        err = np.abs(np.asarray(err, dtype=float)).ravel()
        if err.size == 0:
            return cls(0, 0.0, 0.0, ())
        if np.any(np.isnan(err)):
            i = int(np.argmax(np.isnan(err)))
            mx, mean = math.inf, math.inf
        else:
            i = int(np.argmax(err))
            mx, mean = float(err[i]), float(err.mean())
        loc = tuple(float(np.ravel(c)[i]) for c in coords)
        return cls(int(err.size), mx, mean, loc)

    def passed(self, tol: float) -> bool:
        return self.max_abs < tol

    def to_json(self) -> dict:
        return {"samples": self.samples, "max_abs": self.max_abs,
                "mean_abs": self.mean_abs, "argmax": list(self.argmax)}


@dataclass(frozen=True, eq=False)
class StreamField:
    """d'Alembert extension of a surface profile ``f`` with ray slope ``nu``."""

    f: WaveProfileFunction
    nu: float
    flux: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise InvalidParams(f"nu must be positive, got {self.nu}")

    def psi(self, x, z):
        """Evaluate ``psi``; exactly zero on ``z = 0``.

        Raises
        ------
        OutOfExtensionDomain
            Some ``x -/+ z/nu`` lies outside the domain of ``f``.
        """
        x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
        u, v = x - z / self.nu, x + z / self.nu
        top = z == 0
        dom = self.f.domain
        ok = np.where(top, dom.contains(x, DOMAIN_TOL),
                      dom.contains(u, DOMAIN_TOL) & dom.contains(v, DOMAIN_TOL))
        if not np.all(ok):
            bad = np.argwhere(~np.atleast_1d(ok))[0]
            xb, zb = np.atleast_1d(x)[tuple(bad)], np.atleast_1d(z)[tuple(bad)]
            raise OutOfExtensionDomain(
                f"psi({xb:.6g}, {zb:.6g}) needs f outside its domain {dom.lo}..{dom.hi}")
        out = np.zeros(x.shape)
        rest = ~top
        if np.any(rest):
            fe = self.f.eval
            out[rest] = np.asarray(fe(u[rest]), dtype=float) - np.asarray(fe(v[rest]), dtype=float)
        return float(out) if out.ndim == 0 else out

    __call__ = psi


def extend_field(f: WaveProfileFunction, nu: float) -> StreamField:
    return StreamField(f, float(nu), float(f.flux))


@dataclass(frozen=True, eq=False)
class FieldGrid:
    window: Rect
    x: np.ndarray
    z: np.ndarray
    values: np.ndarray
    inside: np.ndarray

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def nz(self) -> int:
        return len(self.z)

    def to_csv(self, fh=None) -> Optional[str]:
        """Header ``x,z,psi,inside``; one node per row, 17 significant digits."""
        own = fh is None
        if own:
            fh = io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "z", "psi", "inside"])
        X, Z = np.meshgrid(self.x, self.z)
        for xv, zv, pv, iv in zip(X.ravel(), Z.ravel(), self.values.ravel(), self.inside.ravel()):
            w.writerow([f"{xv:.17g}", f"{zv:.17g}", f"{pv:.17g}", int(iv)])
        return fh.getvalue() if own else None

    def to_json(self) -> dict:
        return {
            "window": list(self.window.as_tuple()),
            "nx": self.nx,
            "nz": self.nz,
            "x": self.x.tolist(),
            "z": self.z.tolist(),
            "values": self.values.tolist(),
            "inside_mask": self.inside.astype(int).tolist(),
        }

    def dumps(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return json.dumps(self.to_json())
        raise InvalidParams(f"unknown format {fmt!r}")


def _thread_count() -> int:
    raw = os.environ.get("FUNCWAVE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParams(f"FUNCWAVE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidParams("FUNCWAVE_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def inside_mask(profile: DepthProfile, x, z):
    """``z >= -d(x)`` where ``d`` is defined and non-negative."""
    with np.errstate(invalid="ignore"):
        dx = np.asarray(profile.d(x), dtype=float)
        return ~np.isnan(dx) & (dx >= 0) & (np.asarray(z) >= -dx)


def sample_grid(field: StreamField, profile: DepthProfile, window, nx: int = 200,
                nz: int = 100) -> FieldGrid:
    """Sample ``psi`` on a uniform ``nx`` by ``nz`` lattice over ``window``.

    Rows are evaluated in parallel (``FUNCWAVE_THREADS``, 0 = one per
    core); the result does not depend on the schedule.
    """
    if nx < 2 or nz < 2:
        raise InvalidParams("nx and nz must be at least 2")
    w = Rect.of(window)
    x = np.linspace(w.x_lo, w.x_hi, nx)
    z = np.linspace(w.z_lo, w.z_hi, nz)
    X, Z = np.meshgrid(x, z)
    inside = inside_mask(profile, X, Z)
    values = np.zeros((nz, nx))

    def row(j):
        m = inside[j]
        if np.any(m):
            values[j, m] = field.psi(x[m], np.full(int(m.sum()), z[j]))

    workers = min(_thread_count(), nz)
    if workers <= 1:
        for j in range(nz):
            row(j)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(row, range(nz)))
    return FieldGrid(w, x, z, values, inside)


def boundary_residual(field: StreamField, profile: DepthProfile, n: int = 500) -> ResidualReport:
    """``|psi(x, -d(x)) - Q|`` over ``n`` interior points of the profile window."""
    if n < 2:
        raise InvalidParams("n must be at least 2")
    xs = profile.window.interior(n)
    xs = xs[profile.domain.contains(xs)]
    err = np.asarray(field.psi(xs, -profile.d(xs))) - field.flux
    return ResidualReport.from_errors(err, xs)


def pde_residual(field: StreamField, window, h: float, n: Sequence[int] = (24, 12)) -> float:
    """Largest central-difference value of ``psi_xx - nu^2 psi_zz``.

    The operator is applied with steps ``h`` in ``x`` and ``nu h / 2`` in
    ``z`` at a fixed ``n[0]`` by ``n[1]`` lattice of interior points of
    ``window``.  The step ratio matters: with ``dz = nu dx`` every stencil
    point sits on the characteristics through its neighbours and the
    scheme is exact for any ``f``, so the residual would carry no
    truncation error at all.  With ``dz = nu h / 2`` the leading term is
    ``-(h^2 / 16) (f''''(x - z/nu) - f''''(x + z/nu))``, which is
    second order in ``h``.
    """
    if not h > 0:
        raise InvalidParams("h must be positive")
    w = Rect.of(window)
    k = field.nu * h / 2
    xs = np.linspace(w.x_lo, w.x_hi, n[0] + 2)[1:-1]
    zs = np.linspace(w.z_lo, w.z_hi, n[1] + 2)[1:-1]
    X, Z = np.meshgrid(xs, zs)
    p = field.psi
    c = p(X, Z)
    dxx = (p(X + h, Z) - 2 * c + p(X - h, Z)) / (h * h)
    dzz = (p(X, Z + k) - 2 * c + p(X, Z - k)) / (k * k)
    return float(np.max(np.abs(dxx - field.nu ** 2 * dzz)))


def parity_residual(field: StreamField, window, kind: str = "z_odd", n: int = 50) -> float:
    """Largest violation of a symmetry of ``psi`` on ``n`` by ``n`` sample pairs.

    ``z_odd``: ``psi(x, -z) = -psi(x, z)`` (always holds).
    ``x_odd``: ``psi(-x, z) = -psi(x, z)`` (even ``f``, symmetric domain).
    ``x_even``: ``psi(-x, z) = psi(x, z)`` (odd ``f``).
    """
    w = Rect.of(window)
    X, Z = np.meshgrid(np.linspace(w.x_lo, w.x_hi, n), np.linspace(w.z_lo, w.z_hi, n))
    base = np.asarray(field.psi(X, Z))
    if kind == "z_odd":
        other = -np.asarray(field.psi(X, -Z))
    elif kind == "x_odd":
        other = -np.asarray(field.psi(-X, Z))
    elif kind == "x_even":
        other = np.asarray(field.psi(-X, Z))
    else:
        raise InvalidParams(f"unknown parity kind {kind!r}")
    return float(np.max(np.abs(base - other)))


def nodal_cells(grid: FieldGrid, atol: float = 0.0) -> list:
    """Grid cells ``(j, i)`` whose four unmasked corners change sign.

    A corner counts as positive when ``> atol`` and negative when
    ``< -atol``; a cell qualifies when it has one of each.  Cell ``(j, i)``
    spans nodes ``j..j+1`` in ``z`` and ``i..i+1`` in ``x``.
    """
    v, m = grid.values, grid.inside
    corners = [v[:-1, :-1], v[:-1, 1:], v[1:, :-1], v[1:, 1:]]
    ok = m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:]
    pos = np.zeros(ok.shape, dtype=bool)
    neg = np.zeros(ok.shape, dtype=bool)
    for c in corners:
        pos |= c > atol
        neg |= c < -atol
    return [tuple(int(t) for t in ji) for ji in np.argwhere(ok & pos & neg)]
