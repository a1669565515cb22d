import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from funcwave.abel import closed_form_abel
from funcwave.errors import InvalidParams, OutOfExtensionDomain
from funcwave.geometry import Interval, make_profile
from funcwave.recipes import build_case, load_config
from funcwave.schroder import (
    WaveProfileFunction,
    as_wave_function,
    barcilon_solution,
)
from funcwave.wavefield import (
    Rect,
    ResidualReport,
    boundary_residual,
    extend_field,
    nodal_cells,
    parity_residual,
    pde_residual,
    sample_grid,
)


def bundled(name):
    b = build_case(load_config(name))
    return extend_field(b.wave, b.nu), b.profile, Rect.of(load_config(name)["window"])


def affine(q=0.0):
    return WaveProfileFunction(Interval.open(-math.inf, math.inf),
                               lambda x: 3.0 * np.asarray(x) + 1.0, "custom", q)


def test_psi_is_difference_of_characteristic_values():
    fld, _, _ = bundled("fig2")
    f = fld.f
    assert fld.psi(0.1, -0.05) == pytest.approx(f(0.15) - f(0.05), abs=1e-15)


@given(x=st.floats(-0.99, 0.99))
def test_psi_vanishes_on_surface(x):
    fld, _, _ = bundled("fig1")
    assert fld.psi(x, 0.0) == 0.0


@given(x=st.floats(-0.6, 0.6), z=st.floats(0.0, 0.3))
def test_psi_odd_in_z(x, z):
    fld, _, _ = bundled("fig1")
    assert fld.psi(x, -z) == -fld.psi(x, z)


def test_parity_in_x():
    even_f, _, _ = bundled("fig1")     # cos of an odd Abel solution
    odd_f, _, _ = bundled("fig2")      # sin of arctanh
    assert parity_residual(even_f, (-0.6, 0.6, -0.3, 0.0), "x_odd") < 1e-12
    assert parity_residual(odd_f, (-0.6, 0.6, -0.2, 0.0), "x_even") < 1e-12
    assert parity_residual(odd_f, (-0.6, 0.6, -0.2, 0.2), "z_odd") == 0.0
    with pytest.raises(InvalidParams):
        parity_residual(odd_f, (-0.6, 0.6, -0.2, 0.0), "y_odd")


def test_out_of_extension_domain():
    fld, _, _ = bundled("fig2")
    with pytest.raises(OutOfExtensionDomain):
        fld.psi(0.9, -0.2)
    with pytest.raises(OutOfExtensionDomain):
        fld.psi(1.5, 0.0)


def test_small_grid_layout():
    fld = extend_field(affine(), 1.0)
    prof = make_profile("semi_ellipse")
    g = sample_grid(fld, prof, (-1, 1, -1, 0), 3, 3)
    assert g.values.shape == (3, 3)
    np.testing.assert_array_equal(g.z, [-1.0, -0.5, 0.0])
    np.testing.assert_array_equal(g.values[-1], 0.0)
    # only the centre bottom node touches the ellipse
    np.testing.assert_array_equal(g.inside[0], [False, True, False])
    with pytest.raises(InvalidParams):
        sample_grid(fld, prof, (-1, 1, -1, 0), 1, 3)


def test_triangle_mask_follows_bottom():
    fld, prof, w = bundled("fig1")
    g = sample_grid(fld, prof, w, 41, 21)
    X, Z = np.meshgrid(g.x, g.z)
    below = Z < -0.35 * (1 - np.abs(X))
    np.testing.assert_array_equal(g.inside, ~below)
    assert np.all(g.values[below] == 0.0)
    assert np.all(g.values[-1] == 0.0)


def test_hyperbola_grid_matches_direct_evaluation():
    fld, prof, w = bundled("dai")
    g = sample_grid(fld, prof, w, 61, 31)
    X, Z = np.meshgrid(g.x, g.z)
    m = g.inside
    direct = np.cos(np.pi / 2 * (X - Z) ** 2) - np.cos(np.pi / 2 * (X + Z) ** 2)
    np.testing.assert_allclose(g.values[m], direct[m], atol=1e-12)


def test_grid_independent_of_thread_count(monkeypatch):
    fld, prof, w = bundled("fig2")
    monkeypatch.setenv("FUNCWAVE_THREADS", "1")
    a = sample_grid(fld, prof, w, 50, 30)
    monkeypatch.setenv("FUNCWAVE_THREADS", "4")
    b = sample_grid(fld, prof, w, 50, 30)
    np.testing.assert_array_equal(a.values, b.values)
    monkeypatch.setenv("FUNCWAVE_THREADS", "x")
    with pytest.raises(InvalidParams):
        sample_grid(fld, prof, w, 5, 5)


def test_csv_and_json_export():
    fld, prof, w = bundled("fig1")
    g = sample_grid(fld, prof, w, 4, 3)
    lines = g.to_csv().splitlines()
    assert lines[0] == "x,z,psi,inside"
    assert len(lines) == 13
    x, z, psi, inside = lines[1].split(",")
    assert float(x) == -1.0 and float(z) == -0.35 and inside == "0"
    # 17 significant digits round-trip exactly
    vals = np.array([float(r.split(",")[2]) for r in lines[1:]])
    np.testing.assert_array_equal(vals, g.values.ravel())
    js = g.to_json()
    assert js["nx"] == 4 and js["nz"] == 3
    assert np.array(js["values"]).shape == (3, 4)


def test_window_parsing():
    assert Rect.parse("-1,1,-0.5,0").as_tuple() == (-1.0, 1.0, -0.5, 0.0)
    with pytest.raises(InvalidParams):
        Rect.parse("1,2,3")
    with pytest.raises(InvalidParams):
        Rect(1.0, 0.0, -1.0, 0.0)


@pytest.mark.parametrize("name", ["fig1", "fig2", "dai", "barcilon_cos", "barcilon_tri", "corner"])
def test_boundary_condition(name):
    b = build_case(load_config(name))
    rep = boundary_residual(extend_field(b.wave, b.nu), b.profile, 500)
    assert rep.max_abs < 1e-9
    assert rep.max_abs >= rep.mean_abs >= 0


def test_boundary_flux_for_hyperbola_abel():
    a = closed_form_abel("dai_hyperbola", {"r": 1.0}, Q=4.0)
    prof = make_profile("dai_hyperbola", {"r": 1.0})
    rep = boundary_residual(extend_field(as_wave_function(a), 1.0), prof, 200)
    assert rep.max_abs < 1e-12


def test_boundary_with_constant_f_reports_flux():
    const = WaveProfileFunction(Interval.closed(-1, 1), lambda x: np.zeros_like(np.asarray(x)),
                                "custom", 0.25)
    rep = boundary_residual(extend_field(const, 1.0), make_profile("hyperbolic_lens", {"c": 2.0}), 50)
    assert rep.max_abs == pytest.approx(0.25)


def test_pde_residual_affine_is_exact():
    assert pde_residual(extend_field(affine(), 1.0), (-1, 1, -1, 0), 1e-2) < 1e-10


def test_pde_residual_lens_bound():
    # residual ~ C h^2 with C ~ 3.4e3 on this window (f = sin(11.4 arctanh x))
    fld, _, _ = bundled("fig2")
    w = (-0.3, 0.3, -0.2, -0.05)
    assert pde_residual(fld, w, 1e-3) < 4e3 * 1e-6
    assert pde_residual(fld, w, 5e-4) < 1e-3


def test_pde_residual_second_order():
    fld, _, _ = bundled("fig2")
    w = (-0.3, 0.3, -0.2, -0.05)
    r1, r2 = pde_residual(fld, w, 4e-3), pde_residual(fld, w, 2e-3)
    assert 3.0 <= r1 / r2 <= 5.0


def test_pde_residual_quartic_only_rounding():
    # f'''' is constant for a quartic, so the leading error term cancels
    nu, f = barcilon_solution(1, 4)
    fld = extend_field(f, nu)
    for h in (1e-2, 5e-3):
        assert pde_residual(fld, (-0.4, 0.4, -0.3, -0.1), h) < 1e-6


def test_nodal_cells():
    fld, prof, w = bundled("fig2")
    g = sample_grid(fld, prof, w, 200, 100)
    cells = nodal_cells(g)
    top = {i for j, i in cells if j == g.nz - 2}
    assert len(top) >= 10
    const = sample_grid(extend_field(affine(), 1.0), prof, w, 20, 10)
    # affine f gives psi = -6 z >= 0 everywhere
    assert nodal_cells(const) == []


def test_corner_flow_has_no_interior_nodal_cells():
    fld, prof, w = bundled("corner")
    g = sample_grid(fld, prof, w, 200, 100)
    assert nodal_cells(g, atol=1e-12) == []
    assert np.all(g.values[g.inside] >= -1e-12)


def test_residual_report_nan():
    rep = ResidualReport.from_errors([0.0, math.nan], [1.0, 2.0])
    assert rep.max_abs == math.inf and rep.argmax == (2.0,)
