import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opencavity import cavity
from opencavity.cavity import CavityGeometry, CavityMode
from opencavity.errors import DomainError, InstabilityError


def test_bare_gap_mode_volume():
    g = CavityGeometry(7.6, 1.11)
    assert cavity.mode_volume_gaussian(g, 637.0) == pytest.approx(0.474, abs=1e-3)


def test_mode_volume_formula_independent():
    # V = lambda z_R L / 4 with z_R^2 = L (R - L)
    L, R, lam = 2.25, 7.6, 0.637
    v = lam * math.sqrt(L * (R - L)) * L / 4.0
    assert cavity.mode_volume_gaussian(CavityGeometry(R, 1.11, (0.57, 0.57)), 637.0) == pytest.approx(v, rel=1e-12)


def test_unstable_geometry_raises():
    g = CavityGeometry(1.0, 1.5)
    assert not g.stable
    with pytest.raises(InstabilityError):
        cavity.mode_volume_gaussian(g, 637.0)


def test_f_max_values():
    assert cavity.f_max(637.0, 1.0, 637.0 / 1.1, 1.24) == pytest.approx(9.173, abs=1e-3)
    assert cavity.f_max(637.0, 1.0, 637.0 / 0.3, 1.24) == pytest.approx(33.634, abs=1e-3)
    with pytest.raises(DomainError):
        cavity.f_max(637.0, 1.0, -5.0, 1.24)


def test_transverse_coupling():
    assert cavity.transverse_coupling(0, 0) == 1.0
    assert cavity.transverse_coupling(1, 0) == 0.0
    assert cavity.transverse_coupling(2, 0) == pytest.approx(0.5)
    assert cavity.transverse_coupling(2, 2) == pytest.approx(0.25)


def test_resonances_satisfy_phase_condition():
    g = CavityGeometry(7.6, 1.11, (0.27, 0.66))
    modes = cavity.resonant_wavelengths(g, (550.0, 720.0), max_order=3)
    assert modes
    for md in modes:
        assert abs(cavity.phase_residual(g, md)) < 1e-9
    wl = [md.wavelength for md in modes]
    assert wl == sorted(wl)


def test_higher_transverse_order_is_blue_shifted():
    g = CavityGeometry(7.6, 1.11, (0.27, 0.66))
    modes = cavity.resonant_wavelengths(g, (500.0, 900.0), max_order=2)
    same_q = {}
    for md in modes:
        same_q.setdefault(md.q_phase, {})[md.m + md.n] = md.wavelength
    for q, by_order in same_q.items():
        if 0 in by_order and 1 in by_order:
            assert by_order[1] < by_order[0]


def test_planar_ladder_when_radius_infinite():
    g = CavityGeometry(math.inf, 1.0)
    modes = cavity.resonant_wavelengths(g, (600.0, 700.0), max_order=0)
    assert [round(md.wavelength, 9) for md in modes] == [round(2000.0 / 3, 9)]


def test_gap_half_waves_label():
    assert cavity.gap_half_waves(1.11, 637.0) == 4


def test_finesse_and_linewidth():
    f = cavity.finesse_from_reflectivity(0.997, 0.99999)
    assert f == pytest.approx(math.pi * (0.997 * 0.99999) ** 0.25 / (1 - math.sqrt(0.997 * 0.99999)))
    fwhm = cavity.linewidth_from_finesse(637.0, 2.0, f)
    fsr = 637.0**2 / (2 * 2000.0)
    assert fwhm == pytest.approx(fsr / f)


def test_annotate_divides_volume_by_coupling():
    g = CavityGeometry(7.6, 1.11, (0.57, 0.57))
    md = cavity.annotate(CavityMode(4, 2, 0, 637.0), g, 0.7)
    assert md.mode_volume == pytest.approx(2 * cavity.mode_volume_gaussian(g, 637.0))
    assert md.quality_factor == pytest.approx(910.0)
    assert cavity.annotate(CavityMode(4, 1, 0, 637.0), g, 0.7).dark_on_axis


def test_modes_csv(tmp_path):
    g = CavityGeometry(7.6, 1.11, (0.57, 0.57))
    modes = [cavity.annotate(m, g, 0.7) for m in cavity.resonant_wavelengths(g, (600, 680), 2)]
    path = tmp_path / "m.csv"
    cavity.write_modes_csv(modes, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "q,m,n,wavelength_nm,fwhm_nm,Q,V_um3"
    assert len(lines) == len(modes) + 1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(1.2, 20.0))
def test_mode_volume_grows_with_length_below_half_radius(L, ratio):
    R = L * ratio
    if L * 1.01 > R / 2:
        return
    v1 = cavity.mode_volume_gaussian(CavityGeometry(R, L), 637.0)
    v2 = cavity.mode_volume_gaussian(CavityGeometry(R, L * 1.01), 637.0)
    assert v2 > v1


@settings(max_examples=50, deadline=None)
@given(st.floats(100.0, 2000.0), st.floats(0.05, 5.0), st.floats(0.1, 10.0))
def test_f_max_linear_in_q_inverse_in_v(q, v, k):
    base = cavity.f_max(637.0, 1.0, q, v)
    assert cavity.f_max(637.0, 1.0, k * q, v) == pytest.approx(k * base, rel=1e-12)
    assert cavity.f_max(637.0, 1.0, q, k * v) == pytest.approx(base / k, rel=1e-12)


def test_mode_volume_sweep_matches_single_calls():
    Ls = np.array([1.0, 2.0, 3.0])
    out = cavity.mode_volume_sweep(7.6, Ls, 637.0)
    assert out[1] == pytest.approx(cavity.mode_volume_gaussian(CavityGeometry(7.6, 2.0), 637.0))
