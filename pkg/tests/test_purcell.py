import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from opencavity import purcell, spectrum
from opencavity.dipole import DipolePair
from opencavity.errors import ConfigurationError, DomainError
from opencavity.purcell import ModeFilter


def f_zpl_oracle(model, dipoles, filt):
    """F_max sum_mu n xi int L (DW shape_mu + psb) evaluated with adaptive quad."""
    dw = model.debye_waller

    def psb(x):
        return sum(p.evaluate(x) for p in model.psb)

    total = 0.0
    for n, xi, peak in zip(dipoles.branching, dipoles.xi, model.zpl_peaks):
        def integrand(x, peak=peak):
            return float((dw * peak.shape(x) + psb(x)) * filt.response(x))
        val, _ = quad(integrand, 625.0, 850.0, points=[peak.center, filt.lambda_cav], limit=400,
                      epsabs=1e-13, epsrel=1e-10)
        total += n * xi * val
    return filt.f_max * total


@pytest.fixture(scope="module")
def filt():
    return ModeFilter.from_linewidth(637.0, 0.7, 1.24)


def test_f_zpl_matches_quadrature_oracle(doublet, dipoles, filt, grid):
    got = purcell.f_zpl(doublet, dipoles, filt, grid)
    assert got == pytest.approx(f_zpl_oracle(doublet, dipoles, filt), rel=1e-5)


def test_factorised_and_per_dipole_paths_agree(doublet, dipoles, filt, grid):
    total, parts = purcell.f_zpl_per_dipole(doublet, dipoles, filt, grid)
    assert purcell.f_zpl(doublet, dipoles, filt, grid) == pytest.approx(total, rel=1e-10)
    assert len(parts) == 2 and parts[1] > parts[0]


def test_mode_filter_from_linewidth(filt):
    assert filt.q_factor == pytest.approx(910.0)
    assert filt.fwhm == pytest.approx(0.7)
    assert filt.response(637.0 + 0.35) == pytest.approx(0.5, rel=2e-3)


def test_peak_count_mismatch_is_configuration_error(dipoles, filt, grid):
    single = spectrum.EmitterModel((spectrum.GaussianPeak(637.0, 0.4, 0.044),),
                                   spectrum.phonon_replicas(637.0, 0.044), 0.044)
    with pytest.raises(ConfigurationError):
        purcell.f_zpl(single, dipoles, filt, grid)


def test_s_axial_is_normalized(doublet, dipoles, grid):
    assert purcell.s_axial(doublet, dipoles, grid).integral() == pytest.approx(1.0, abs=2e-3)


def test_cavity_spectrum_peaks_near_cavity(doublet, dipoles, grid):
    out = purcell.cavity_spectrum(doublet, dipoles, ModeFilter.from_linewidth(637.0, 0.2, 1.24), grid)
    assert out.integral() == pytest.approx(1.0)
    assert abs(out.argmax() - 637.0) < 0.1


def test_curve_agrees_with_filter_path(doublet, dipoles, grid):
    curve = purcell.f_zpl_curve(doublet, dipoles, 0.7, 1.24, grid=grid)
    for lc in (636.3, 637.0, 637.4):
        filt = ModeFilter.from_linewidth(lc, 0.7, 1.24)
        assert curve(lc) == pytest.approx(purcell.f_zpl(doublet, dipoles, filt, grid), rel=1e-12)


def test_tuning_scan_shape_and_normalisation(doublet, dipoles, grid, tmp_path):
    filters = [ModeFilter.from_linewidth(lc, 0.7, 1.24) for lc in (636.0, 636.5, 637.0)]
    scan = purcell.tuning_scan(doublet, dipoles, filters, grid, window=(630.0, 645.0))
    assert scan.spectra.shape == (3, grid.size)
    for row in scan.spectra:
        assert np.sum(0.5 * (row[1:] + row[:-1]) * np.diff(grid)) == pytest.approx(1.0)
    scan.write(tmp_path / "t.csv", tmp_path / "t.json")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 4 and lines[0].startswith("lambda_cav_nm,630")


def test_tuning_scan_rejects_non_monotone(doublet, dipoles, grid):
    filters = [ModeFilter.from_linewidth(lc, 0.7, 1.24) for lc in (637.0, 636.0, 637.5)]
    with pytest.raises(DomainError):
        purcell.tuning_scan(doublet, dipoles, filters, grid)


def test_optimal_tuning_beats_neighbours(doublet, dipoles, grid):
    lc, best = purcell.optimal_tuning(doublet, dipoles, 0.7, 1.24, grid=grid)
    curve = purcell.f_zpl_curve(doublet, dipoles, 0.7, 1.24, grid=grid)
    assert best >= curve(lc - 0.05) and best >= curve(lc + 0.05)
    assert doublet.zpl_window[0] <= lc <= doublet.zpl_window[1]


def test_total_rate_and_q_eff():
    assert purcell.total_rate(0.25, 0.93, 0.044) == pytest.approx(1.139, abs=1e-3)
    assert purcell.q_eff(637.0, 0.7, 0.4) == pytest.approx(637.0 / 1.1)
    assert purcell.peak_enhancement(0.25, 0.044, 0.56) == pytest.approx(0.25 / (0.044 * 0.56))
    with pytest.raises(DomainError):
        purcell.total_rate(-0.1, 0.93, 0.044)


def test_couple_report(doublet, dipoles, filt, grid):
    res = purcell.couple(doublet, dipoles, filt, 0.93, grid)
    d = res.to_dict()
    assert d["f_total"] == pytest.approx(d["f_zpl"] + 0.956 * 0.93)
    assert len(d["per_peak_enhancement"]) == 2


def test_psb_factor_floor_and_growth(doublet, grid):
    from opencavity.cavity import CavityMode
    psb = purcell.psb_spectrum(doublet, grid)
    assert purcell.estimate_psb_factor(psb, []) == 1.0
    modes = [CavityMode(4, 0, 0, 700.0, linewidth_fwhm=0.7, mode_volume=1.24),
             CavityMode(4, 1, 0, 690.0, linewidth_fwhm=0.7, mode_volume=2.5)]
    assert purcell.estimate_psb_factor(psb, modes) > 1.0
    assert purcell.estimate_psb_factor(psb, modes[1:]) == 1.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.2, 5.0))
def test_f_zpl_scales_inverse_with_volume(fwhm, vol):
    pair = DipolePair(49.0, 56.7, 1.5, 77.0)
    model = spectrum.EmitterModel.doublet((636.5, 637.0), 0.4, pair.branching, 0.044)
    grid = spectrum.default_grid()
    a = purcell.f_zpl(model, pair, ModeFilter.from_linewidth(637.0, fwhm, vol), grid)
    b = purcell.f_zpl(model, pair, ModeFilter.from_linewidth(637.0, fwhm, 2 * vol), grid)
    assert b == pytest.approx(a / 2, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 90.0), st.floats(0.0, 90.0))
def test_f_zpl_linear_in_xi(phi2, phi3):
    model = spectrum.EmitterModel.doublet((636.5, 637.0), 0.4, (0.44, 0.56), 0.044)
    grid = spectrum.default_grid()
    filt = ModeFilter.from_linewidth(637.0, 0.7, 1.24)
    full = DipolePair(49.0, 56.7, 1.5, 77.0, phi_override=(0.0, 0.0))
    part = DipolePair(49.0, 56.7, 1.5, 77.0, phi_override=(phi2, phi3))
    _, p_full = purcell.f_zpl_per_dipole(model, full, filt, grid)
    _, p_part = purcell.f_zpl_per_dipole(model, part, filt, grid)
    for a, b, xi in zip(p_full, p_part, part.xi):
        assert b == pytest.approx(a * xi, rel=1e-12, abs=1e-15)
