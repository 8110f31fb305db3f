"""Single-mode Purcell coupling of a ZPL doublet and the resulting emission rates.

Each dipole mu has a normalised free-space spectrum S_mu (its ZPL line carrying
DW, plus the shared sideband carrying 1 - DW), branching factor n_mu and
overlap xi_mu. A cavity mode at lambda_cav with quality factor Q filters the
emission with the unit-peak Lorentzian 1 / (1 + 4 Q^2 (lambda/lambda_cav - 1)^2).
"""
import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .cavity import f_max as f_max_formula
from .cavity import transverse_coupling
from .errors import ConfigurationError, DomainError
from .spectrum import SampledSpectrum, default_grid, synthesize_spectrum


@dataclass(frozen=True)
class ModeFilter:
    lambda_cav: float
    q_factor: float
    f_max: float

    def __post_init__(self):
        if min(self.lambda_cav, self.q_factor) <= 0 or self.f_max < 0:
            raise DomainError("ModeFilter needs positive wavelength and Q, non-negative F_max")

    @classmethod
    def from_linewidth(cls, lambda_cav, fwhm, mode_volume, medium_index=1.0):
        q = lambda_cav / fwhm
        return cls(lambda_cav, q, f_max_formula(lambda_cav, medium_index, q, mode_volume))

    @property
    def fwhm(self):
        return self.lambda_cav / self.q_factor

    def response(self, wavelengths):
        x = np.asarray(wavelengths, dtype=float) / self.lambda_cav - 1.0
        return 1.0 / (1.0 + 4.0 * self.q_factor**2 * x * x)


def lorentzian_enhancement(wavelength, filt, xi=1.0):
    """xi F_max / (1 + 4 Q^2 (lambda/lambda_cav - 1)^2)."""
    return xi * filt.f_max * filt.response(wavelength)


def _weights(model, dipoles):
    if len(model.zpl_peaks) != 2:
        raise ConfigurationError(f"expected two ZPL peaks for a dipole pair, got {len(model.zpl_peaks)}")
    n = np.array(dipoles.branching)
    xi = np.array(dipoles.xi)
    return n, xi


def dipole_spectra(model, grid=None):
    """Normalised S_mu for each ZPL peak: its line scaled to DW plus the shared sideband."""
    grid = default_grid() if grid is None else grid
    full = synthesize_spectrum(model, grid)
    wl = full.wavelengths
    zpl = [p.evaluate(wl) for p in model.zpl_peaks]
    psb = np.clip(full.density - sum(zpl), 0.0, None)
    dw = model.debye_waller
    return [SampledSpectrum(wl, dw * p.shape(wl) + psb) for p in model.zpl_peaks]


def s_axial(model, dipoles, grid=None):
    """Spectrum emitted along the cavity axis: sum n xi S_mu / sum n xi."""
    n, xi = _weights(model, dipoles)
    w = n * xi
    if w.sum() <= 0:
        raise DomainError("no dipole couples to the cavity axis (all n xi are zero)")
    specs = dipole_spectra(model, grid)
    dens = sum(wi * s.density for wi, s in zip(w, specs)) / w.sum()
    return SampledSpectrum(specs[0].wavelengths, dens)


def _overlap(s, centers, qfactors):
    return kernels.lorentz_overlap(s.wavelengths, s.density, centers, qfactors)


def f_zpl(model, dipoles, filt, grid=None):
    """Fractional rate increase from ZPL coupling, F_max [sum n xi] int L S_axial."""
    n, xi = _weights(model, dipoles)
    sa = s_axial(model, dipoles, grid)
    overlap = _overlap(sa, [filt.lambda_cav], [filt.q_factor])[0]
    return float(filt.f_max * np.sum(n * xi) * overlap)


def f_zpl_per_dipole(model, dipoles, filt, grid=None):
    """Same quantity summed dipole by dipole: sum n_mu int S_mu F_mu.

    Returns (total, list of per-dipole contributions).
    """
    n, xi = _weights(model, dipoles)
    parts = []
    for n_mu, xi_mu, s in zip(n, xi, dipole_spectra(model, grid)):
        y = s.density * lorentzian_enhancement(s.wavelengths, filt, xi_mu)
        parts.append(float(n_mu * np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(s.wavelengths))))
    return sum(parts), parts


def cavity_spectrum(model, dipoles, filt, grid=None, normalize=True):
    """S_axial filtered by the cavity Lorentzian; unit integral when ``normalize``."""
    sa = s_axial(model, dipoles, grid)
    out = SampledSpectrum(sa.wavelengths, sa.density * filt.response(sa.wavelengths))
    return out.normalized() if normalize else out


def f_zpl_curve(model, dipoles, fwhm, mode_volume, medium_index=1.0, grid=None):
    """Vectorised F_ZPL(lambda_cav) at fixed cavity linewidth ``fwhm``.

    Q and F_max follow lambda_cav (Q = lambda_cav / fwhm).
    """
    n, xi = _weights(model, dipoles)
    sa = s_axial(model, dipoles, grid)
    coupling = float(np.sum(n * xi))

    def curve(lambda_cav):
        lc = np.atleast_1d(np.asarray(lambda_cav, dtype=float))
        q = lc / fwhm
        fm = 3.0 / (4.0 * np.pi**2) * (lc * 1e-3 / medium_index) ** 3 * q / mode_volume
        vals = fm * coupling * _overlap(sa, lc, q)
        return vals if np.ndim(lambda_cav) else float(vals[0])

    return curve


@dataclass
class TuningScan:
    lambda_cav: np.ndarray
    wavelengths: np.ndarray
    spectra: np.ndarray
    f_zpl: np.ndarray
    window: tuple = field(default=None)

    def write(self, csv_path, json_path=None):
        wl, S = self.wavelengths, self.spectra
        if self.window is not None:
            keep = (wl >= self.window[0]) & (wl <= self.window[1])
            wl, S = wl[keep], S[:, keep]
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda_cav_nm"] + [f"{x:.9g}" for x in wl])
            for lc, row in zip(self.lambda_cav, S):
                w.writerow([f"{lc:.9g}"] + [f"{v:.9g}" for v in row])
        if json_path is not None:
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump({"lambda_cav_nm": [float(f"{x:.9g}") for x in self.lambda_cav],
                           "f_zpl": [float(f"{x:.9g}") for x in self.f_zpl]}, fh, indent=2)


def tuning_scan(model, dipoles, filters, grid=None, window=None):
    """One normalised cavity spectrum and one F_ZPL per filter position."""
    lcs = np.array([f.lambda_cav for f in filters])
    if lcs.size > 1 and not (np.all(np.diff(lcs) > 0) or np.all(np.diff(lcs) < 0)):
        raise DomainError("cavity wavelengths must be monotone")
    n, xi = _weights(model, dipoles)
    sa = s_axial(model, dipoles, grid)
    overlap = _overlap(sa, lcs, [f.q_factor for f in filters])
    fz = np.array([f.f_max for f in filters]) * float(np.sum(n * xi)) * overlap
    rows = np.empty((lcs.size, sa.wavelengths.size))
    for i, f in enumerate(filters):
        rows[i] = sa.density * f.response(sa.wavelengths) / overlap[i]
    return TuningScan(lcs, sa.wavelengths, rows, fz, window)


def optimal_tuning(model, dipoles, fwhm, mode_volume, medium_index=1.0, grid=None, pitch=0.01,
                   span=None):
    """lambda_cav maximising F_ZPL on a ``pitch`` scan across the ZPL window."""
    lo, hi = span if span is not None else model.zpl_window
    lcs = np.arange(lo, hi + 0.5 * pitch, pitch)
    vals = f_zpl_curve(model, dipoles, fwhm, mode_volume, medium_index, grid)(lcs)
    i = int(np.argmax(vals))
    return float(lcs[i]), float(vals[i])


def q_eff(wavelength, fwhm_cavity, fwhm_emitter):
    """Effective Q lambda / (cavity FWHM + emitter FWHM)."""
    if fwhm_cavity <= 0 or fwhm_emitter < 0:
        raise DomainError("linewidths must be positive")
    return wavelength / (fwhm_cavity + fwhm_emitter)


def peak_enhancement(f_zpl_value, dw, branching_n):
    """Enhancement of a single line: F_ZPL / (DW n)."""
    if not dw * branching_n > 0:
        raise DomainError("dw * n must be positive")
    return f_zpl_value / (dw * branching_n)


def total_rate(f_zpl_value, f_psb, dw):
    """Relative total emission rate F_ZPL + (1 - DW) F_PSB."""
    if f_zpl_value < 0 or f_psb < 0 or not 0 <= dw <= 1:
        raise DomainError("rates must be non-negative and DW in [0, 1]")
    return f_zpl_value + (1.0 - dw) * f_psb


@dataclass
class CouplingResult:
    f_zpl: float
    f_psb: float
    f_total: float
    per_peak_enhancement: list
    debye_waller: float = None
    lambda_cav_nm: float = None
    q_factor: float = None
    f_max: float = None
    per_dipole_f_zpl: list = None
    branching: list = None
    xi: list = None

    def to_dict(self):
        return asdict(self)


def couple(model, dipoles, filt, f_psb=1.0, grid=None):
    """Full coupling report for one cavity setting."""
    fz, parts = f_zpl_per_dipole(model, dipoles, filt, grid)
    fz_fact = f_zpl(model, dipoles, filt, grid)
    n = dipoles.branching
    dw = model.debye_waller
    return CouplingResult(
        f_zpl=fz_fact,
        f_psb=f_psb,
        f_total=total_rate(fz_fact, f_psb, dw),
        per_peak_enhancement=[peak_enhancement(p, dw, n_mu) for p, n_mu in zip(parts, n)],
        debye_waller=dw,
        lambda_cav_nm=filt.lambda_cav,
        q_factor=filt.q_factor,
        f_max=filt.f_max,
        per_dipole_f_zpl=parts,
        branching=list(n),
        xi=list(dipoles.xi),
    )


def psb_spectrum(model, grid=None):
    """Sideband-only part of the free-space spectrum."""
    grid = default_grid() if grid is None else grid
    full = synthesize_spectrum(model, grid)
    zpl = sum(p.evaluate(full.wavelengths) for p in model.zpl_peaks)
    return SampledSpectrum(full.wavelengths, np.clip(full.density - zpl, 0.0, None))


def estimate_psb_factor(psb, modes, xi=1.0, floor=1.0, band=(640.0, 740.0), medium_index=1.0):
    """Crude multimode sideband Purcell factor.

    ``floor`` is the relative emission into non-resonant channels (1 in free
    space). Each even-order mode with known linewidth and mode volume adds its
    Lorentzian overlap with the band-limited sideband, weighted by its on-axis
    coupling.
    """
    wl = psb.wavelengths
    keep = (wl >= band[0]) & (wl <= band[1])
    if keep.sum() < 2:
        raise DomainError("sideband band not covered by the grid")
    sub = SampledSpectrum(wl[keep], psb.density[keep])
    norm = sub.integral()
    if norm <= 0:
        raise DomainError("no sideband emission inside the band")
    total = floor
    for md in modes:
        c = transverse_coupling(md.m, md.n)
        if c == 0 or not np.isfinite(md.mode_volume):
            continue
        fm = f_max_formula(md.wavelength, medium_index, md.quality_factor, md.mode_volume)
        total += xi * fm * _overlap(sub, [md.wavelength], [md.quality_factor])[0] / norm
    return float(total)
