"""Emitter spectra: sampled densities, Gaussian ZPL doublets and phonon sidebands.

All integrals use the trapezoidal rule on the stored wavelength grid.
Wavelengths are in nanometres throughout.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguityError, DomainError, ResolutionError
from .fitting import levenberg_marquardt

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
HC_EV_NM = 1239.841984
MIN_SAMPLES_PER_FWHM = 8
SPAN_FWHM = 3.0


def _trapz(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    """Spectral density sampled on a strictly increasing wavelength grid."""

    wavelengths: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        wl = _frozen(self.wavelengths)
        d = _frozen(self.density)
        if wl.ndim != 1 or wl.size < 2:
            raise DomainError("need at least two wavelengths")
        if d.shape != wl.shape:
            raise DomainError("density and wavelengths differ in length")
        if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(d))):
            raise DomainError("non-finite samples")
        if np.any(np.diff(wl) <= 0):
            raise DomainError("wavelengths must be strictly increasing")
        if np.any(d < 0):
            raise DomainError("negative spectral density")
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "density", d)

    def integral(self):
        return _trapz(self.density, self.wavelengths)

    def normalized(self):
        total = self.integral()
        if total <= 0:
            raise DomainError("cannot normalise a spectrum with zero integral")
        return SampledSpectrum(self.wavelengths, self.density / total)

    def scaled(self, factor):
        return SampledSpectrum(self.wavelengths, self.density * factor)

    def __add__(self, other):
        if not np.array_equal(self.wavelengths, other.wavelengths):
            raise DomainError("spectra are sampled on different grids")
        return SampledSpectrum(self.wavelengths, self.density + other.density)

    def argmax(self):
        return float(self.wavelengths[int(np.argmax(self.density))])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["wavelength_nm", "density"])
            for lam, d in zip(self.wavelengths, self.density):
                w.writerow([f"{lam:.9g}", f"{d:.9g}"])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["wavelength_nm", "density"]:
            raise DomainError(f"{path}: expected header 'wavelength_nm,density'")
        data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
        if data.ndim != 2 or data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns")
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class GaussianPeak:
    """Gaussian line; ``weight`` is its area (fraction of total emission)."""

    center: float
    fwhm: float
    weight: float = 1.0

    def __post_init__(self):
        if not self.fwhm > 0:
            raise DomainError(f"fwhm must be positive, got {self.fwhm}")
        if self.weight < 0:
            raise DomainError(f"weight must be non-negative, got {self.weight}")

    @property
    def sigma(self):
        return self.fwhm * FWHM_TO_SIGMA

    def shape(self, wavelengths):
        """Unit-area profile."""
        s = self.sigma
        x = (np.asarray(wavelengths, dtype=float) - self.center) / s
        return np.exp(-0.5 * x * x) / (s * math.sqrt(2.0 * math.pi))

    def evaluate(self, wavelengths):
        return self.weight * self.shape(wavelengths)

    def with_weight(self, weight):
        return GaussianPeak(self.center, self.fwhm, weight)


def phonon_replicas(zpl_center, debye_waller, count=4, spacing_mev=65.0, base_fwhm_mev=10.0,
                    growth=2.0):
    """Fallback sideband: Gaussian phonon replicas red of the ZPL.

    Replica k sits k*spacing below the ZPL photon energy with width
    base*growth**(k-1); weights follow a Poisson law with Huang-Rhys factor
    -ln(DW), rescaled so the replicas carry exactly 1 - DW.
    """
    if not 0 < debye_waller < 1:
        raise DomainError("replica sideband needs 0 < DW < 1")
    e0 = HC_EV_NM / zpl_center
    s = -math.log(debye_waller)
    raw = np.array([s**k / math.factorial(k) for k in range(1, count + 1)])
    raw *= (1.0 - debye_waller) / raw.sum()
    peaks = []
    for k in range(1, count + 1):
        e = e0 - k * spacing_mev * 1e-3
        de = base_fwhm_mev * 1e-3 * growth ** (k - 1)
        lam = HC_EV_NM / e
        fwhm = HC_EV_NM / (e - de / 2) - HC_EV_NM / (e + de / 2)
        peaks.append(GaussianPeak(lam, fwhm, float(raw[k - 1])))
    return tuple(peaks)


@dataclass(frozen=True)
class EmitterModel:
    """ZPL peaks plus a phonon sideband, weights as fractions of total emission.

    ``psb`` is either a tuple of GaussianPeak replicas, a tabulated
    SampledSpectrum (rescaled to carry 1 - DW), or None when DW == 1.
    """

    zpl_peaks: tuple
    psb: object
    debye_waller: float
    zpl_window: tuple = field(default=None)

    def __post_init__(self):
        peaks = tuple(self.zpl_peaks)
        object.__setattr__(self, "zpl_peaks", peaks)
        if not peaks:
            raise DomainError("at least one ZPL peak is required")
        dw = self.debye_waller
        if not 0 < dw <= 1:
            raise DomainError(f"Debye-Waller factor must lie in (0, 1], got {dw}")
        if abs(sum(p.weight for p in peaks) - dw) > 1e-9:
            raise DomainError("ZPL peak weights must sum to the Debye-Waller factor")
        if self.zpl_window is None:
            centers = [p.center for p in peaks]
            object.__setattr__(self, "zpl_window", (min(centers) - 1.5, max(centers) + 1.5))
        lo, hi = self.zpl_window
        if not all(lo < p.center < hi for p in peaks):
            raise DomainError("ZPL peak centres must lie inside the ZPL window")
        if isinstance(self.psb, (list, tuple)):
            object.__setattr__(self, "psb", tuple(self.psb))
            if abs(sum(p.weight for p in self.psb) - (1.0 - dw)) > 1e-9:
                raise DomainError("sideband replica weights must sum to 1 - DW")
        elif self.psb is None:
            if dw < 1:
                raise DomainError("a sideband is required when DW < 1")
        elif not isinstance(self.psb, SampledSpectrum):
            raise DomainError("psb must be replicas, a SampledSpectrum or None")

    @classmethod
    def doublet(cls, centers, fwhm, branching, debye_waller, psb="replicas", window=None):
        """Doublet whose peak weights are ``branching * DW``."""
        peaks = tuple(GaussianPeak(c, fwhm, n * debye_waller) for c, n in zip(centers, branching))
        total = sum(p.weight for p in peaks)
        # absorb rounding of the branching factors
        peaks = tuple(p.with_weight(p.weight * debye_waller / total) for p in peaks)
        if isinstance(psb, str) and psb == "replicas":
            psb = phonon_replicas(max(centers), debye_waller) if debye_waller < 1 else None
        return cls(peaks, psb, debye_waller, window)

    def psb_support(self):
        """Wavelength interval where the sideband carries appreciable density."""
        if self.psb is None:
            return None
        if isinstance(self.psb, SampledSpectrum):
            d = self.psb.density
            idx = np.nonzero(d > 1e-9 * d.max())[0]
            return float(self.psb.wavelengths[idx[0]]), float(self.psb.wavelengths[idx[-1]])
        return (min(p.center - 2 * p.fwhm for p in self.psb),
                max(p.center + 2 * p.fwhm for p in self.psb))

    def components(self):
        """Analytic Gaussian components (ZPL first, then replicas if parametric)."""
        comps = list(self.zpl_peaks)
        if isinstance(self.psb, tuple):
            comps.extend(self.psb)
        return comps

    def with_zpl_weights(self, weights):
        """Copy with new ZPL weights (and DW = their sum); sideband rescaled to 1 - DW."""
        peaks = tuple(p.with_weight(w) for p, w in zip(self.zpl_peaks, weights))
        dw = sum(weights)
        psb = self.psb
        if isinstance(psb, tuple):
            scale = (1.0 - dw) / (1.0 - self.debye_waller)
            psb = tuple(p.with_weight(p.weight * scale) for p in psb)
        return EmitterModel(peaks, psb, dw, self.zpl_window)


def _check_grid(grid, peaks):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")
    for p in peaks:
        lo, hi = p.center - SPAN_FWHM * p.fwhm, p.center + SPAN_FWHM * p.fwhm
        if lo < grid[0] or hi > grid[-1]:
            raise DomainError(f"grid [{grid[0]:g}, {grid[-1]:g}] does not cover peak at "
                              f"{p.center:g} nm to {SPAN_FWHM:g} FWHM")
        i0 = max(np.searchsorted(grid, lo) - 1, 0)
        i1 = min(np.searchsorted(grid, hi) + 1, grid.size)
        pitch = np.diff(grid[i0:i1]).max()
        if pitch > p.fwhm / MIN_SAMPLES_PER_FWHM:
            raise ResolutionError(f"grid pitch {pitch:g} nm too coarse for FWHM {p.fwhm:g} nm "
                                  f"(need {MIN_SAMPLES_PER_FWHM} samples per FWHM)")
    return grid


def synthesize_spectrum(model, grid):
    """Unit-integral emission spectrum of ``model`` sampled on ``grid``."""
    grid = _check_grid(grid, model.components())
    density = np.zeros_like(grid)
    for p in model.components():
        density += p.evaluate(grid)
    if isinstance(model.psb, SampledSpectrum):
        tab = model.psb
        psb = np.interp(grid, tab.wavelengths, tab.density, left=0.0, right=0.0)
        area = _trapz(psb, grid)
        if area <= 0:
            raise DomainError("tabulated sideband has no support on the grid")
        density += psb * (1.0 - model.debye_waller) / area
    return SampledSpectrum(grid, density)


def integrate_band(s, lo, hi):
    """Trapezoidal integral of ``s`` over [lo, hi], interpolating at the band edges."""
    wl, d = s.wavelengths, s.density
    if not lo < hi:
        raise DomainError("band must satisfy lo < hi")
    if lo < wl[0] or hi > wl[-1]:
        raise DomainError(f"band [{lo:g}, {hi:g}] outside grid [{wl[0]:g}, {wl[-1]:g}]")
    inner = (wl > lo) & (wl < hi)
    x = np.concatenate(([lo], wl[inner], [hi]))
    y = np.interp(x, wl, d)
    return _trapz(y, x)


def debye_waller(s, zpl_window, psb_support=None):
    """Fraction of the (normalised) spectrum inside the ZPL window.

    When ``psb_support`` is given, a window reaching into it is refused.
    """
    lo, hi = zpl_window
    if psb_support is not None and hi > psb_support[0] and lo < psb_support[1]:
        raise AmbiguityError(f"ZPL window {zpl_window} overlaps sideband support {psb_support}")
    return integrate_band(s, lo, hi)


@dataclass
class PeakFit:
    peaks: list
    residual_norm: float
    initial_residual_norm: float
    iterations: int
    ill_posed: bool
    stderr: np.ndarray


def _gauss_model(params, lam):
    p = params.reshape(-1, 3)
    out = np.zeros_like(lam)
    for c, f, w in p:
        out += GaussianPeak(c, f, w).evaluate(lam)
    return out


def _gauss_jacobian(params, lam):
    p = params.reshape(-1, 3)
    J = np.empty((lam.size, params.size))
    for i, (c, f, w) in enumerate(p):
        peak = GaussianPeak(c, f, w)
        s = peak.sigma
        shape = peak.shape(lam)
        g = w * shape
        dx = lam - c
        J[:, 3 * i] = g * dx / s**2
        J[:, 3 * i + 1] = g * (dx * dx / s**3 - 1.0 / s) * FWHM_TO_SIGMA
        J[:, 3 * i + 2] = shape
    return J


def fit_gaussian_peaks(s, k, init):
    """Least-squares fit of ``k`` Gaussian peaks to ``s``.

    ``init`` is a sequence of GaussianPeak guesses. The result is flagged
    ``ill_posed`` when the data shows fewer maxima than ``k`` or two fitted
    centres end up closer than half a linewidth.
    """
    if k < 1 or len(init) != k:
        raise DomainError("need k >= 1 initial guesses")
    wl = s.wavelengths
    for p in init:
        if not wl[0] <= p.center <= wl[-1]:
            raise DomainError(f"initial centre {p.center:g} outside grid")
    centers = sorted(p.center for p in init)
    if any(b - a <= 0 for a, b in zip(centers, centers[1:])):
        raise DomainError("coincident initial centres")
    x0 = np.array([[p.center, p.fwhm, p.weight] for p in init], dtype=float).ravel()
    lam, y = wl, s.density

    def valid(x):
        return bool(np.all(x.reshape(-1, 3)[:, 1] > 0))

    res = levenberg_marquardt(lambda x: _gauss_model(x, lam) - y,
                              lambda x: _gauss_jacobian(x, lam), x0, valid=valid)
    params = res.x.reshape(-1, 3)
    peaks = [GaussianPeak(c, f, max(w, 0.0)) for c, f, w in params]
    interior = y[1:-1]
    n_max = int(np.sum((interior > y[:-2]) & (interior > y[2:])))
    ordered = sorted(peaks, key=lambda p: p.center)
    close = any(b.center - a.center < 0.5 * min(a.fwhm, b.fwhm) for a, b in zip(ordered, ordered[1:]))
    ill = k > n_max or close or any(w <= 0 for w in params[:, 2])
    return PeakFit(peaks=peaks, residual_norm=res.residual_norm,
                   initial_residual_norm=res.initial_residual_norm, iterations=res.iterations,
                   ill_posed=bool(ill), stderr=res.stderr())


def doublet_splitting_nm(center_nm, splitting_mev):
    """Wavelength separation equivalent to an energy splitting at ``center_nm``."""
    return center_nm**2 * splitting_mev * 1e-3 / HC_EV_NM


def default_grid(lo=625.0, hi=850.0, step=0.02):
    """Default working grid for the NV emitter model (ZPL through sideband)."""
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)
