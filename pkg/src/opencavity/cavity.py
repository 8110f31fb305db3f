"""Plano-concave open-cavity optics: Gaussian mode structure, Q, finesse, F_max.

Lengths are in micrometres, wavelengths in nanometres unless a name says
otherwise.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InstabilityError


@dataclass(frozen=True)
class CavityGeometry:
    """Concave mirror radius, physical gap and per-mirror penetration depths (all um)."""

    roc: float
    gap: float
    penetration: tuple = (0.0, 0.0)
    medium_index: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "penetration", tuple(float(p) for p in self.penetration))
        if len(self.penetration) != 2 or min(self.penetration) < 0:
            raise DomainError("penetration must be two non-negative depths")
        if self.gap <= 0 or self.roc <= 0:
            raise DomainError("gap and radius of curvature must be positive")
        if self.medium_index < 1:
            raise DomainError("medium index must be >= 1")

    @property
    def optical_length(self):
        return self.gap + self.penetration[0] + self.penetration[1]

    @property
    def stable(self):
        return 0 < self.optical_length < self.roc

    def check_stable(self):
        if not self.stable:
            raise InstabilityError(f"optical length {self.optical_length:g} um is not below "
                                   f"the radius of curvature {self.roc:g} um")

    def gouy_phase(self):
        """One-way Gouy phase arccos(sqrt(1 - L/R)) in radians."""
        self.check_stable()
        return math.acos(math.sqrt(1.0 - self.optical_length / self.roc))


@dataclass(frozen=True)
class CavityMode:
    """A resolved resonance.

    ``q`` counts half-waves in the physical gap (the usual lab label);
    ``q_phase`` is the longitudinal index in the round-trip phase condition.
    """

    q: int
    m: int
    n: int
    wavelength: float
    q_phase: int = 0
    linewidth_fwhm: float = float("nan")
    mode_volume: float = float("nan")

    @property
    def quality_factor(self):
        return self.wavelength / self.linewidth_fwhm

    @property
    def dark_on_axis(self):
        """Odd transverse order: the on-axis field vanishes."""
        return (self.m + self.n) % 2 == 1


def rayleigh_range(geometry):
    """z_R = L sqrt(R/L - 1) in um."""
    geometry.check_stable()
    L = geometry.optical_length
    return L * math.sqrt(geometry.roc / L - 1.0)


def mode_volume_gaussian(geometry, wavelength):
    """Gaussian-beam mode volume lambda z_R L / 4 in um^3 (wavelength in nm)."""
    return wavelength * 1e-3 * rayleigh_range(geometry) * geometry.optical_length / 4.0


def transverse_coupling(m, n):
    """On-axis |E|^2 of HG_mn relative to HG_00 at equal power and waist."""

    def c(k):
        if k % 2:
            return 0.0
        return math.comb(k, k // 2) / 2.0**k

    return c(m) * c(n)


def gap_half_waves(gap_um, wavelength):
    """Number of half-waves spanned by the physical gap, rounded up."""
    return int(math.ceil(2.0 * gap_um * 1e3 / wavelength - 1e-9))


def phase_residual(geometry, mode):
    """Round-trip phase condition residual (rad) of a resonance."""
    L = geometry.optical_length
    psi = geometry.gouy_phase() if math.isfinite(geometry.roc) else 0.0
    lam = mode.wavelength * 1e-3
    return 2 * math.pi * L / lam - (mode.q_phase * math.pi + (mode.m + mode.n + 1) * psi)


def resonant_wavelengths(geometry, band, max_order=4):
    """All (q, m, n) resonances with m + n <= ``max_order`` inside ``band`` (nm).

    Uses 2 pi L / lambda = q pi + (m + n + 1) arccos(sqrt(1 - L/R)). A
    non-finite radius gives the planar-planar ladder lambda = 2 L / q.
    Modes are returned sorted by wavelength.
    """
    lo, hi = band
    if not lo < hi:
        return []
    L = geometry.optical_length
    if math.isfinite(geometry.roc):
        psi = geometry.gouy_phase()
    else:
        psi = 0.0
    L_nm = L * 1e3
    modes = []
    for order in range(max_order + 1):
        extra = (order + 1) * psi
        q_min = max(1, math.ceil((2 * math.pi * L_nm / hi - extra) / math.pi - 1e-12))
        q_max = math.floor((2 * math.pi * L_nm / lo - extra) / math.pi + 1e-12)
        for qp in range(q_min, q_max + 1):
            lam = 2 * math.pi * L_nm / (qp * math.pi + extra)
            if not lo <= lam <= hi:
                continue
            for m in range(order + 1):
                modes.append(CavityMode(q=gap_half_waves(geometry.gap, lam), m=m, n=order - m,
                                        wavelength=lam, q_phase=qp))
    modes.sort(key=lambda md: (md.wavelength, md.m, md.n))
    return modes


def q_from_linewidth(wavelength, fwhm):
    if not fwhm > 0:
        raise DomainError("linewidth must be positive")
    return wavelength / fwhm


def finesse_from_reflectivity(r1, r2):
    """Coefficient finesse pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2))."""
    if not (0 < r1 < 1 and 0 < r2 < 1):
        raise DomainError("reflectivities must lie strictly between 0 and 1")
    rr = math.sqrt(r1 * r2)
    return math.pi * math.sqrt(rr) / (1.0 - rr)


def linewidth_from_finesse(wavelength, optical_length, finesse):
    """FWHM in nm: lambda^2 / (2 L F), L in um."""
    return wavelength**2 / (2.0 * optical_length * 1e3 * finesse)


def f_max(wavelength, medium_index, q_factor, mode_volume):
    """Ideal Purcell factor (3 / 4 pi^2) (lambda/n)^3 Q / V; lambda in nm, V in um^3."""
    if min(wavelength, medium_index, q_factor, mode_volume) <= 0:
        raise DomainError("all arguments of f_max must be positive")
    lam_um = wavelength * 1e-3 / medium_index
    return 3.0 / (4.0 * math.pi**2) * lam_um**3 * q_factor / mode_volume


def annotate(mode, geometry, fwhm):
    """Copy of ``mode`` with linewidth and HG-corrected on-axis mode volume."""
    v00 = mode_volume_gaussian(geometry, mode.wavelength)
    c = transverse_coupling(mode.m, mode.n)
    vol = v00 / c if c > 0 else float("inf")
    return CavityMode(mode.q, mode.m, mode.n, mode.wavelength, mode.q_phase, fwhm, vol)


def write_modes_csv(modes, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "m", "n", "wavelength_nm", "fwhm_nm", "Q", "V_um3"])
        for md in modes:
            w.writerow([md.q, md.m, md.n, f"{md.wavelength:.9g}", f"{md.linewidth_fwhm:.9g}",
                        f"{md.quality_factor:.9g}", f"{md.mode_volume:.9g}"])


def mode_volume_sweep(roc, lengths, wavelength):
    """Gaussian mode volume over a range of optical lengths (um)."""
    return np.array([mode_volume_gaussian(CavityGeometry(roc, L), wavelength) for L in lengths])
