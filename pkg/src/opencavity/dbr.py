"""Normal-incidence transfer matrices for Bragg mirrors and mirror/gap/mirror cavities.

Stacks are listed from the ambient side. Phases follow the exp(-i omega t)
convention, so a reflection phase that grows with frequency means positive
penetration depth. Lengths are in nanometres.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import kernels
from .errors import DomainError, ResonanceNotFoundError

SILICA = 1.46
N_SIO2 = 1.52
N_TA2O5 = 2.10
N_TIO2 = 2.40


@dataclass(frozen=True)
class LayerStack:
    ambient: float
    layers: tuple
    substrate: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        layers = tuple((float(n), float(d)) for n, d in self.layers)
        object.__setattr__(self, "layers", layers)
        for n, d in layers:
            if n < 1:
                raise DomainError(f"layer index {n} below 1")
            if not d > 0:
                raise DomainError(f"layer thickness must be positive, got {d}")
        if self.ambient < 1 or self.substrate < 1:
            raise DomainError("ambient and substrate indices must be >= 1")

    @property
    def index(self):
        return np.array([n for n, _ in self.layers], dtype=float)

    @property
    def thickness(self):
        return np.array([d for _, d in self.layers], dtype=float)

    @property
    def total_thickness(self):
        return float(self.thickness.sum())

    def reversed(self):
        """The same stack illuminated from the substrate side."""
        return LayerStack(self.substrate, tuple(reversed(self.layers)), self.ambient, dict(self.meta))

    @classmethod
    def quarter_wave(cls, n_first, n_second, pairs, lambda0, ambient=1.0, substrate=SILICA,
                     extra_layers=()):
        """``pairs`` repetitions of (first, second) quarter-wave layers.

        ``extra_layers`` (index, thickness) are appended on the substrate side.
        """
        layers = [(n_first, lambda0 / (4.0 * n_first)), (n_second, lambda0 / (4.0 * n_second))] * pairs
        layers += [tuple(x) for x in extra_layers]
        meta = {"pairs": pairs, "lambda0_nm": lambda0, "order": (n_first, n_second)}
        return cls(ambient, tuple(layers), substrate, meta)


def characteristic_matrix(n, d, wavelength):
    delta = 2.0 * math.pi * n * d / wavelength
    c, s = math.cos(delta), math.sin(delta)
    return np.array([[c, -1j * s / n], [-1j * n * s, c]])


def response(stack, wavelengths):
    """Complex amplitude (r, t) arrays."""
    return kernels.stack_response(stack.index, stack.thickness, stack.ambient, stack.substrate,
                                  wavelengths)


def reflectivity_sweep(stack, wavelengths):
    """(R, phase, T) arrays over ``wavelengths``."""
    r, t = response(stack, wavelengths)
    return np.abs(r) ** 2, np.angle(r), stack.substrate / stack.ambient * np.abs(t) ** 2


def reflectivity(stack, wavelength):
    """Intensity reflectance and reflection phase (rad) at one wavelength."""
    r, _ = response(stack, [wavelength])
    return float(abs(r[0]) ** 2), float(np.angle(r[0]))


def transmittance(stack, wavelength):
    _, t = response(stack, [wavelength])
    return float(stack.substrate / stack.ambient * abs(t[0]) ** 2)


def stop_band(stack, band, threshold, step=0.1):
    """Widest contiguous interval in ``band`` with R >= threshold, or None.

    Edges found on the scan are refined by root finding on R - threshold.
    """
    if not 0 < threshold < 1:
        if threshold >= 1:
            return None
        raise DomainError("threshold must lie in (0, 1)")
    lo, hi = band
    wl = np.arange(lo, hi + 0.5 * step, step)
    R, _, _ = reflectivity_sweep(stack, wl)
    ok = R >= threshold
    if not ok.any():
        return None
    best, start = None, None
    for i, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if best is None or (i - 1 - start) > (best[1] - best[0]):
                best = (start, i - 1)
            start = None
    i0, i1 = best

    def f(x):
        return reflectivity(stack, x)[0] - threshold

    left = brentq(f, wl[i0 - 1], wl[i0], xtol=1e-9) if i0 > 0 else float(wl[i0])
    right = brentq(f, wl[i1], wl[i1 + 1], xtol=1e-9) if i1 < wl.size - 1 else float(wl[i1])
    return float(left), float(right)


def penetration_depth(stack, wavelength0, h=0.01):
    """Phase penetration depth -(lambda^2 / 4 pi) d(phase)/d(lambda) in nm.

    Central difference with step ``h``; ``wavelength0`` must sit inside the
    stop band (R >= 0.5 band around it).
    """
    R0, _ = reflectivity(stack, wavelength0)
    band = stop_band(stack, (0.75 * wavelength0, 1.25 * wavelength0), 0.5, step=wavelength0 * 1e-3)
    if R0 < 0.5 or band is None or not band[0] <= wavelength0 <= band[1]:
        raise DomainError(f"{wavelength0:g} nm is outside the stop band")
    r, _ = response(stack, [wavelength0 - h, wavelength0 + h])
    dphi = float(np.angle(r[1] / r[0]))
    return -(wavelength0**2 / (4.0 * math.pi)) * dphi / (2.0 * h)


def pair_count_for(target, n_first, n_second, lambda0, counts=range(5, 16), **kw):
    """Pair count whose reflectance at ``lambda0`` is nearest ``target``."""
    scored = []
    for c in counts:
        st = LayerStack.quarter_wave(n_first, n_second, c, lambda0, **kw)
        scored.append((abs(reflectivity(st, lambda0)[0] - target), c))
    return min(scored)[1]


def concave_mirror(pairs=20, lambda0=637.0, ambient=1.0, substrate=SILICA):
    """Ta2O5/SiO2 coating, high-index layer facing the gap."""
    return LayerStack.quarter_wave(N_TA2O5, N_SIO2, pairs, lambda0, ambient, substrate)


def planar_mirror(pairs=None, lambda0=637.0, target=0.997, ambient=1.0, substrate=SILICA):
    """SiO2/TiO2 coating terminated by its low-index layer on the gap side.

    Without ``pairs`` the count in 5..15 giving R nearest ``target`` is used and
    recorded in ``meta['pairs']``.
    """
    if pairs is None:
        pairs = pair_count_for(target, N_SIO2, N_TIO2, lambda0, ambient=ambient, substrate=substrate)
    return LayerStack.quarter_wave(N_SIO2, N_TIO2, pairs, lambda0, ambient, substrate)


@dataclass(frozen=True, eq=False)
class FieldProfile:
    """|E|^2 along the stack normal, normalised to unit incident amplitude.

    ``positions`` are in nm with 0 at the first mirror's gap-side surface.
    """

    positions: np.ndarray
    intensity: np.ndarray
    wavelength: float
    regions: dict = field(default_factory=dict)
    amplitude: np.ndarray = None


def assemble_cavity(mirror_a, gap, mirror_b, slab=None):
    """Outer medium, layer list and gap start index for mirror_a | gap | mirror_b.

    Both mirrors are given as seen from the gap. ``slab`` = (index, thickness)
    is placed on mirror_a inside the gap.
    """
    if abs(mirror_a.ambient - mirror_b.ambient) > 1e-12:
        raise DomainError("mirrors disagree on the gap medium index")
    layers = list(reversed(mirror_a.layers))
    n_gap = mirror_a.ambient
    if slab is not None:
        n_s, d_s = slab
        if d_s >= gap:
            raise DomainError("slab thicker than the gap")
        layers.append((n_s, d_s))
        layers.append((n_gap, gap - d_s))
    else:
        layers.append((n_gap, gap))
    layers += list(mirror_b.layers)
    return LayerStack(mirror_a.substrate, tuple(layers), mirror_b.substrate)


def find_resonance(structure, wavelength, window=2.0, step=1e-3):
    """Transmission peak within +-``window`` nm, refined by golden-section search."""
    wl = np.arange(wavelength - window, wavelength + window + 0.5 * step, step)
    _, _, T = reflectivity_sweep(structure, wl)
    i = int(np.argmax(T))
    edge = max(T[0], T[-1])
    if i == 0 or i == wl.size - 1 or T[i] < 10.0 * edge:
        raise ResonanceNotFoundError(f"no transmission resonance within {window:g} nm of {wavelength:g} nm")
    res = minimize_scalar(lambda x: -reflectivity_sweep(structure, [x])[2][0],
                          bracket=(wl[i - 1], wl[i], wl[i + 1]), method="golden",
                          options={"xtol": 1e-12})
    return float(res.x)


def field_samples(structure, wavelength, pitch=5.0):
    """Complex E and positions (from the first interface) sampled at <= ``pitch``.

    Back-propagates from the exit side where (E, H) = (1, n_substrate), then
    scales by the incident amplitude. Layer boundaries are always sampled.
    """
    eh = np.array([1.0, structure.substrate], dtype=complex)
    z_end = structure.total_thickness
    pos, vals = [z_end], [eh[0]]
    z = z_end
    for n, d in reversed(structure.layers):
        k = max(1, int(math.ceil(d / pitch)))
        for s in np.linspace(0.0, d, k + 1)[1:]:
            e = (characteristic_matrix(n, s, wavelength) @ eh)[0]
            pos.append(z - s)
            vals.append(e)
        eh = characteristic_matrix(n, d, wavelength) @ eh
        z -= d
    n0 = structure.ambient
    e_inc = (n0 * eh[0] + eh[1]) / (2.0 * n0)
    pos = np.array(pos[::-1])
    vals = np.array(vals[::-1]) / e_inc
    return pos, vals


def forward_field_samples(structure, wavelength, positions):
    """Independent forward route: E(z) from the incident side using r."""
    r, _ = response(structure, [wavelength])
    n0 = structure.ambient
    eh = np.array([1.0 + r[0], n0 * (1.0 - r[0])], dtype=complex)
    bounds = np.concatenate(([0.0], np.cumsum(structure.thickness)))
    out = np.empty(len(positions), dtype=complex)
    order = np.argsort(positions)
    j, state = 0, eh
    for idx in order:
        z = positions[idx]
        while j < len(structure.layers) - 1 and z > bounds[j + 1]:
            n, d = structure.layers[j]
            state = np.linalg.solve(characteristic_matrix(n, d, wavelength), state)
            j += 1
        n, _ = structure.layers[j]
        out[idx] = np.linalg.solve(characteristic_matrix(n, z - bounds[j], wavelength), state)[0]
    return out


def cavity_field_profile(mirror_a, gap, mirror_b, wavelength, slab=None, pitch=5.0, locate=True,
                         window=2.0):
    """Standing-wave |E|^2 through mirror_a | gap | mirror_b at the nearby resonance.

    With ``locate`` the transmission peak within +-``window`` nm is found first
    (ResonanceNotFoundError otherwise) and the profile is taken there.
    """
    structure = assemble_cavity(mirror_a, gap, mirror_b, slab)
    lam = find_resonance(structure, wavelength, window) if locate else wavelength
    pos, e = field_samples(structure, lam, pitch)
    offset = mirror_a.total_thickness
    z = pos - offset
    regions = {"mirror_a": (-offset, 0.0), "gap": (0.0, float(gap)),
               "mirror_b": (float(gap), float(gap) + mirror_b.total_thickness)}
    return FieldProfile(z, np.abs(e) ** 2, lam, regions, e)


def antinode_count(profile, region, edge_tol=1e-6):
    """Strict local maxima of |E|^2 with positions strictly inside ``region``.

    Samples within ``edge_tol`` nm of either boundary count as on the boundary.
    """
    a, b = region
    a, b = a + edge_tol, b - edge_tol
    I, z = profile.intensity, profile.positions
    peak = np.zeros(I.shape, dtype=bool)
    peak[1:-1] = (I[1:-1] > I[:-2]) & (I[1:-1] > I[2:])
    return int(np.sum(peak & (z > a) & (z < b)))


def antinode_near(profile, position, tolerance=10.0):
    """True if the local |E|^2 maximum around ``position`` lies within ``tolerance`` nm.

    The search spans an eighth of a wavelength on both sides.
    """
    span = profile.wavelength / 8.0
    sel = np.nonzero(np.abs(profile.positions - position) <= span)[0]
    if sel.size < 3:
        return False
    i = sel[np.argmax(profile.intensity[sel])]
    if i in (sel[0], sel[-1]):
        return False
    return abs(profile.positions[i] - position) <= tolerance


def write_sweep_csv(stack, wavelengths, path):
    R, phase, _ = reflectivity_sweep(stack, wavelengths)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["wavelength_nm", "R", "phase_rad"])
        for lam, r_, p in zip(wavelengths, R, phase):
            w.writerow([f"{lam:.9g}", f"{r_:.9g}", f"{p:.9g}"])
