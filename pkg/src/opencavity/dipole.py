"""Orientation of a strain-split dipole pair from polarisation data.

Angles are in degrees at the interface. Out-of-plane angles are measured from
the mirror plane, so 0 deg means the dipole lies in the plane and couples
fully to the cavity field.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError, InfeasibleError

K_B_MEV_PER_K = 0.0861733


def rotation_matrix(theta, beta):
    """Rotation about the defect axis by ``beta`` followed by tilt ``theta``."""
    t, b = math.radians(theta), math.radians(beta)
    ct, st, cb, sb = math.cos(t), math.sin(t), math.cos(b), math.sin(b)
    return np.array([
        [cb, -sb, 0.0],
        [ct * sb, ct * cb, -st],
        [st * sb, st * cb, ct],
    ])


def projected_intensities(theta, beta):
    """In-plane intensities (X'^2, Y'^2) of the rotated unit dipoles."""
    A = rotation_matrix(theta, beta)
    x, y = A[:, 0], A[:, 1]
    return float(x[0] ** 2 + x[1] ** 2), float(y[0] ** 2 + y[1] ** 2)


def polar_from_extrema(i_min, i_max):
    """Polar angle of the defect axis from I_min = I_max cos^2(theta)."""
    if not i_max > 0 or i_min < 0:
        raise DomainError("need i_max > 0 and i_min >= 0")
    if i_min > i_max:
        raise DomainError("i_min exceeds i_max")
    return math.degrees(math.acos(math.sqrt(i_min / i_max)))


def thermal_ratio(delta_e, temperature):
    """Boltzmann population ratio exp(-dE / kT) of the upper to the lower level."""
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    return math.exp(-delta_e / (K_B_MEV_PER_K * temperature))


def branching_factors(ratio):
    """(n_upper, n_lower) = (ratio, 1) / (1 + ratio)."""
    return ratio / (1.0 + ratio), 1.0 / (1.0 + ratio)


def equivalent_circle_ratio(measured_ratio, thermal):
    """Intensity ratio with the thermal population weighting divided out."""
    if not thermal > 0:
        raise DomainError("thermal ratio must be positive")
    if not measured_ratio > 0:
        raise DomainError("measured ratio must be positive")
    return measured_ratio / thermal


def attainable_ratio_interval(theta):
    c2 = math.cos(math.radians(theta)) ** 2
    return c2, 1.0 / c2


def solve_beta(theta, R):
    """Azimuth beta in [0, 90] with X'^2 / Y'^2 = R at polar angle ``theta``."""
    if not 0 < theta < 90:
        raise DegeneracyError("beta is unobservable for theta = 0 (and undefined at 90)")
    lo, hi = attainable_ratio_interval(theta)
    if not lo - 1e-12 <= R <= hi + 1e-12:
        raise InfeasibleError(f"ratio {R:g} outside attainable [{lo:g}, {hi:g}] at theta={theta:g}",
                              interval=(lo, hi))
    s = math.sin(math.radians(theta)) ** 2
    sin2b = (1.0 - R + R * s) / (s * (1.0 + R))
    return math.degrees(math.asin(math.sqrt(min(max(sin2b, 0.0), 1.0))))


def out_of_plane_angles(theta, beta):
    """(phi_X', phi_Y') between each rotated dipole and the mirror plane."""
    x2, y2 = projected_intensities(theta, beta)
    return (math.degrees(math.acos(math.sqrt(min(x2, 1.0)))),
            math.degrees(math.acos(math.sqrt(min(y2, 1.0)))))


def xi_overlap(phi):
    """cos^2 of the angle between the dipole and the mirror plane."""
    if not 0 <= phi <= 90:
        raise DomainError("phi must lie in [0, 90] degrees")
    return math.cos(math.radians(phi)) ** 2


@dataclass(frozen=True)
class DipolePair:
    """Dipole pair geometry with thermal weighting.

    Index 0 is the higher-energy (less populated) transition, index 1 the
    lower one, matching (peak 2, peak 3). ``phi_override`` replaces the
    derived out-of-plane angles when set.
    """

    theta: float
    beta: float
    delta_e: float
    temperature: float
    phi_override: tuple = None

    def __post_init__(self):
        if not (0 <= self.theta <= 90 and 0 <= self.beta <= 90):
            raise DomainError("theta and beta must lie in [0, 90] degrees")

    @classmethod
    def from_measurement(cls, theta, measured_ratio, delta_e, temperature, phi_override=None):
        ratio = thermal_ratio(delta_e, temperature)
        R = equivalent_circle_ratio(measured_ratio, ratio)
        return cls(theta, solve_beta(theta, R), delta_e, temperature, phi_override)

    @property
    def phi(self):
        if self.phi_override is not None:
            return tuple(float(p) for p in self.phi_override)
        return out_of_plane_angles(self.theta, self.beta)

    @property
    def xi(self):
        return tuple(xi_overlap(p) for p in self.phi)

    @property
    def thermal_ratio(self):
        return thermal_ratio(self.delta_e, self.temperature)

    @property
    def branching(self):
        return branching_factors(self.thermal_ratio)

    def summary(self):
        phi = self.phi
        return {
            "theta_deg": self.theta,
            "beta_deg": self.beta,
            "phi_deg": list(phi),
            "xi": list(self.xi),
            "thermal_ratio": self.thermal_ratio,
            "branching": list(self.branching),
        }


def fit_polar(angles_deg, intensity):
    """Fit a + b cos 2a + c sin 2a; returns (i_min, i_max, angle of max in deg)."""
    a = np.radians(np.asarray(angles_deg, dtype=float))
    y = np.asarray(intensity, dtype=float)
    X = np.column_stack([np.ones_like(a), np.cos(2 * a), np.sin(2 * a)])
    (c0, c1, c2), *_ = np.linalg.lstsq(X, y, rcond=None)
    amp = math.hypot(c1, c2)
    return c0 - amp, c0 + amp, math.degrees(0.5 * math.atan2(c2, c1)) % 180.0


def analyse_polarization(angles_deg, peak2, peak3, delta_e, temperature):
    """Defect-axis polar angle and dipole azimuth from polar plots of both peaks.

    The peak-2 trace is divided by the thermal ratio before summing so the
    sum represents two equal perpendicular dipoles.
    """
    ratio = thermal_ratio(delta_e, temperature)
    _, max2, _ = fit_polar(angles_deg, peak2)
    _, max3, _ = fit_polar(angles_deg, peak3)
    measured = max2 / max3
    lo, hi, _ = fit_polar(angles_deg, np.asarray(peak2) / ratio + np.asarray(peak3))
    theta = polar_from_extrema(max(lo, 0.0), hi)
    R = equivalent_circle_ratio(measured, ratio)
    beta = solve_beta(theta, R)
    pair = DipolePair(theta, beta, delta_e, temperature)
    out = pair.summary()
    out.update({"measured_ratio": measured, "equivalent_ratio": R, "i_min": lo, "i_max": hi})
    return out


def read_polarization_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = [c.strip() for c in rows[0]]
    if header != ["angle_deg", "intensity_peak2", "intensity_peak3"]:
        raise DomainError(f"{path}: expected header 'angle_deg,intensity_peak2,intensity_peak3'")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r])
    return data[:, 0], data[:, 1], data[:, 2]


def simulate_polarization(theta, beta, ratio, angles_deg):
    """Forward model of the two polar traces for a dipole pair.

    Each rotated dipole is projected into the measurement plane and its
    intensity along the analyser direction is recorded; peak 2 is scaled by
    the thermal ``ratio``.
    """
    A = rotation_matrix(theta, beta)
    a = np.radians(np.asarray(angles_deg, dtype=float))
    e = np.column_stack([np.cos(a), np.sin(a)])
    p2 = ratio * (e @ A[:2, 0]) ** 2
    p3 = (e @ A[:2, 1]) ** 2
    return p2, p3
