"""Reductions of measured observables: saturation curves, lifetimes, g2(0)."""
import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegeneracyError, DomainError, FitError
from .fitting import levenberg_marquardt


@dataclass
class SaturationFit:
    i_sat: float
    p_sat: float
    residual: float
    i_sat_err: float = float("nan")
    p_sat_err: float = float("nan")
    iterations: int = 0
    uncertainty_method: str = "1-sigma from residual-scaled Jacobian at optimum"

    def to_dict(self):
        return asdict(self)


@dataclass
class DecayFit:
    tau: float
    amplitude: float
    baseline: float
    residual: float
    tau_err: float = float("nan")
    amplitude_err: float = float("nan")
    baseline_err: float = float("nan")
    iterations: int = 0
    uncertainty_method: str = "1-sigma from residual-scaled Jacobian at optimum"

    def to_dict(self):
        return asdict(self)


def saturation_model(power, i_sat, p_sat):
    power = np.asarray(power, dtype=float)
    return i_sat * power / (p_sat + power)


def _as_columns(data, n_min, what):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"{what} data must be (x, y) pairs")
    if arr.shape[0] < n_min:
        raise DomainError(f"{what} fit needs at least {n_min} points")
    return arr[:, 0], arr[:, 1]


def saturation_rms(power, counts, i_sat, p_sat):
    r = saturation_model(power, i_sat, p_sat) - counts
    return float(np.sqrt(np.mean(r * r)))


def fit_saturation(data):
    """Fit I = I_sat P / (P_sat + P) to (power mW, counts/s) pairs."""
    p, y = _as_columns(data, 3, "saturation")
    if np.any(p <= 0) or np.unique(p).size != p.size:
        raise DomainError("powers must be positive and distinct")
    if np.all(y == 0):
        raise DegeneracyError("all intensities are zero")
    x0 = np.array([float(np.max(y)), float(np.median(p))])
    scale = np.array([x0[0], x0[1]])

    def res(x):
        return saturation_model(p, *(x * scale)) - y

    def jac(x):
        i_sat, p_sat = x * scale
        d = p_sat + p
        return np.column_stack([p / d * scale[0], -i_sat * p / d**2 * scale[1]])

    fit = levenberg_marquardt(res, jac, np.ones(2), valid=lambda x: bool(np.all(x > 0)))
    i_sat, p_sat = fit.x * scale
    err = fit.stderr() * scale
    return SaturationFit(float(i_sat), float(p_sat), saturation_rms(p, y, i_sat, p_sat),
                         float(err[0]), float(err[1]), fit.iterations)


def decay_model(t, amplitude, tau, baseline=0.0):
    return amplitude * np.exp(-np.asarray(t, dtype=float) / tau) + baseline


def fit_exponential(data, with_baseline=False):
    """Fit A exp(-t / tau) (+ B) to (t ns, counts) pairs.

    tau starts from a log-linear regression over the first half of the decay.
    """
    t, y = _as_columns(data, 4, "decay")
    if np.any(np.diff(t) <= 0):
        raise DomainError("times must be ascending")
    half = max(2, t.size // 2)
    th, yh = t[:half], y[:half]
    pos = yh > 0
    if pos.sum() >= 2:
        slope, icpt = np.polyfit(th[pos], np.log(yh[pos]), 1)
        tau0 = -1.0 / slope if slope < 0 else (t[-1] - t[0])
        a0 = math.exp(icpt)
    else:
        tau0, a0 = (t[-1] - t[0]) / 2.0, float(np.max(y))
    x0 = [a0, tau0] + ([0.0] if with_baseline else [])

    def res(x):
        return decay_model(t, x[0], x[1], x[2] if with_baseline else 0.0) - y

    def jac(x):
        e = np.exp(-t / x[1])
        cols = [e, x[0] * t / x[1] ** 2 * e]
        if with_baseline:
            cols.append(np.ones_like(t))
        return np.column_stack(cols)

    fit = levenberg_marquardt(res, jac, x0, valid=lambda x: x[1] > 0)
    a, tau = fit.x[0], fit.x[1]
    base = fit.x[2] if with_baseline else 0.0
    if not tau > 0:
        raise FitError(f"fitted lifetime {tau:g} is not positive")
    err = fit.stderr()
    rms = float(np.sqrt(np.mean(res(fit.x) ** 2)))
    return DecayFit(float(tau), float(a), float(base), rms, float(err[1]), float(err[0]),
                    float(err[2]) if with_baseline else 0.0, fit.iterations)


def rate_change(tau_out, tau_in):
    """Percentage increase of the decay rate, (tau_out / tau_in - 1) * 100."""
    if tau_out <= 0 or tau_in <= 0:
        raise DomainError("lifetimes must be positive")
    return (tau_out / tau_in - 1.0) * 100.0


def rate_change_error(tau_out, err_out, tau_in, err_in):
    """Propagated 1-sigma uncertainty (percentage points) of ``rate_change``."""
    ratio = tau_out / tau_in
    return 100.0 * ratio * math.hypot(err_out / tau_out, err_in / tau_in)


@dataclass
class G2Correction:
    g2: float
    negative: bool


def g2_background_correct(g2_raw, rho):
    """Remove uncorrelated background: (g2 - (1 - rho^2)) / rho^2.

    ``rho`` is the signal fraction. Over-subtraction is flagged, not clamped.
    """
    if g2_raw < 0:
        raise DomainError("g2 must be non-negative")
    if not 0 < rho <= 1:
        raise DomainError("signal fraction must lie in (0, 1]")
    g = (g2_raw - (1.0 - rho**2)) / rho**2
    return G2Correction(g, g < 0)


def g2_add_background(g2_corrected, rho):
    """Inverse of ``g2_background_correct``."""
    return g2_corrected * rho**2 + 1.0 - rho**2


def single_emitter_fraction(g2):
    """Fraction of light from one emitter, sqrt(1 - g2(0)), for g2 in [0, 1]."""
    if not 0 <= g2 <= 1:
        raise DomainError("single-emitter fraction needs 0 <= g2(0) <= 1")
    return math.sqrt(1.0 - g2)


def read_xy_csv(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise DomainError(f"{path}: expected header '{','.join(header)}'")
    try:
        return [(float(a), float(b)) for a, b in (r for r in rows[1:] if r)]
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
