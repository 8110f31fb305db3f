"""Pure numpy implementations of the hot kernels."""
import numpy as np

# elements per broadcast block in lorentz_overlap
_BLOCK = 2_000_000


def stack_response(index, thickness, ambient, substrate, wavelengths):
    """Amplitude reflection and transmission of a layer stack at each wavelength.

    exp(-i omega t) convention, normal incidence, real indices.
    """
    wl = np.asarray(wavelengths, dtype=float)
    m00 = np.ones(wl.shape, dtype=complex)
    m01 = np.zeros(wl.shape, dtype=complex)
    m10 = np.zeros(wl.shape, dtype=complex)
    m11 = np.ones(wl.shape, dtype=complex)
    for n, d in zip(index, thickness):
        delta = 2.0 * np.pi * n * d / wl
        cd = np.cos(delta)
        sd = np.sin(delta)
        m00, m01, m10, m11 = (
            m00 * cd - 1j * n * sd * m01,
            -1j * sd / n * m00 + m01 * cd,
            m10 * cd - 1j * n * sd * m11,
            -1j * sd / n * m10 + m11 * cd,
        )
    b = m00 + m01 * substrate
    c = m10 + m11 * substrate
    den = ambient * b + c
    return (ambient * b - c) / den, 2.0 * ambient / den


def lorentz_overlap(wavelengths, density, centers, qfactors):
    """Trapezoidal integral of density / (1 + 4 Q^2 (lam/center - 1)^2) per center."""
    lam = np.asarray(wavelengths, dtype=float)
    dens = np.asarray(density, dtype=float)
    centers = np.asarray(centers, dtype=float)
    q4 = 4.0 * np.asarray(qfactors, dtype=float) ** 2
    out = np.empty(centers.shape)
    step = max(1, _BLOCK // max(lam.size, 1))
    for start in range(0, centers.size, step):
        sl = slice(start, start + step)
        x = lam[None, :] / centers[sl, None] - 1.0
        f = dens[None, :] / (1.0 + q4[sl, None] * x * x)
        out[sl] = np.trapezoid(f, lam, axis=1) if hasattr(np, "trapezoid") else np.trapz(f, lam, axis=1)
    return out
