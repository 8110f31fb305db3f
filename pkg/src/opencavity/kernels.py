"""Backend selection for the hot kernels.

The compiled extension is used when importable; set ``OPENCAVITY_PURE=1`` to
force the numpy fallback. Both backends take the same arguments.
"""
import os

import numpy as np

from . import _fallback

_compiled = None
if os.environ.get("OPENCAVITY_PURE", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"
_impl = _compiled if _compiled is not None else _fallback


def _vec(x):
    return np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))


def stack_response(index, thickness, ambient, substrate, wavelengths):
    """Complex (r, t) arrays of a layer stack, one entry per wavelength."""
    return _impl.stack_response(_vec(index), _vec(thickness), float(ambient),
                                float(substrate), _vec(wavelengths))


def lorentz_overlap(wavelengths, density, centers, qfactors):
    """Trapezoidal overlap of a sampled density with unit-peak Lorentzians."""
    centers = _vec(centers)
    qfactors = np.broadcast_to(_vec(qfactors), centers.shape)
    return _impl.lorentz_overlap(_vec(wavelengths), _vec(density), centers,
                                 np.ascontiguousarray(qfactors))


def compiled_available():
    return _compiled is not None
