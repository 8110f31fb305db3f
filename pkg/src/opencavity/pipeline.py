"""Glue from a RunConfig to the physics modules; shared by the CLI and reproduce."""
import numpy as np

from . import cavity, dbr, inhomogeneous, purcell
from .config import ConfigError
from .errors import DomainError


def strongest_peak(model):
    return max(model.zpl_peaks, key=lambda p: p.weight)


def resolve_lambda(cfg, target, fwhm, mode_volume, model=None, dipoles=None, grid=None):
    """Numeric wavelength for ``target`` in {float, 'peak', 'optimal'}."""
    model = cfg.emitter_model() if model is None else model
    if target == "peak":
        return strongest_peak(model).center
    if target == "optimal":
        dipoles = cfg.dipole_pair() if dipoles is None else dipoles
        grid = cfg.grid_array() if grid is None else grid
        return purcell.optimal_tuning(model, dipoles, fwhm, mode_volume,
                                      cfg.cavity.medium_index, grid)[0]
    return float(target)


def coupling(cfg, lambda_cav=None, cavity_fwhm=None):
    """CouplingResult for the configured (or overridden) cavity setting."""
    model, dipoles, grid = cfg.emitter_model(), cfg.dipole_pair(), cfg.grid_array()
    fwhm = cfg.coupling.cavity_fwhm_nm if cavity_fwhm is None else cavity_fwhm
    vol = cfg.mode_volume()
    target = cfg.coupling.lambda_cav_nm if lambda_cav is None else lambda_cav
    lc = resolve_lambda(cfg, target, fwhm, vol, model, dipoles, grid)
    filt = purcell.ModeFilter.from_linewidth(lc, fwhm, vol, cfg.cavity.medium_index)
    return purcell.couple(model, dipoles, filt, cfg.coupling.f_psb, grid)


def tuning(cfg, start=None, stop=None, step=None):
    t = cfg.tune
    if t is None and None in (start, stop, step):
        raise ConfigError(["tune: section missing and scan limits not given"])
    start = t.start_nm if start is None else start
    stop = t.stop_nm if stop is None else stop
    step = t.step_nm if step is None else step
    if step <= 0 or stop < start:
        raise DomainError("tuning scan needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    lcs = start + step * np.arange(n)
    vol = cfg.mode_volume()
    fwhm = cfg.coupling.cavity_fwhm_nm
    filters = [purcell.ModeFilter.from_linewidth(lc, fwhm, vol, cfg.cavity.medium_index)
               for lc in lcs]
    return purcell.tuning_scan(cfg.emitter_model(), cfg.dipole_pair(), filters,
                               cfg.grid_array(), t.window_nm if t else None)


def inhom_model(cfg, cavity_fwhm=None, spread=None, center=None):
    """InhomogeneousModel plus its F_ZPL curve at the configured mode volume."""
    blk = cfg.inhomogeneous
    fwhm = blk.cavity_fwhm_nm if cavity_fwhm is None else cavity_fwhm
    spread = blk.spread_fwhm_nm if spread is None else spread
    model, dipoles, grid = cfg.emitter_model(), cfg.dipole_pair(), cfg.grid_array()
    vol = cfg.mode_volume()
    target = blk.center_nm if center is None else center
    c = resolve_lambda(cfg, target, fwhm, vol, model, dipoles, grid)
    curve = purcell.f_zpl_curve(model, dipoles, fwhm, vol, cfg.cavity.medium_index, grid)
    return inhomogeneous.InhomogeneousModel(c, spread, curve)


def modes(cfg, band, max_order=4, linewidth="config"):
    """Annotated resonant modes in ``band``.

    ``linewidth='config'`` uses the configured cavity FWHM for every mode;
    ``'finesse'`` derives it from the mirror reflectivities at each wavelength.
    """
    geom = cfg.geometry()
    out = []
    planar, concave = cfg.planar(), cfg.concave()
    for md in cavity.resonant_wavelengths(geom, band, max_order):
        if linewidth == "finesse":
            r1 = dbr.reflectivity(planar, md.wavelength)[0]
            r2 = dbr.reflectivity(concave, md.wavelength)[0]
            fin = cavity.finesse_from_reflectivity(r1, r2)
            fwhm = cavity.linewidth_from_finesse(md.wavelength, geom.optical_length, fin)
        else:
            fwhm = cfg.coupling.cavity_fwhm_nm
        out.append(cavity.annotate(md, geom, fwhm))
    return geom, out
