"""Reference-value reproduction suite.

Each row compares one computed quantity against its reported or derived
reference value at a fixed tolerance. The report is a CSV with columns
``quantity,reference,computed,tolerance,status``.
"""
import csv
import math
from dataclasses import astuple, dataclass

import numpy as np

from . import analysis, cavity, dbr, dipole, inhomogeneous, pipeline, purcell
from .config import load_config

COLUMNS = ("quantity", "reference", "computed", "tolerance", "status")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    if isinstance(x, (tuple, list)):
        return "[" + " ".join(fmt(v) for v in x) + "]"
    return str(x)


@dataclass(frozen=True)
class Row:
    quantity: str
    reference: str
    computed: str
    tolerance: str
    status: str

    @property
    def passed(self):
        return self.status == "PASS"


def _row(quantity, reference, computed, tolerance, ok):
    return Row(quantity, fmt(reference), fmt(computed), tolerance, "PASS" if ok else "FAIL")


def abs_row(quantity, reference, computed, tol):
    return _row(quantity, reference, computed, f"+-{tol:g}", abs(computed - reference) <= tol)


def rel_row(quantity, reference, computed, rtol):
    return _row(quantity, reference, computed, f"+-{rtol:g} rel",
                abs(computed - reference) <= rtol * abs(reference))


def max_row(quantity, computed, limit):
    """``computed`` is an error measure that must not exceed ``limit``."""
    return _row(quantity, 0.0, computed, f"<= {limit:g}", computed <= limit)


def _saturation_error(i_sat, p_sat):
    p = np.geomspace(0.05, 20.0, 15)
    fit = analysis.fit_saturation(np.column_stack([p, analysis.saturation_model(p, i_sat, p_sat)]))
    return max(abs(fit.i_sat / i_sat - 1.0), abs(fit.p_sat / p_sat - 1.0))


def run(cfg=None):
    """Evaluate every row; returns a list of Row."""
    cfg = load_config() if cfg is None else cfg
    rows = []
    V = cfg.mode_volume()
    n_med = cfg.cavity.medium_index
    dw = cfg.emitter.debye_waller
    f_psb = cfg.coupling.f_psb
    pair = cfg.dipole_pair()
    n2, n3 = pair.branching

    # Purcell maxima
    f_eff = cavity.f_max(637.0, n_med, 637.0 / 1.1, V)
    f_hi = cavity.f_max(637.0, n_med, 637.0 / 0.3, V)
    rows.append(abs_row("f_max effective Q (637/1.1)", 9.2, f_eff, 0.1))
    rows.append(abs_row("f_max high Q (637/0.3)", 33.6, f_hi, 0.2))

    # ZPL coupling and rate budget
    res = pipeline.coupling(cfg)
    rows.append(abs_row("F_ZPL at peak 3", 0.25, res.f_zpl, 0.04))
    rows.append(abs_row("total rate with F_ZPL = 0.25", 1.14, purcell.total_rate(0.25, f_psb, dw), 0.01))
    rows.append(abs_row("total rate high Q", 1.71, purcell.total_rate(f_hi * dw * n3, f_psb, dw), 0.02))

    # inhomogeneous broadening
    inh = pipeline.inhom_model(cfg)
    rows.append(abs_row("f_inhom (0.2 nm cavity, 0.5 nm spread)", 0.364, inhomogeneous.f_inhom(inh), 0.03))

    # thermal weighting and dipole geometry
    rows.append(abs_row("thermal ratio (1.5 meV, 77 K)", 0.80, pair.thermal_ratio, 0.01))
    rows.append(abs_row("branching n2", 0.44, n2, 0.01))
    rows.append(abs_row("branching n3", 0.56, n3, 0.01))
    if cfg.dipoles.measured_ratio is not None:
        R = dipole.equivalent_circle_ratio(cfg.dipoles.measured_ratio, pair.thermal_ratio)
    else:
        x2, y2 = dipole.projected_intensities(pair.theta, pair.beta)
        R = x2 / y2
    rows.append(abs_row("equivalent-circle ratio R", 0.73, R, 0.01))
    phi = pair.phi
    rows.append(abs_row("phi peak 2 (deg)", 39.0, phi[0], 1.0))
    rows.append(abs_row("phi peak 3 (deg)", 24.6, phi[1], 1.0))
    c2 = math.cos(math.radians(49.0)) ** 2
    rows.append(abs_row("polar angle round trip (deg)", 49.0, dipole.polar_from_extrema(c2, 1.0), 0.1))

    # mode volume
    planar, concave = cfg.planar(), cfg.concave()
    pen = (dbr.penetration_depth(planar, 637.0) * 1e-3, dbr.penetration_depth(concave, 637.0) * 1e-3)
    c = cfg.cavity
    v_tmm = cavity.mode_volume_gaussian(cavity.CavityGeometry(c.roc_um, c.gap_um, pen, n_med), 637.0)
    v_bare = cavity.mode_volume_gaussian(cavity.CavityGeometry(c.roc_um, c.gap_um, (0.0, 0.0), n_med), 637.0)
    rows.append(rel_row("mode volume with penetration (um^3)", 1.24, v_tmm, 0.15))
    rows.append(abs_row("mode volume bare gap (um^3)", 0.474, v_bare, 1e-3))

    # mirror stack
    r_conc = dbr.reflectivity(concave, 637.0)[0]
    rows.append(_row("concave mirror R at 637 nm", "> 0.9999", r_conc, "bound", r_conc > 0.9999))
    band = dbr.stop_band(concave, (500.0, 800.0), 0.99)
    ok = band is not None and band[0] <= 580.0 and band[1] >= 695.0
    rows.append(_row("stop band R >= 0.99 contains [580 695] nm", (580.0, 695.0),
                     tuple(band) if band else "none", "containment", ok))

    # standing wave
    prof = dbr.cavity_field_profile(planar, c.gap_um * 1e3, concave, 637.0)
    n_int = dbr.antinode_count(prof, prof.regions["gap"])
    rows.append(_row("interior antinodes in gap", 3, n_int, "exact", n_int == 3))
    surf = dbr.antinode_near(prof, 0.0)
    rows.append(_row("antinode at planar surface", True, surf, "exact", surf))

    # lifetime and antibunching arithmetic
    rows.append(abs_row("rate change 30.8 / 22.1 ns (%)", 39.4, analysis.rate_change(30.8, 22.1), 0.2))
    rows.append(abs_row("single-emitter fraction g2 = 0.05", 0.975, analysis.single_emitter_fraction(0.05), 0.001))

    # saturation round trips
    rows.append(max_row("saturation round trip (15.1 kc/s, 1.89 mW)", _saturation_error(15.1e3, 1.89), 1e-6))
    rows.append(max_row("saturation round trip (154 kc/s, 1.02 mW)", _saturation_error(154e3, 1.02), 1e-6))

    # internal consistency properties
    per_dipole = sum(res.per_dipole_f_zpl)
    rows.append(max_row("factorised vs per-dipole F_ZPL (rel)",
                        abs(per_dipole - res.f_zpl) / res.f_zpl, 1e-10))
    gamma0 = cfg.inhomogeneous.gamma0_per_ns
    rows.append(max_row("decay slope vs closed-form f_inhom (rel)",
                        inhomogeneous.slope_consistency(inh, gamma0)["relative_discrepancy"], 1e-3))
    wl = np.linspace(500.0, 800.0, 301)
    Rs, _, Ts = dbr.reflectivity_sweep(concave, wl)
    rows.append(max_row("transfer matrix |R + T - 1|", float(np.max(np.abs(Rs + Ts - 1.0))), 1e-9))
    narrow = inhomogeneous.InhomogeneousModel(inh.center, 1e-5, inh.f_zpl_curve)
    f_c = inh.F([inh.center])[0]
    rows.append(max_row("f_inhom narrow-spread limit (rel)",
                        abs(inhomogeneous.f_inhom(narrow) - f_c) / f_c, 1e-6))
    return rows


def write_report(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow(astuple(r))


def read_report(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: not a reproduction report")
        rows = []
        for i, rec in enumerate(reader, start=2):
            if len(rec) != len(COLUMNS) or rec[4] not in ("PASS", "FAIL"):
                raise ValueError(f"{path}:{i}: malformed row")
            rows.append(Row(*rec))
    return rows


def format_table(rows):
    widths = [max(len(c), *(len(getattr(r, c)) for r in rows)) for c in COLUMNS]
    line = "  ".join(c.ljust(w) for c, w in zip(COLUMNS, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    for r in rows:
        out.append("  ".join(v.ljust(w) for v, w in zip(astuple(r), widths)))
    return "\n".join(out)
