"""Command-line front end: ``opencavity <command> [options]``.

Every command reads one configuration (the bundled reference set by default),
writes its outputs into the output directory and prints a JSON summary.
Exit status: 0 success, 2 invalid input, 3 computation error, 4 reproduction
rows failed.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, dbr, dipole, inhomogeneous, pipeline, reproduce
from .cavity import mode_volume_gaussian, rayleigh_range, write_modes_csv
from .config import ConfigError, load_config
from .errors import DomainError, OpenCavityError

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_REPRODUCE = 0, 2, 3, 4


def round9(obj):
    """Recursively round floats to 9 significant digits for stable output."""
    if isinstance(obj, dict):
        return {k: round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round9(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.9g}") if math.isfinite(x) else str(x)
    return obj


def dump_json(obj, path=None):
    text = json.dumps(round9(obj), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


class InputError(OpenCavityError):
    """Bad command-line input (missing data file, malformed CSV)."""


def _outdir(args, cfg):
    out = cfg.resolve_output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{p}: no such file")
    return p


# commands ------------------------------------------------------------


def cmd_modes(args, cfg):
    lo, hi = args.band
    geom, modes = pipeline.modes(cfg, (lo, hi), args.max_order, args.linewidth)
    out = _outdir(args, cfg)
    write_modes_csv(modes, out / "modes.csv")
    summary = {"optical_length_um": geom.optical_length, "penetration_um": list(geom.penetration),
               "rayleigh_range_um": rayleigh_range(geom), "gouy_phase_rad": geom.gouy_phase(),
               "mode_volume_00_um3": mode_volume_gaussian(geom, args.wavelength),
               "mode_count": len(modes)}
    return summary, out / "modes.json"


def cmd_mirror(args, cfg):
    block = getattr(cfg.mirrors, args.which)
    stack, lam0 = block.build(), block.pairs.lambda0_nm
    lo, hi = args.band
    wl = np.arange(lo, hi + 0.5 * args.step, args.step)
    out = _outdir(args, cfg)
    dbr.write_sweep_csv(stack, wl, out / f"mirror_{args.which}.csv")
    R, phase = dbr.reflectivity(stack, lam0)
    band = dbr.stop_band(stack, (lo, hi), args.threshold, args.step)
    summary = {"mirror": args.which, "pairs": stack.meta.get("pairs"), "lambda0_nm": lam0,
               "R": R, "phase_rad": phase, "transmittance": dbr.transmittance(stack, lam0),
               "stop_band_nm": list(band) if band else None, "threshold": args.threshold,
               "penetration_nm": dbr.penetration_depth(stack, lam0)}
    return summary, out / f"mirror_{args.which}.json"


def cmd_dipole(args, cfg):
    d = cfg.dipoles
    if args.polarization:
        angles, p2, p3 = dipole.read_polarization_csv(_require_file(args.polarization))
        summary = dipole.analyse_polarization(angles, p2, p3, d.delta_e_mev, d.temperature_k)
    else:
        summary = cfg.dipole_pair().summary()
    return summary, _outdir(args, cfg) / "dipole.json"


def cmd_enhance(args, cfg):
    res = pipeline.coupling(cfg, lambda_cav=args.lambda_cav, cavity_fwhm=args.cavity_fwhm)
    return res.to_dict(), _outdir(args, cfg) / "enhance.json"


def cmd_tune(args, cfg):
    scan = pipeline.tuning(cfg, args.start, args.stop, args.step)
    out = _outdir(args, cfg)
    scan.write(out / "tune.csv", out / "tune.json")
    return {"steps": int(scan.lambda_cav.size), "lambda_cav_nm": scan.lambda_cav.tolist(),
            "f_zpl": scan.f_zpl.tolist()}, None


def cmd_inhom(args, cfg):
    if cfg.inhomogeneous is None:
        raise ConfigError(["inhomogeneous: section missing"])
    model = pipeline.inhom_model(cfg, args.cavity_fwhm, args.spread, args.center)
    out = _outdir(args, cfg)
    summary = {"center_nm": model.center, "spread_fwhm_nm": model.fwhm,
               "f_zpl_resonant": float(model.F([model.center])[0]),
               "f_inhom": inhomogeneous.f_inhom(model),
               "gamma_ratio": inhomogeneous.gamma_ratio(model)}
    if args.decay:
        blk = cfg.inhomogeneous
        t = np.arange(0.0, blk.t_max_ns + 0.5 * blk.t_step_ns, blk.t_step_ns)
        inten = inhomogeneous.decay_curve(model, blk.gamma0_per_ns, t)
        with open(out / "decay.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("t_ns,intensity\n")
            for a, b in zip(t, inten):
                fh.write(f"{a:.9g},{b:.9g}\n")
    return summary, out / "inhom.json"


def cmd_fit_sat(args, cfg):
    data = analysis.read_xy_csv(_require_file(args.data), ("power_mW", "counts_per_s"))
    return analysis.fit_saturation(data).to_dict(), _outdir(args, cfg) / "fit_sat.json"


def cmd_fit_decay(args, cfg):
    data = analysis.read_xy_csv(_require_file(args.data), ("t_ns", "counts"))
    fit = analysis.fit_exponential(data, with_baseline=args.baseline)
    return fit.to_dict(), _outdir(args, cfg) / "fit_decay.json"


def cmd_reproduce(args, cfg):
    rows = reproduce.run(cfg)
    out = _outdir(args, cfg)
    reproduce.write_report(rows, out / "reproduce.csv")
    failed = [r.quantity for r in rows if not r.passed]
    print(reproduce.format_table(rows), file=sys.stderr)
    return {"rows": len(rows), "passed": len(rows) - len(failed), "failed": failed}, None


# parser --------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (default: bundled reference set)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration entry, e.g. emitter.debye_waller=0.05")
    common.add_argument("--out", help="output directory (else $OPENCAVITY_OUTPUT_DIR, else config)")

    p = argparse.ArgumentParser(prog="opencavity", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("modes", parents=[common], help="resonant TEM(q,m,n) modes")
    s.add_argument("--band", nargs=2, type=float, default=(600.0, 680.0), metavar=("LO", "HI"))
    s.add_argument("--max-order", type=int, default=4)
    s.add_argument("--linewidth", choices=("config", "finesse"), default="config")
    s.add_argument("--wavelength", type=float, default=637.0, help="wavelength for the summary V00")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("mirror", parents=[common], help="mirror reflectivity sweep")
    s.add_argument("--which", choices=("planar", "concave"), default="concave")
    s.add_argument("--band", nargs=2, type=float, default=(500.0, 800.0), metavar=("LO", "HI"))
    s.add_argument("--step", type=float, default=0.1)
    s.add_argument("--threshold", type=float, default=0.99)
    s.set_defaults(func=cmd_mirror)

    s = sub.add_parser("dipole", parents=[common], help="dipole orientation and weighting")
    s.add_argument("--polarization", help="CSV angle_deg,intensity_peak2,intensity_peak3")
    s.set_defaults(func=cmd_dipole)

    s = sub.add_parser("enhance", parents=[common], help="ZPL Purcell coupling at one cavity setting")
    s.add_argument("--lambda-cav", type=_lambda_arg, help="nm, 'peak' or 'optimal'")
    s.add_argument("--cavity-fwhm", type=float)
    s.set_defaults(func=cmd_enhance)

    s = sub.add_parser("tune", parents=[common], help="cavity spectra across a tuning scan")
    s.add_argument("--start", type=float)
    s.add_argument("--stop", type=float)
    s.add_argument("--step", type=float)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("inhom", parents=[common], help="rate enhancement with cavity jitter")
    s.add_argument("--cavity-fwhm", type=float)
    s.add_argument("--spread", type=float, help="Gaussian FWHM of the cavity position (nm)")
    s.add_argument("--center", type=_lambda_arg)
    s.add_argument("--decay", action="store_true", help="also write decay.csv")
    s.set_defaults(func=cmd_inhom)

    s = sub.add_parser("fit-sat", parents=[common], help="saturation fit of power_mW,counts_per_s")
    s.add_argument("data")
    s.set_defaults(func=cmd_fit_sat)

    s = sub.add_parser("fit-decay", parents=[common], help="exponential fit of t_ns,counts")
    s.add_argument("data")
    s.add_argument("--baseline", action="store_true")
    s.set_defaults(func=cmd_fit_decay)

    s = sub.add_parser("reproduce", parents=[common], help="run the reference reproduction suite")
    s.set_defaults(func=cmd_reproduce)
    return p


def _lambda_arg(text):
    if text in ("peak", "optimal"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a wavelength in nm, 'peak' or 'optimal'") from None


def _fail(kind, messages, code):
    sys.stderr.write(json.dumps({"error": kind, "messages": list(messages), "exit_code": code}) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        return _fail("configuration", exc.problems, EXIT_INPUT)
    try:
        summary, path = args.func(args, cfg)
    except ConfigError as exc:
        return _fail("configuration", exc.problems, EXIT_INPUT)
    except (InputError, DomainError) as exc:
        return _fail(type(exc).__name__, [str(exc)], EXIT_INPUT)
    except (OpenCavityError, ArithmeticError, ValueError) as exc:
        return _fail(type(exc).__name__, [str(exc)], EXIT_COMPUTE)
    sys.stdout.write(dump_json(summary, path))
    if args.command == "reproduce" and summary["failed"]:
        return EXIT_REPRODUCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
