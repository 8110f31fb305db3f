"""Run configuration: one YAML document with a section per module.

Validation collects every problem before raising, each tagged with its key
path (``emitter.zpl.peaks.0.fwhm_nm``).
"""
import os
from importlib import resources
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import cavity, dbr, dipole, spectrum
from .errors import OpenCavityError

OUTPUT_ENV = "OPENCAVITY_OUTPUT_DIR"


class ConfigError(OpenCavityError):
    """Invalid configuration; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PairsBlock(_Strict):
    nH: float = Field(gt=1)
    nL: float = Field(ge=1)
    count: Union[int, Literal["auto"]] = 20
    lambda0_nm: float = Field(default=637.0, gt=0)
    order: Literal["HL", "LH"] = "HL"
    target_R: float = Field(default=0.997, gt=0, lt=1)


class StackBlock(_Strict):
    ambient: float = Field(default=1.0, ge=1)
    substrate: float = Field(default=dbr.SILICA, ge=1)
    pairs: PairsBlock
    extra_layers: List[Tuple[float, float]] = []

    def build(self):
        p = self.pairs
        first, second = (p.nH, p.nL) if p.order == "HL" else (p.nL, p.nH)
        count = p.count
        if count == "auto":
            count = dbr.pair_count_for(p.target_R, first, second, p.lambda0_nm,
                                       ambient=self.ambient, substrate=self.substrate)
        return dbr.LayerStack.quarter_wave(first, second, count, p.lambda0_nm, self.ambient,
                                           self.substrate, self.extra_layers)


class MirrorsBlock(_Strict):
    planar: StackBlock
    concave: StackBlock
    nanodiamond: Optional[Tuple[float, float]] = None


class CavityBlock(_Strict):
    roc_um: float = Field(gt=0)
    gap_um: float = Field(gt=0)
    penetration_um: Union[Tuple[float, float], Literal["auto"]] = "auto"
    medium_index: float = Field(default=1.0, ge=1)


class PeakBlock(_Strict):
    center_nm: float = Field(gt=0)
    fwhm_nm: float = Field(gt=0)
    weight: float = Field(ge=0)


class ZplBlock(_Strict):
    peaks: List[PeakBlock] = Field(min_length=1)
    window_nm: Optional[Tuple[float, float]] = None


class ReplicaBlock(_Strict):
    count: int = Field(default=4, ge=1)
    spacing_mev: float = Field(default=65.0, gt=0)
    base_fwhm_mev: float = Field(default=10.0, gt=0)
    growth: float = Field(default=2.0, gt=0)


class PsbBlock(_Strict):
    file: Optional[str] = None
    replicas: Optional[ReplicaBlock] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.file is None) == (self.replicas is None):
            raise ValueError("give exactly one of 'file' or 'replicas'")
        return self


class EmitterBlock(_Strict):
    zpl: ZplBlock
    psb: PsbBlock = PsbBlock(replicas=ReplicaBlock())
    debye_waller: float = Field(gt=0, le=1)


class DipoleBlock(_Strict):
    theta_deg: float = Field(ge=0, le=90)
    beta_deg: Optional[float] = Field(default=None, ge=0, le=90)
    measured_ratio: Optional[float] = Field(default=None, gt=0)
    delta_e_mev: float = Field(ge=0)
    temperature_k: float = Field(gt=0)
    phi_override_deg: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _one_azimuth(self):
        if (self.beta_deg is None) == (self.measured_ratio is None):
            raise ValueError("give exactly one of 'beta_deg' or 'measured_ratio'")
        return self


class CouplingBlock(_Strict):
    cavity_fwhm_nm: float = Field(gt=0)
    lambda_cav_nm: Union[float, Literal["peak", "optimal"]] = "peak"
    mode_volume_um3: Union[float, Literal["auto"]] = "auto"
    f_psb: float = Field(default=1.0, ge=0)


class TuneBlock(_Strict):
    start_nm: float
    stop_nm: float
    step_nm: float = Field(gt=0)
    window_nm: Optional[Tuple[float, float]] = None


class InhomBlock(_Strict):
    cavity_fwhm_nm: float = Field(gt=0)
    spread_fwhm_nm: float = Field(ge=0)
    center_nm: Union[float, Literal["peak", "optimal"]] = "peak"
    gamma0_per_ns: float = Field(gt=0)
    t_max_ns: float = Field(default=150.0, gt=0)
    t_step_ns: float = Field(default=0.5, gt=0)


class GridBlock(_Strict):
    start_nm: float = 625.0
    stop_nm: float = 850.0
    step_nm: float = Field(default=0.02, gt=0)


class RunConfig(_Strict):
    cavity: CavityBlock
    mirrors: MirrorsBlock
    emitter: EmitterBlock
    dipoles: DipoleBlock
    coupling: CouplingBlock
    tune: Optional[TuneBlock] = None
    inhomogeneous: Optional[InhomBlock] = None
    grid: GridBlock = GridBlock()
    output_dir: str = "out"

    # derived objects -------------------------------------------------

    def grid_array(self):
        g = self.grid
        return spectrum.default_grid(g.start_nm, g.stop_nm, g.step_nm)

    def planar(self):
        return self.mirrors.planar.build()

    def concave(self):
        return self.mirrors.concave.build()

    def auto_penetration_um(self, wavelength=637.0):
        return (dbr.penetration_depth(self.planar(), wavelength) * 1e-3,
                dbr.penetration_depth(self.concave(), wavelength) * 1e-3)

    def geometry(self):
        c = self.cavity
        pen = c.penetration_um
        if pen == "auto":
            pen = self.auto_penetration_um()
        return cavity.CavityGeometry(c.roc_um, c.gap_um, pen, c.medium_index)

    def dipole_pair(self):
        d = self.dipoles
        if d.beta_deg is not None:
            return dipole.DipolePair(d.theta_deg, d.beta_deg, d.delta_e_mev, d.temperature_k,
                                     d.phi_override_deg)
        return dipole.DipolePair.from_measurement(d.theta_deg, d.measured_ratio, d.delta_e_mev,
                                                  d.temperature_k, d.phi_override_deg)

    def emitter_model(self):
        e = self.emitter
        dw = e.debye_waller
        rel = [p.weight for p in e.zpl.peaks]
        total = sum(rel)
        if total <= 0:
            raise ConfigError(["emitter.zpl.peaks: relative weights sum to zero"])
        peaks = tuple(spectrum.GaussianPeak(p.center_nm, p.fwhm_nm, dw * p.weight / total)
                      for p in e.zpl.peaks)
        if dw >= 1:
            psb = None
        elif e.psb.file is not None:
            psb = spectrum.SampledSpectrum.from_csv(self._resolve(e.psb.file))
        else:
            r = e.psb.replicas
            psb = spectrum.phonon_replicas(max(p.center for p in peaks), dw, r.count, r.spacing_mev,
                                           r.base_fwhm_mev, r.growth)
        return spectrum.EmitterModel(peaks, psb, dw, e.zpl.window_nm)

    def mode_volume(self, wavelength=637.0):
        v = self.coupling.mode_volume_um3
        if v == "auto":
            return cavity.mode_volume_gaussian(self.geometry(), wavelength)
        return float(v)

    def _resolve(self, path):
        p = Path(path)
        if not p.is_absolute() and getattr(self, "_base_dir", None) is not None:
            p = Path(self._base_dir) / p
        return p

    def resolve_output_dir(self, override=None):
        return Path(override or os.environ.get(OUTPUT_ENV) or self.output_dir)


def _format_errors(exc):
    out = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


def _set_path(doc, dotted, value):
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        if isinstance(node, list):
            node = node[int(k)]
        else:
            node = node.setdefault(k, {})
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def apply_overrides(doc, overrides):
    """Apply ``key.path=value`` strings (values parsed as YAML scalars)."""
    problems = []
    for item in overrides or ():
        if "=" not in item:
            problems.append(f"override '{item}': expected key.path=value")
            continue
        key, raw = item.split("=", 1)
        try:
            _set_path(doc, key.strip(), yaml.safe_load(raw))
        except (ValueError, IndexError, TypeError, AttributeError) as exc:
            problems.append(f"override '{item}': {exc}")
    return problems


def default_config_path():
    return resources.files("opencavity") / "data" / "reference.config"


def load_config(path=None, overrides=None):
    """Parse, override and validate a configuration; raise ConfigError listing all problems."""
    src = Path(path) if path is not None else Path(str(default_config_path()))
    try:
        text = src.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"{src}: {exc.strerror or exc}"]) from None
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"{src}: YAML error: {exc}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError([f"{src}: top level must be a mapping"])
    problems = apply_overrides(doc, overrides)
    cfg = None
    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as exc:
        problems.extend(_format_errors(exc))
    if cfg is not None:
        object.__setattr__(cfg, "_base_dir", str(src.parent))
        psb_file = cfg.emitter.psb.file
        if psb_file is not None:
            p = cfg._resolve(psb_file)
            if not p.exists():
                problems.append(f"emitter.psb.file: {p} does not exist")
            else:
                try:
                    spectrum.SampledSpectrum.from_csv(p)
                except (OpenCavityError, ValueError) as exc:
                    problems.append(f"emitter.psb.file: {exc}")
        if not problems:
            try:
                cfg.emitter_model()
            except (OpenCavityError, ValueError) as exc:
                problems.append(f"emitter: {exc}")
    if problems:
        raise ConfigError(problems)
    return cfg
