import pytest
import yaml

from opencavity.config import ConfigError, default_config_path, load_config


def test_bundled_config_loads(cfg):
    assert cfg.emitter.debye_waller == 0.044
    model = cfg.emitter_model()
    assert sum(p.weight for p in model.zpl_peaks) == pytest.approx(0.044)
    assert cfg.planar().meta["pairs"] == 8
    assert cfg.mode_volume() == 1.24


def test_every_key_has_a_comment():
    lines = default_config_path().read_text().splitlines()
    keyed = [ln for ln in lines if ":" in ln and not ln.strip().startswith(("#", "-"))]
    leaves = [ln for ln in keyed if not ln.rstrip().endswith(":")]
    # value lines either carry their own note or sit in a commented block
    uncommented = [ln for ln in leaves if "#" not in ln]
    assert len(uncommented) < len(leaves) / 2


def write(tmp_path, doc):
    p = tmp_path / "c.config"
    p.write_text(yaml.safe_dump(doc))
    return p


def base_doc():
    return yaml.safe_load(default_config_path().read_text())


def test_all_problems_reported_at_once(tmp_path):
    doc = base_doc()
    doc["cavity"]["gap_mm"] = 1.0
    doc["emitter"]["debye_waller"] = 1.5
    doc["dipoles"]["theta_deg"] = "steep"
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, doc))
    locs = " ".join(err.value.problems)
    assert "cavity.gap_mm" in locs and "emitter.debye_waller" in locs and "dipoles.theta_deg" in locs


def test_missing_psb_file_fails_fast(tmp_path):
    doc = base_doc()
    doc["emitter"]["psb"] = {"file": "missing.csv"}
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, doc))
    assert "emitter.psb.file" in err.value.problems[0]


def test_tabulated_psb_relative_to_config(tmp_path):
    import numpy as np
    from opencavity.spectrum import SampledSpectrum
    wl = np.linspace(640.0, 800.0, 200)
    SampledSpectrum(wl, np.exp(-0.5 * ((wl - 700) / 20) ** 2)).to_csv(tmp_path / "psb.csv")
    doc = base_doc()
    doc["emitter"]["psb"] = {"file": "psb.csv"}
    cfg = load_config(write(tmp_path, doc))
    assert cfg.emitter_model().psb.wavelengths[0] == 640.0


def test_overrides_apply_and_validate():
    cfg = load_config(overrides=["emitter.debye_waller=0.05", "coupling.lambda_cav_nm=636.9"])
    assert cfg.emitter.debye_waller == 0.05 and cfg.coupling.lambda_cav_nm == 636.9
    with pytest.raises(ConfigError):
        load_config(overrides=["nonsense"])
    with pytest.raises(ConfigError):
        load_config(overrides=["cavity.roc_um=-1"])


def test_exclusive_choices(tmp_path):
    doc = base_doc()
    doc["dipoles"]["beta_deg"] = 50.0
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, doc))


def test_missing_file_and_bad_yaml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.config")
    bad = tmp_path / "bad.config"
    bad.write_text("cavity: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_auto_penetration(cfg):
    auto = load_config(overrides=["cavity.penetration_um=auto"])
    a, b = auto.geometry().penetration
    assert a == pytest.approx(0.6595, abs=1e-3) and b == pytest.approx(0.2746, abs=1e-3)
    assert cfg.geometry().optical_length == pytest.approx(2.25)


def test_output_dir_env(cfg, monkeypatch, tmp_path):
    monkeypatch.setenv("OPENCAVITY_OUTPUT_DIR", str(tmp_path))
    assert cfg.resolve_output_dir() == tmp_path
    assert str(cfg.resolve_output_dir("x")) == "x"
