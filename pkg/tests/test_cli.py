import json

import numpy as np
import pytest

from opencavity import cli, reproduce


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enhance_reports_coupling(tmp_path, capsys):
    code, out, _ = run(capsys, "enhance", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "enhance.json").read_text())
    assert data == json.loads(out)
    assert data["f_total"] == pytest.approx(data["f_zpl"] + 0.956 * 0.93, rel=1e-8)
    assert len(data["per_peak_enhancement"]) == 2


def test_commands_are_deterministic(tmp_path, capsys):
    for sub in ("a", "b"):
        for cmd in (["enhance"], ["mirror"], ["modes"], ["dipole"], ["inhom", "--decay"],
                    ["tune", "--start", "636", "--stop", "637", "--step", "0.5"]):
            assert run(capsys, *cmd, "--out", str(tmp_path / sub))[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_tune_two_steps_gives_two_rows(tmp_path, capsys):
    code, _, _ = run(capsys, "tune", "--start", "636.5", "--stop", "637.0", "--step", "0.5", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "tune.csv").read_text().splitlines()
    assert len(rows) == 3 and rows[0].startswith("lambda_cav_nm,")
    side = json.loads((tmp_path / "tune.json").read_text())
    assert len(side["f_zpl"]) == 2


def test_floats_have_nine_significant_digits(tmp_path, capsys):
    run(capsys, "enhance", "--out", str(tmp_path))
    text = (tmp_path / "enhance.json").read_text()
    for tok in text.replace(",", " ").replace("[", " ").replace("]", " ").split():
        if any(c.isdigit() for c in tok) and "." in tok and '"' not in tok:
            mant = tok.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
            assert len(mant) <= 9


def test_validation_error_exit_and_json(tmp_path, capsys):
    code, _, err = run(capsys, "enhance", "--out", str(tmp_path), "--set", "cavity.bogus=1",
                       "--set", "emitter.debye_waller=3")
    assert code == 2
    payload = json.loads(err)
    assert payload["exit_code"] == 2 and len(payload["messages"]) == 2


def test_missing_data_file_is_input_error(tmp_path, capsys):
    code, _, err = run(capsys, "fit-sat", str(tmp_path / "none.csv"), "--out", str(tmp_path))
    assert code == 2 and "no such file" in json.loads(err)["messages"][0]


def test_unstable_geometry_is_domain_error(tmp_path, capsys):
    code, _, err = run(capsys, "modes", "--set", "cavity.roc_um=1.0", "--out", str(tmp_path))
    assert code == 2 and json.loads(err)["error"] == "InstabilityError"


def test_solver_failure_is_computation_error(tmp_path, capsys, monkeypatch):
    from opencavity import pipeline
    from opencavity.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr(pipeline, "coupling", boom)
    code, _, err = run(capsys, "enhance", "--out", str(tmp_path))
    assert code == 3 and json.loads(err)["exit_code"] == 3


def test_fit_commands(tmp_path, capsys):
    p = np.geomspace(0.05, 20.0, 12)
    sat = tmp_path / "sat.csv"
    sat.write_text("power_mW,counts_per_s\n" + "".join(f"{a},{154e3 * a / (1.02 + a)}\n" for a in p))
    code, out, _ = run(capsys, "fit-sat", str(sat), "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["p_sat"] == pytest.approx(1.02, rel=1e-6)
    t = np.arange(0, 100, 1.0)
    dec = tmp_path / "dec.csv"
    dec.write_text("t_ns,counts\n" + "".join(f"{a},{900 * np.exp(-a / 22.1) + 5}\n" for a in t))
    code, out, _ = run(capsys, "fit-decay", str(dec), "--baseline", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["tau"] == pytest.approx(22.1, rel=1e-6)


def test_dipole_from_polarization(tmp_path, capsys):
    from opencavity import dipole
    ang = np.arange(0, 180, 5.0)
    p2, p3 = dipole.simulate_polarization(49.0, 56.7, dipole.thermal_ratio(1.5, 77.0), ang)
    path = tmp_path / "pol.csv"
    path.write_text("angle_deg,intensity_peak2,intensity_peak3\n"
                    + "".join(f"{a},{b},{c}\n" for a, b, c in zip(ang, p2, p3)))
    code, out, _ = run(capsys, "dipole", "--polarization", str(path), "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["theta_deg"] == pytest.approx(49.0, abs=1e-6)


def test_output_dir_from_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("OPENCAVITY_OUTPUT_DIR", str(tmp_path / "env"))
    assert run(capsys, "dipole")[0] == 0
    assert (tmp_path / "env" / "dipole.json").exists()


def test_inputs_not_mutated(tmp_path, capsys):
    sat = tmp_path / "sat.csv"
    sat.write_text("power_mW,counts_per_s\n0.5,100\n1,150\n2,200\n4,240\n")
    before = sat.read_bytes()
    run(capsys, "fit-sat", str(sat), "--out", str(tmp_path / "o"))
    assert sat.read_bytes() == before


def test_reproduce_report_round_trip(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "--out", str(tmp_path))
    rows = reproduce.read_report(tmp_path / "reproduce.csv")
    assert len(rows) >= 12
    summary = json.loads(out)
    assert summary["rows"] == len(rows)
    assert code == (4 if summary["failed"] else 0)


def test_reproduce_negative_control(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "--set", "emitter.debye_waller=0.44", "--out", str(tmp_path))
    assert code == 4
    rows = {r.quantity: r for r in reproduce.read_report(tmp_path / "reproduce.csv")}
    assert rows["F_ZPL at peak 3"].status == "FAIL"
