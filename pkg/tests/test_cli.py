import json

import numpy as np
import pytest

from critmix.cli import main
from critmix.solved_bank import load_bank


@pytest.fixture(scope="module")
def bank_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bank51")
    rc = main(["bank", "--config", "methane_h2s_51_49", "--out", str(out),
               "--no-figures"])
    assert rc == 0
    return out


def test_demo1d_stdout(capsys):
    assert main(["demo1d", "1", "-2", "3"]) == 0
    out = capsys.readouterr().out
    assert "3 solution(s)" in out
    assert "-1.532089" in out and "1.879385" in out
    assert "2 solution(s)" in out
    assert "1 solution(s): 2.103803" in out


def test_demo1d_writes_csv_and_figure(tmp_path):
    assert main(["demo1d", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "demo1d.csv").read_text().splitlines()[0] == "q,p"
    assert (tmp_path / "demo1d.png").stat().st_size > 0


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["invert", "--config", str(tmp_path / "none.json"),
                 "--out", str(tmp_path)]) == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({
        "components": [
            {"name": "a", "Tc_K": 300.0, "Pc_kPa": 5000.0, "omega": 0.1},
            {"name": "b", "Tc_K": 200.0, "Pc_kPa": 4000.0, "omega": 0.05}],
        "z": [0.5, 0.5],
        "box": {"V_min": 5e-5, "V_max": 5e-4, "T_min": 150.0, "T_max": 350.0},
        "volume_units": "liters"}))
    assert main(["invert", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_empty_bank_exits_3(tmp_path):
    bank = tmp_path / "bank.json"
    bank.write_text(json.dumps({"provenance": {}, "entries": []}))
    assert main(["invert", "--config", "methane_h2s_52_48", "--bank", str(bank),
                 "--out", str(tmp_path), "--no-figures"]) == 3


def test_bank_model_mismatch_exits_3(tmp_path, bank_dir):
    assert main(["invert", "--config", "ethane_methane_90_10",
                 "--bank", str(bank_dir / "bank.json"),
                 "--out", str(tmp_path), "--no-figures"]) == 3


def test_bank_then_reuse_for_other_composition(tmp_path, bank_dir):
    out = tmp_path / "invert52"
    rc = main(["invert", "--config", "methane_h2s_52_48",
               "--bank", str(bank_dir / "bank.json"), "--out", str(out),
               "--no-figures"])
    assert rc == 0
    doc = json.loads((out / "results.json").read_text())
    assert len(doc["results"]) == 2
    temps = sorted(r["Tc_K"] for r in doc["results"])
    assert temps[0] == pytest.approx(253.4921, abs=1e-2)
    assert temps[1] == pytest.approx(268.3496, abs=1e-2)
    # path CSVs carry the documented columns
    path_csv = sorted(out.glob("path_*.csv"))[0].read_text().splitlines()
    assert path_csv[0] == "leg,step,F1,F2,V,T,detJ_sign"


def test_invert_is_deterministic(tmp_path, bank_dir):
    outs = []
    for d in ("a", "b"):
        out = tmp_path / d
        rc = main(["invert", "--config", "methane_h2s_52_48",
                   "--bank", str(bank_dir / "bank.json"), "--out", str(out),
                   "--no-figures"])
        assert rc == 0
        outs.append((out / "results.json").read_bytes())
    assert outs[0] == outs[1]


def test_solve_runs_both_reference_solvers(tmp_path):
    out = tmp_path / "solve"
    rc = main(["solve", "--config", "ethane_methane_90_10", "--out", str(out),
               "--seed", "1.7e-4,302", "--no-figures"])
    assert rc == 0
    doc = json.loads((out / "results.json").read_text())
    solvers = {r["solver"] for r in doc["results"]}
    assert solvers == {"hk_double_loop", "newton_2x2"}
    for r in doc["results"]:
        assert r["Tc_K"] == pytest.approx(299.1766, abs=1e-3)


def test_critset_outputs(tmp_path):
    out = tmp_path / "critset"
    rc = main(["critset", "--config", "ethane_methane_90_10", "--out", str(out),
               "--grid", "61x61"])
    assert rc == 0
    sign_csv = (out / "sign_grid.csv").read_text().splitlines()
    assert sign_csv[0] == "V,T,detJ"
    assert len(sign_csv) == 61 * 61 + 1
    curves = json.loads((out / "curves.json").read_text())["curves"]
    assert curves
    assert (out / "curve_000.csv").read_text().splitlines()[0] == "V,T,detJ"
    assert (out / "critical_image_000.csv").read_text().splitlines()[0] == "V,T,F1,F2"
    for png in ("sign_grid.png", "critical_curves.png", "critical_image.png"):
        assert (out / png).stat().st_size > 0


def test_critset_curve_certificates_from_files(tmp_path):
    from conftest import make_context
    from critmix.critical_system import eval_detj_u

    out = tmp_path / "certs"
    rc = main(["critset", "--config", "ethane_methane_90_10", "--out", str(out),
               "--grid", "61x61", "--no-figures"])
    assert rc == 0
    ctx = make_context("ethane_methane")
    rows = (out / "curve_000.csv").read_text().splitlines()[1:]
    pts = np.array([[float(v) for v in r.split(",")] for r in rows])
    u = np.stack([pts[:, 0] / ctx.scaling.V_ref, pts[:, 1] / ctx.scaling.T_ref], axis=-1)
    dj = eval_detj_u(ctx, u)
    assert np.nanmax(np.abs(dj)) <= 1e-7


def test_sweep_single_composition_matches_invert(tmp_path, bank_dir):
    out = tmp_path / "sweep1"
    rc = main(["sweep", "--config", "methane_h2s_52_48",
               "--bank", str(bank_dir / "bank.json"), "--comps", "0.52",
               "--out", str(out), "--no-figures"])
    assert rc == 0
    rows = (out / "locus.csv").read_text().splitlines()
    assert rows[0].startswith("z1,z2,Tc_K")
    assert len(rows) == 3  # two roots at this composition
    doc = json.loads((out / "results.json").read_text())
    assert {round(r["Tc_K"], 4) for r in doc["results"]} == {268.3496, 253.4921}


def test_figures_rendered_by_default(tmp_path, bank_dir):
    out = tmp_path / "figs"
    rc = main(["invert", "--config", "methane_h2s_52_48",
               "--bank", str(bank_dir / "bank.json"), "--out", str(out)])
    assert rc == 0
    assert (out / "inversion_paths.png").stat().st_size > 0


def test_bank_file_loadable_and_tagged(bank_dir):
    bank = load_bank(bank_dir / "bank.json")
    assert bank.provenance["composition"] == [0.51, 0.49]
    assert len(bank.entries) > 4
