import csv
import json
import math

import pytest
from pydantic import ValidationError

from dce_cavity.acceptance import scenario_dir, scenario_path
from dce_cavity.config import ScenarioConfig, dump_config, load_config
from dce_cavity.runner import run_scenario, write_outputs

PI = math.pi


def _cfg(**body):
    return ScenarioConfig.model_validate({"name": "t", **body})


def _spectrum_cfg(**numerics):
    return _cfg(task="spectrum", geometry={"a": 0.3}, permittivities={"eps_I": 1.0},
                numerics={"lowest": 10, **numerics})


def _read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_shipped_scenarios_parse():
    paths = sorted(scenario_dir().glob("ac*.json"))
    assert len(paths) == 10
    for i, p in enumerate(paths, start=1):
        assert load_config(p).acceptance == i
        assert scenario_path(i) == p


def test_unknown_field_rejected_with_path():
    with pytest.raises(ValidationError) as info:
        _cfg(task="spectrum", geometry={"a": 0.3, "Lx": 2}, permittivities={"eps_I": 1.0},
             numerics={"lowest": 3})
    assert info.value.errors()[0]["loc"] == ("geometry", "Lx")


@pytest.mark.parametrize("body", [
    {"task": "spectrum", "geometry": {"a": 1.5}, "permittivities": {"eps_I": 1.0}, "numerics": {"lowest": 2}},
    {"task": "spectrum", "geometry": {"a": 0.1}, "permittivities": {"eps_I": -1.0}, "numerics": {"lowest": 2}},
    {"task": "spectrum", "geometry": {"a": 0.1}, "permittivities": {"eps_I": 1.0}},
    {"task": "sweep", "geometry": {"a": 0.1}, "permittivities": {"eps_I": 1.0}},
    {"task": "evolve", "geometry": {"a": 0.1}, "drive": {"chi": 0.1},
     "modes": [{"n_x": 1, "n_y": 1, "n_z": 1, "pol": "TM"}]},
    {"task": "evolve", "geometry": {"a": 0.1}, "drive": {"chi": 1.5},
     "modes": [{"n_x": 1, "n_y": 1, "n_z": 1, "pol": "TM"}], "numerics": {"periods": 20}},
    {"task": "estimate", "estimate": {"chi_over_epsII": 0.5, "a_over_L": 0.01, "target_photons": 1}},
    {"task": "relax"},
])
def test_invalid_configs(body):
    with pytest.raises(ValidationError):
        _cfg(**body)


def test_round_trip_through_manifest(tmp_path):
    config = load_config(scenario_path(5))
    assert ScenarioConfig.model_validate(json.loads(json.dumps(dump_config(config)))) == config
    result = run_scenario(load_config(scenario_path(9)), tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert ScenarioConfig.model_validate(manifest["scenario"]) == result.config
    assert manifest["version"] and "root_rtol" in manifest["tolerances"]


def test_spectrum_homogeneous_cube(tmp_path):
    run_scenario(_spectrum_cfg(), tmp_path)
    header, rows = _read(tmp_path / "spectrum.csv")
    assert header[:5] == ["mode", "n_x", "n_y", "n_z", "pol"]
    assert "omega [1/length]" in header
    i = header.index("omega [1/length]")
    for row in rows:
        n = [int(v) for v in row[1:4]]
        assert float(row[i]) == pytest.approx(PI * math.sqrt(sum(k * k for k in n)), rel=1e-12)


def test_floats_round_trip_exactly(tmp_path):
    result = run_scenario(_spectrum_cfg(), tmp_path)
    _, rows = _read(tmp_path / "spectrum.csv")
    omegas = result.tables["spectrum"].column("omega [1/length]")
    assert [float(r[7]) for r in rows] == omegas


def test_deterministic_tables(tmp_path):
    for n in (3, 4, 8):
        config = load_config(scenario_path(n))
        run_scenario(config, tmp_path / "a")
        run_scenario(config, tmp_path / "b")
        for f in (tmp_path / "a").iterdir():
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_worker_pool_preserves_order():
    body = json.loads(scenario_path(2).read_text())
    serial = run_scenario(ScenarioConfig.model_validate(body))
    body["numerics"]["workers"] = 3
    pooled = run_scenario(ScenarioConfig.model_validate(body))
    assert serial.tables["sweep"].rows == pooled.tables["sweep"].rows


def test_sweep_reproduces_error_orders():
    result = run_scenario(load_config(scenario_path(2)))
    fit = result.tables["sweep_fit"]
    slopes = dict(zip(fit.column("mode"), fit.column("fitted_order")))
    assert slopes["TE(1,1,1)"] == pytest.approx(3, abs=0.3)
    assert slopes["TM(1,1,1)"] == pytest.approx(2, abs=0.2)


def test_evolve_table_tracks_rwa():
    cfg = _cfg(task="evolve", geometry={"a": 0.02}, drive={"chi": 0.05},
               modes=[{"n_x": 1, "n_y": 1, "n_z": 1, "pol": "TM"}],
               numerics={"target_photons": 20.0, "method": "first_order"})
    t = run_scenario(cfg).tables["evolve"]
    for n, rwa in zip(t.column("N"), t.column("N_rwa")):
        if n > 0.1:
            assert n == pytest.approx(rwa, rel=0.05)


def test_spectrum_gram_and_coupling_tables():
    cfg = _cfg(task="spectrum", geometry={"a": 0.05}, permittivities={"eps_I": 1.0},
               drive={"chi": 0.1},
               modes=[{"n_x": 1, "n_y": 1, "n_z": 1, "pol": "TM"},
                      {"n_x": 2, "n_y": 1, "n_z": 1, "pol": "TM"},
                      {"n_x": 1, "n_y": 1, "n_z": 0, "pol": "TM"}],
               numerics={"gram": True, "coupling_phases": [0.5]})
    result = run_scenario(cfg)
    # the field-free TM(1,1,0) label gets a spectrum row only
    assert len(result.tables["spectrum"].rows) == 3
    assert len(result.tables["gram"].rows) == 4
    assert len(result.tables["coupling"].rows) == 4
    assert result.summary["gram_max_identity_deviation"] < 1e-12


def test_write_outputs_names_files(tmp_path):
    result = run_scenario(load_config(scenario_path(9)))
    paths = write_outputs(result, tmp_path / "out")
    assert set(paths) == {"estimate", "manifest"}
    header, rows = _read(paths["estimate"])
    assert all("[" in h for h in header) and len(rows) == 1
