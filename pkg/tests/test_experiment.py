import json
from pathlib import Path

import numpy as np
import pytest

from scplan.cli import main
from scplan.experiment import (ExperimentConfig, emit_report, run_experiment,
                               validate, validate_file)
from scplan.presets import build_reference_scenario, bundled_scenario_path
from scplan.reporting import read_raster_csv, write_raster_csv
from scplan.scenario import GridSpec
from scplan.scenario_io import (ScenarioError, load_scenario, save_scenario,
                                scenario_to_dict)

BUNDLED = bundled_scenario_path("urban200m")


def _mini_scenario_doc(**overrides):
    doc = {
        "grid": {"width_m": 45.0, "height_m": 45.0, "resolution_m": 3.0},
        "tenants": [
            {"id": "a", "contracted_capacity_mbps": 4.0,
             "temporal_profile": [1.0] * 4,
             "hotspots": [{"x_m": 12.0, "y_m": 12.0, "spread_m": 8.0,
                           "peak_mbps": 0.08}],
             "uniform_floor_mbps": 0.001},
        ],
        "candidate_sites": {"fraction": 0.1, "seed": 5},
        "initial_cells": [],
        "radio": {},
        "monitor": {"window_steps": 4, "consecutive_steps": 2},
        "planner": {},
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def mini_path(tmp_path):
    doc = _mini_scenario_doc()
    grid = GridSpec(45.0, 45.0, 3.0)
    from scplan.scenario import select_candidate_sites
    sites = select_candidate_sites(grid, 0.1, 5)
    doc["initial_cells"] = [{"id": 1, "site_pixel": sites.site_pixels[3],
                             "channels": [0]},
                            {"id": 2, "site_pixel": sites.site_pixels[12],
                             "channels": [1]}]
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(doc))
    return path


def test_bundled_scenario_matches_builder(tmp_path):
    built = build_reference_scenario()
    regenerated = scenario_to_dict(built)
    shipped = json.loads(Path(BUNDLED).read_text())
    assert regenerated == shipped


def test_bundled_scenario_initial_demands():
    scn = load_scenario(BUNDLED)
    from scplan.radio import configure_powers, serving_assignment
    state = configure_powers(scn.initial_state, scn.grid, scn.radio)
    serving = serving_assignment(state, scn.grid, scn.radio)
    total = np.sum([t.spatial_demand(scn.grid) for t in scn.tenants], axis=0)
    targets = {1: 22.5, 2: 27.9, 3: 19.3, 4: 16.6}
    for cid, want in targets.items():
        got = float(total[serving.pixel_cell == cid].sum())
        assert got == pytest.approx(want, abs=0.05)
    assert scn.event is not None
    new_total = float(scn.event.tenant.spatial_demand(scn.grid).sum())
    assert new_total == pytest.approx(100.0, abs=0.05)


def test_scenario_round_trip_is_value_identical(tmp_path, mini_path):
    scn = load_scenario(mini_path)
    out = tmp_path / "copy.json"
    save_scenario(scn, out)
    again = load_scenario(out)
    assert scenario_to_dict(scn) == scenario_to_dict(again)
    assert again.grid == scn.grid
    a = scn.tenants[0].spatial_demand(scn.grid)
    b = again.tenants[0].spatial_demand(again.grid)
    np.testing.assert_array_equal(a, b)


def test_validate_well_formed():
    assert validate_file(BUNDLED) == []


def test_validate_reports_named_invariants():
    doc = _mini_scenario_doc()
    doc["grid"]["resolution_m"] = -1
    names = " ".join(validate(doc))
    assert "grid.resolution_positive" in names

    doc = _mini_scenario_doc()
    doc["initial_cells"] = [{"id": 1, "site_pixel": 1, "channels": [0, 1, 2]}]
    names = " ".join(validate(doc))
    assert "cells.site_is_candidate" in names
    assert "cells.channel_count" in names

    doc = _mini_scenario_doc()
    doc["tenants"][0]["temporal_profile"] = [0.4, 0.8]
    assert any("tenant.temporal_peak_one" in v for v in validate(doc))

    doc = _mini_scenario_doc()
    doc["monitor"]["alpha"] = 2.0
    assert any("monitor.alpha_range" in v for v in validate(doc))

    doc = _mini_scenario_doc()
    doc["candidate_sites"] = {"pixels": [1, 1, 2]}
    assert any("candidate_sites.distinct" in v for v in validate(doc))


def test_validate_file_parse_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(ScenarioError):
        validate_file(bad)


def test_run_without_event_is_fixed_point(mini_path, tmp_path):
    cfg = ExperimentConfig(mini_path, method="uniform-sc", horizon=4,
                           out_dir=tmp_path)
    report = run_experiment(cfg)
    assert report.fired_steps == []
    assert report.ledgers == []
    assert report.final_state.site_pixels == report.initial_state.site_pixels


def test_run_report_totals_consistent(tmp_path):
    cfg = ExperimentConfig(BUNDLED, method="corr-px", horizon=6)
    report = run_experiment(cfg)
    assert report.cell_count == len(report.final_state.cells)
    assert report.total_required_mhz == pytest.approx(
        sum(v for _, v in report.bandwidth_rows))
    files = emit_report(report, tmp_path)
    table = tmp_path / "bandwidth_table.csv"
    assert table in files
    lines = table.read_text().strip().splitlines()
    assert len(lines) == 1 + report.cell_count + 1   # header + cells + total
    from scplan.reporting import read_bandwidth_table
    rows, total = read_bandwidth_table(table)
    assert total == pytest.approx(sum(v for _, v in rows))
    assert total == pytest.approx(report.total_required_mhz)


def test_emit_report_empty_ledger_changelog(mini_path, tmp_path):
    cfg = ExperimentConfig(mini_path, method="uniform-sc", horizon=4)
    report = run_experiment(cfg)
    emit_report(report, tmp_path)
    changelog = (tmp_path / "changelog.txt").read_text().strip().splitlines()
    assert changelog == ["# planning changelog"]
    layout = json.loads((tmp_path / "layout.json").read_text())
    assert len(layout["initial_cells"]) == 2


def test_raster_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    grid = GridSpec(30.0, 21.0, 3.0)
    values = rng.uniform(-5, 40, grid.num_pixels)
    path = write_raster_csv(tmp_path / "raster.csv", grid, values)
    again = read_raster_csv(path)
    np.testing.assert_array_equal(values, again)


def test_layout_fragment_chains_into_scenario(tmp_path):
    cfg = ExperimentConfig(BUNDLED, method="corr-px", horizon=6)
    report = run_experiment(cfg)
    emit_report(report, tmp_path)
    fragment = json.loads((tmp_path / "layout.json").read_text())
    doc = json.loads(Path(BUNDLED).read_text())
    doc["initial_cells"] = fragment["initial_cells"]
    chained = tmp_path / "chained.json"
    chained.write_text(json.dumps(doc))
    scn = load_scenario(chained)
    assert scn.initial_state.site_pixels == report.final_state.site_pixels


def test_event_outside_horizon_rejected():
    cfg = ExperimentConfig(BUNDLED, method="corr-px", horizon=2)
    with pytest.raises(ScenarioError):
        run_experiment(cfg)


def test_cli_validate_ok(capsys):
    assert main(["validate", "--scenario", str(BUNDLED)]) == 0
    assert "0 violations" in capsys.readouterr().out


def test_cli_validate_violations(tmp_path, capsys):
    doc = _mini_scenario_doc()
    doc["monitor"]["alpha"] = 5.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--scenario", str(path)]) == 1
    assert "monitor.alpha_range" in capsys.readouterr().out


def test_cli_missing_scenario_is_io_error(capsys):
    assert main(["validate", "--scenario", "/nonexistent.json"]) == 2


def test_cli_bundled_name_resolution(capsys):
    assert main(["validate", "--scenario", "urban200m"]) == 0


def test_cli_run_and_report(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--scenario", str(BUNDLED), "--method", "corr-px",
                 "--horizon", "6", "--out", str(out)])
    assert code == 0
    for name in ("monitor_log.csv", "bandwidth_table.csv", "summary.json",
                 "actions.csv", "changelog.txt", "layout.json",
                 "serving_cell.pgm", "pixel_se.csv"):
        assert (out / name).exists()
    assert main(["report", "--run", str(out)]) == 0
    assert "total" in capsys.readouterr().out


def test_cli_translate_and_plan(tmp_path):
    out = tmp_path / "tr"
    assert main(["translate", "--scenario", str(BUNDLED), "--method",
                 "corr-px", "--out", str(out)]) == 0
    assert (out / "specs_cell.csv").exists()
    assert (out / "specs_pixel.csv").exists()
    out2 = tmp_path / "plan"
    assert main(["plan", "--scenario", str(BUNDLED), "--method", "uniform-sc",
                 "--out", str(out2)]) == 0
    assert (out2 / "actions.csv").exists()
    assert (out2 / "layout.json").exists()


def test_cli_param_overrides(tmp_path):
    out = tmp_path / "ov"
    code = main(["run", "--scenario", str(BUNDLED), "--method", "uniform-sc",
                 "--horizon", "6", "--out", str(out),
                 "--alpha", "0.8", "--L", "2", "--step4-threshold", "kmax"])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["alpha"] == 0.8
    assert summary["config"]["consecutive_steps"] == 2
    assert summary["config"]["step4_mode"] == "kmax"


def test_cli_translate_without_event(mini_path, tmp_path, capsys):
    code = main(["translate", "--scenario", str(mini_path), "--method",
                 "corr-px", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "no arriving tenant" in capsys.readouterr().out


def test_unknown_radio_key_is_parse_error(tmp_path):
    doc = _mini_scenario_doc()
    doc["radio"] = {"carrier_ghz": 5.0, "bogus_knob": 1}
    path = tmp_path / "bad_radio.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError):
        load_scenario(path)
