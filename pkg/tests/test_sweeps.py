"""Experiment engines: closed-loop trials, SNR sweeps, crosstalk isolation."""
import math

import pytest

from forcelink.sweeps import (calibrate, measure_step_errors, no_touch_phase,
                              run_crosstalk, run_force_sweep, run_snr_sweep,
                              run_touch_trial, snr_meeting_threshold)
from forcelink.transducer import ShortingState, port_phases


@pytest.fixture(scope="module")
def model(default_cfg):
    return calibrate(default_cfg)


def test_calibrate_uses_config_grid(default_cfg, model):
    assert tuple(model.locations()) == default_cfg.calibration.locations_mm
    assert model.force_range_n == (1.0, 8.0)
    assert model.carrier_hz == default_cfg.waveform.carrier_hz


def test_no_touch_phase_matches_transducer(default_cfg):
    want = port_phases(ShortingState.open(), default_cfg.geometry,
                       default_cfg.waveform.carrier_hz)
    got = no_touch_phase(default_cfg)
    assert got.phi1 == want.phi1 and got.phi2 == want.phi2


def test_run_touch_trial_is_deterministic(default_cfg, model):
    r1 = run_touch_trial(default_cfg, model, 3.0, 45.0, seed=42)
    r2 = run_touch_trial(default_cfg, model, 3.0, 45.0, seed=42)
    assert r1 == r2
    assert set(r1) == {"true_force_n", "true_location_mm", "est_force_n",
                       "est_location_mm", "force_err_n", "location_err_mm",
                       "residual_rad2", "reliable"}
    assert r1["reliable"] is True
    assert r1["force_err_n"] < 0.2
    assert r1["location_err_mm"] < 0.5
    r3 = run_touch_trial(default_cfg, model, 3.0, 45.0, seed=43)
    assert r3["est_force_n"] != r1["est_force_n"]


def test_run_force_sweep_structure(default_cfg):
    rows, aggregates = run_force_sweep(default_cfg, trials=10, seed=1)
    assert [r["trial"] for r in rows] == list(range(10))
    assert all(r["kind"] == "trial" for r in rows)
    assert all(r["true_location_mm"] in default_cfg.sweep.test_locations_mm
               for r in rows)
    kinds = [a["kind"] for a in aggregates]
    assert kinds == ["median", "p90"]
    assert aggregates[0]["force_err_n"] < 0.3
    assert aggregates[0]["location_err_mm"] < 0.6


def test_measure_step_errors_noiseless_is_zero(default_cfg):
    # a held press gives identical groups, so the decoded step is exactly
    # zero; even the sampled-gate alias terms repeat and cancel
    e1, e2 = measure_step_errors(default_cfg, snr_db=None, seed=0)
    assert abs(e1) < 1e-9
    assert abs(e2) < 1e-9


def test_run_snr_sweep_noise_shrinks_with_snr(default_cfg):
    rows, aggs = run_snr_sweep(default_cfg, snr_grid_db=(10.0, 30.0),
                               trials=12, seed=3)
    assert len(rows) == 24
    assert len(aggs) == 2
    by_snr = {a["snr_db"]: a for a in aggs}
    assert by_snr[30.0]["phase_std1_deg"] < by_snr[10.0]["phase_std1_deg"]
    assert by_snr[30.0]["phase_std2_deg"] < by_snr[10.0]["phase_std2_deg"]


def test_snr_meeting_threshold_picks_lowest_passing():
    aggs = [
        {"snr_db": 20.0, "phase_std1_deg": 0.4, "phase_std2_deg": 0.6},
        {"snr_db": 0.0, "phase_std1_deg": 8.0, "phase_std2_deg": 9.0},
        {"snr_db": 10.0, "phase_std1_deg": 3.0, "phase_std2_deg": 4.0},
        {"snr_db": 30.0, "phase_std1_deg": 0.2, "phase_std2_deg": 0.3},
    ]
    assert snr_meeting_threshold(aggs, 5.0) == 10.0
    assert snr_meeting_threshold(aggs, 0.5) == 30.0
    assert snr_meeting_threshold(aggs, 0.1) is None


def test_run_crosstalk_isolation(default_cfg):
    rows, aggregates = run_crosstalk(default_cfg, n_groups=5, seed=0)
    # 2 victims x 4 steps x 2 ports
    assert len(rows) == 16
    assert {r["victim_sensor"] for r in rows} == {1, 2}
    assert {r["port"] for r in rows} == {1, 2}
    assert all(r["crosstalk_deg"] >= 0.0 for r in rows)
    assert len(aggregates) == 2
    for agg in aggregates:
        assert agg["max_crosstalk_deg"] < 0.1
        assert agg["median_crosstalk_deg"] <= agg["max_crosstalk_deg"]
