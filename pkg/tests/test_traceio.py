"""File formats: binary traces, model and dataset JSON, phase CSV."""
import json
import math

import numpy as np
import pytest

from forcelink.calib import fit_model, generate_sweep
from forcelink.chansim import ChannelTrace, WaveformConfig
from forcelink.clocks import make_scheme
from forcelink.decoder import PhaseSeries
from forcelink.traceio import (MAGIC, PHASE_CSV_COLUMNS, read_dataset,
                               read_model, read_trace, write_dataset,
                               write_model, write_phase_csv, write_trace)
from forcelink.transducer import MechanicalParams, SensorGeometry


def small_config(k=3, n=7):
    return WaveformConfig(n_subcarriers=k, n_snapshots=n)


def random_float32_trace(rng, k=3, n=7):
    """Trace whose payload exercises awkward float32 values."""
    c8 = np.empty((k, n), dtype="<c8")
    c8.real = rng.normal(scale=10.0, size=(k, n)).astype(np.float32)
    c8.imag = rng.normal(scale=10.0, size=(k, n)).astype(np.float32)
    specials = np.array([0.0, -0.0, 1e-45, -1e-45, 1.2e-38, -1.2e-38,
                         3.0e38, -3.0e38, 1.0], dtype=np.float32)
    flat = c8.reshape(-1)
    idx = rng.choice(flat.size, size=min(len(specials), flat.size),
                     replace=False)
    for i, v in zip(idx, specials):
        flat[i] = v + 1j * np.float32(-v)
    return ChannelTrace(config=small_config(k, n), data=c8.astype(np.complex128))


def test_trace_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(11)
    for trial in range(10):
        trace = random_float32_trace(rng)
        path = tmp_path / f"t{trial}.trace"
        write_trace(trace, path)
        back = read_trace(path)
        want = trace.data.astype("<c8").tobytes()
        got = back.data.astype("<c8").tobytes()
        assert got == want  # includes signbit of -0.0 and subnormals


def test_trace_payload_is_snapshot_major_float32(tmp_path):
    rng = np.random.default_rng(3)
    trace = random_float32_trace(rng)
    path = tmp_path / "layout.trace"
    write_trace(trace, path)
    raw = path.read_bytes()
    assert raw.startswith(MAGIC)
    header_end = raw.index(b"\n", len(MAGIC))
    payload = raw[header_end + 1:]
    want = np.ascontiguousarray(trace.data.T).astype("<c8").tobytes()
    assert payload == want


def test_trace_roundtrip_preserves_metadata(tmp_path):
    rng = np.random.default_rng(5)
    scheme = make_scheme(1000.0)
    trace = ChannelTrace(
        config=small_config(), data=random_float32_trace(rng).data,
        schemes=(scheme,), geometry=SensorGeometry(),
        provenance={"seed": 3, "config_digest": "deadbeef"})
    path = tmp_path / "meta.trace"
    write_trace(trace, path)
    back = read_trace(path)
    assert back.config == trace.config
    assert back.schemes == (scheme,)
    assert back.geometry == SensorGeometry()
    assert back.provenance["seed"] == 3
    assert back.provenance["config_digest"] == "deadbeef"


def test_read_trace_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.trace"
    path.write_bytes(b"NOTRACE!" + b"{}\n")
    with pytest.raises(ValueError, match="magic"):
        read_trace(path)


def test_read_trace_rejects_truncated_header(tmp_path):
    path = tmp_path / "hdr.trace"
    path.write_bytes(MAGIC + b'{"waveform":')
    with pytest.raises(ValueError, match="header"):
        read_trace(path)


def test_read_trace_rejects_wrong_payload_size(tmp_path):
    rng = np.random.default_rng(9)
    trace = random_float32_trace(rng)
    path = tmp_path / "full.trace"
    write_trace(trace, path)
    raw = path.read_bytes()

    short = tmp_path / "short.trace"
    short.write_bytes(raw[:-4])
    with pytest.raises(ValueError, match="truncated payload"):
        read_trace(short)

    long = tmp_path / "long.trace"
    long.write_bytes(raw + b"\x00")
    with pytest.raises(ValueError, match="trailing"):
        read_trace(long)


def fitted_model():
    data = generate_sweep((20.0, 40.0, 60.0), [1.0 + 0.5 * i for i in range(15)],
                          SensorGeometry(), MechanicalParams(), 2.4e9)
    return data, fit_model(data)


def test_model_json_roundtrip(tmp_path):
    data, model = fitted_model()
    path = tmp_path / "model.json"
    write_model(model, path)
    back = read_model(path)
    assert back.carrier_hz == model.carrier_hz
    assert back.force_range_n == model.force_range_n
    assert back.locations() == model.locations()
    for got, want in zip(back.fits, model.fits):
        assert got.c_port1 == want.c_port1  # repr-exact JSON floats
        assert got.c_port2 == want.c_port2
        assert math.isclose(got.rms_rad, want.rms_rad, rel_tol=1e-12,
                            abs_tol=1e-15)


def test_dataset_json_roundtrip(tmp_path):
    data, _ = fitted_model()
    path = tmp_path / "cal.json"
    write_dataset(data, path)
    back = read_dataset(path)
    assert back.carrier_hz == data.carrier_hz
    assert back.source == "simulated"
    assert back.samples == data.samples


def test_dataset_missing_source_defaults_to_imported(tmp_path):
    data, _ = fitted_model()
    path = tmp_path / "cal.json"
    write_dataset(data, path)
    doc = json.loads(path.read_text())
    del doc["source"]
    path.write_text(json.dumps(doc))
    assert read_dataset(path).source == "imported"


def phase_series(with_phi=True):
    dphi1 = np.array([0.1, -0.2])
    dphi2 = np.array([0.05, 0.3])
    phi1 = np.array([1.0, 1.1, 0.9]) if with_phi else None
    phi2 = np.array([-1.0, -0.95, -0.65]) if with_phi else None
    return PhaseSeries(read_freqs=(1000.0, 4000.0), group_size=625,
                       group_duration_s=0.036, dphi1=dphi1, dphi2=dphi2,
                       suspect1=np.zeros(2, bool), suspect2=np.zeros(2, bool),
                       phi1=phi1, phi2=phi2)


def test_phase_csv_layout(tmp_path):
    path = tmp_path / "phases.csv"
    write_phase_csv(phase_series(), path, snr_db=(24.5, 18.25),
                    extra_columns={"est_force_n": [0.0, 3.5, 4.0]})
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == ",".join(PHASE_CSV_COLUMNS) + ",est_force_n"
    assert lines[-1] == ""  # trailing newline
    rows = [line.split(",") for line in lines[1:4]]
    assert [r[0] for r in rows] == ["0", "1", "2"]
    # first row is the reference group: zero step by construction
    assert float(rows[0][2]) == 0.0 and float(rows[0][3]) == 0.0
    assert float(rows[1][2]) == pytest.approx(math.degrees(0.1))
    assert float(rows[2][3]) == pytest.approx(math.degrees(0.3))
    assert float(rows[1][1]) == pytest.approx(0.036)
    assert float(rows[0][4]) == pytest.approx(math.degrees(1.0))
    assert float(rows[0][6]) == 24.5 and float(rows[0][7]) == 18.25
    assert [r[8] for r in rows] == ["0.0", "3.5", "4.0"]


def test_phase_csv_blank_cells_without_anchor_or_snr(tmp_path):
    path = tmp_path / "phases.csv"
    write_phase_csv(phase_series(with_phi=False), path)
    rows = [line.split(",") for line in
            path.read_text(encoding="utf-8").strip().split("\n")[1:]]
    for r in rows:
        assert r[4] == "" and r[5] == ""  # no anchored phases
        assert r[6] == "" and r[7] == ""  # no SNR estimates
