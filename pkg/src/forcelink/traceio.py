"""Bit-exact persistence: binary channel traces, model JSON, phase CSV.

Trace file layout: 8-byte magic "WFTRACE1", one newline-terminated UTF-8 JSON
header line, then little-endian float32 (re, im) pairs, snapshot-major (n
outer, k inner).
"""
from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np

from .calib import CalibrationDataset, LocationFit, Sample, SensorModel
from .chansim import ChannelTrace, WaveformConfig
from .clocks import ClockScheme, SwitchClock
from .decoder import PhaseSeries
from .transducer import SensorGeometry

MAGIC = b"WFTRACE1"
_PAYLOAD_DTYPE = np.dtype("<c8")  # pairs of little-endian float32

PHASE_CSV_COLUMNS = ("group_index", "t_seconds", "dphi1_deg", "dphi2_deg",
                     "phi1_deg", "phi2_deg", "snr1_db", "snr2_db")


def scheme_to_dict(scheme: ClockScheme) -> dict:
    def clock(c: SwitchClock) -> dict:
        return {"freq": c.frequency, "duty": c.duty, "offset": c.phase_offset}
    return {"f_s_hz": scheme.f_s,
            "clock_a": clock(scheme.clock_a),
            "clock_b": clock(scheme.clock_b)}


def scheme_from_dict(d: dict) -> ClockScheme:
    def clock(cd: dict) -> SwitchClock:
        return SwitchClock(frequency=cd["freq"], duty=cd["duty"],
                           phase_offset=cd["offset"])
    return ClockScheme(clock_a=clock(d["clock_a"]), clock_b=clock(d["clock_b"]))


def _geometry_to_dict(geom: SensorGeometry) -> dict:
    return {"length_mm": geom.length_mm,
            "signal_width_mm": geom.signal_width_mm,
            "ground_width_mm": geom.ground_width_mm,
            "height_mm": geom.height_mm,
            "eps_eff": geom.eps_eff}


def _geometry_from_dict(d: dict) -> SensorGeometry:
    return SensorGeometry(**d)


def write_trace(trace: ChannelTrace, path) -> None:
    cfg = trace.config
    header = {
        "waveform": {
            "n_subcarriers": cfg.n_subcarriers,
            "subcarrier_spacing_hz": cfg.subcarrier_spacing_hz,
            "frame_period_s": cfg.frame_period_s,
            "carrier_hz": cfg.carrier_hz,
            "n_snapshots": cfg.n_snapshots,
        },
        "schemes": [scheme_to_dict(s) for s in trace.schemes],
        "geometry": _geometry_to_dict(trace.geometry) if trace.geometry else None,
        "provenance": trace.provenance,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    # snapshot-major payload: iterate n, then k
    payload = np.ascontiguousarray(trace.data.T).astype(_PAYLOAD_DTYPE)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
        f.write(b"\n")
        f.write(payload.tobytes())


def read_trace(path) -> ChannelTrace:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        line = f.readline()
        if not line.endswith(b"\n"):
            raise ValueError("truncated header")
        header = json.loads(line.decode("utf-8"))
        wf = header["waveform"]
        cfg = WaveformConfig(
            n_subcarriers=wf["n_subcarriers"],
            subcarrier_spacing_hz=wf["subcarrier_spacing_hz"],
            frame_period_s=wf["frame_period_s"],
            carrier_hz=wf["carrier_hz"],
            n_snapshots=wf["n_snapshots"],
        )
        expected = cfg.n_subcarriers * cfg.n_snapshots * _PAYLOAD_DTYPE.itemsize
        payload = f.read(expected + 1)
        if len(payload) < expected:
            raise ValueError(
                f"truncated payload: {len(payload)} bytes, expected {expected}")
        if len(payload) > expected:
            raise ValueError("trailing bytes after payload")
    data = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE)
    data = data.reshape(cfg.n_snapshots, cfg.n_subcarriers).T
    schemes = tuple(scheme_from_dict(d) for d in header.get("schemes", []))
    geom = header.get("geometry")
    return ChannelTrace(
        config=cfg, data=data.astype(np.complex128),
        schemes=schemes,
        geometry=_geometry_from_dict(geom) if geom else None,
        provenance=header.get("provenance", {}),
    )


def write_model(model: SensorModel, path) -> None:
    doc = {
        "carrier_hz": model.carrier_hz,
        "locations_mm": model.locations(),
        "force_range_n": list(model.force_range_n),
        "per_location": [
            {
                **{f"c{i}_port1": fit.c_port1[i] for i in range(4)},
                **{f"c{i}_port2": fit.c_port2[i] for i in range(4)},
                "rms_deg": float(np.degrees(fit.rms_rad)),
            }
            for fit in model.fits
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_model(path) -> SensorModel:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    fits = []
    for loc, row in zip(doc["locations_mm"], doc["per_location"]):
        fits.append(LocationFit(
            location_mm=loc,
            c_port1=tuple(row[f"c{i}_port1"] for i in range(4)),
            c_port2=tuple(row[f"c{i}_port2"] for i in range(4)),
            rms_rad=float(np.radians(row["rms_deg"])),
        ))
    return SensorModel(carrier_hz=doc["carrier_hz"], fits=tuple(fits),
                       force_range_n=tuple(doc["force_range_n"]))


def write_dataset(data: CalibrationDataset, path) -> None:
    doc = {"carrier_hz": data.carrier_hz, "source": data.source,
           "samples": [{"force_n": s.force_n, "location_mm": s.location_mm,
                        "phi1_rad": s.phi1, "phi2_rad": s.phi2}
                       for s in data.samples]}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_dataset(path) -> CalibrationDataset:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    samples = tuple(Sample(force_n=r["force_n"], location_mm=r["location_mm"],
                           phi1=r["phi1_rad"], phi2=r["phi2_rad"])
                    for r in doc["samples"])
    return CalibrationDataset(samples=samples, carrier_hz=doc["carrier_hz"],
                              source=doc.get("source", "imported"))


def write_phase_csv(series: PhaseSeries, path, snr_db=(None, None),
                    extra_columns: dict | None = None) -> None:
    """Per-group CSV; '.' decimal, LF newlines.

    Row g carries the step into group g (0 for the first group), anchored
    phases when present, and the per-port SNR estimates if supplied.
    extra_columns maps name -> sequence of len n_groups (e.g. inversion
    output).
    """
    deg = np.degrees
    G = series.n_groups
    d1 = np.concatenate(([0.0], deg(series.dphi1)))
    d2 = np.concatenate(([0.0], deg(series.dphi2)))
    t = series.group_times()
    cols = list(PHASE_CSV_COLUMNS)
    extra = extra_columns or {}
    cols += list(extra.keys())
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for g in range(G):
            row = [str(g), repr(float(t[g])), repr(float(d1[g])), repr(float(d2[g]))]
            for phi in (series.phi1, series.phi2):
                row.append(repr(float(deg(phi[g]))) if phi is not None else "")
            for s in snr_db:
                row.append(repr(float(s)) if s is not None else "")
            for name in extra:
                row.append(repr(float(extra[name][g])))
            f.write(",".join(row) + "\n")
