"""On-disk formats.

* recording: ``<id>.csv`` with header ``t,gx,gy,gz,ax,ay,az`` (one row per
  10 ms sample) next to ``<id>.json`` holding ``subject_id``, ``gender``
  ("F"/"M") and ``sample_rate_hz`` (100);
* windowed dataset: JSON lines ``{"subject_id", "gender", "window_index",
  "features"}``;
* model file: versioned JSON with shortest round-trip float encoding.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, IoError, ParseError
from .nn import Activation, DenseNetwork, LayerParams
from .signals import (CHANNELS, SAMPLE_RATE_HZ, FeatureWindow, Gender, NormStats,
                      TimeSeriesRecording)

CSV_HEADER = ["t"] + [c.lower() for c in CHANNELS]
MODEL_FORMAT_VERSION = 1


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {path}: {exc}") from exc
    return path


def write_recording(recording: TimeSeriesRecording, out_dir) -> Path:
    out_dir = _ensure_dir(Path(out_dir))
    csv_path = out_dir / f"{recording.subject_id}.csv"
    rows = [",".join(CSV_HEADER)]
    t = np.arange(recording.n_samples) / recording.sample_rate
    for ti, row in zip(t.tolist(), recording.channels.T.tolist()):
        rows.append(",".join(map(repr, [ti, *row])))
    meta = {"subject_id": recording.subject_id, "gender": recording.gender.code,
            "sample_rate_hz": recording.sample_rate}
    try:
        csv_path.write_text("\n".join(rows) + "\n")
        csv_path.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {csv_path}: {exc}") from exc
    return csv_path


def read_recording(csv_path) -> TimeSeriesRecording:
    csv_path = Path(csv_path)
    meta_path = csv_path.with_suffix(".json")
    try:
        text = csv_path.read_text()
        meta_text = meta_path.read_text()
    except OSError as exc:
        raise IoError(f"cannot read recording {csv_path}: {exc}") from exc

    try:
        meta = json.loads(meta_text)
    except json.JSONDecodeError as exc:
        raise ParseError(meta_path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    for key in ("subject_id", "gender", "sample_rate_hz"):
        if key not in meta:
            raise ParseError(meta_path, 1, f"missing field {key!r}")
    if meta["gender"] not in ("F", "M"):
        raise ParseError(meta_path, 1, f"gender must be 'F' or 'M', got {meta['gender']!r}")
    if meta["sample_rate_hz"] != SAMPLE_RATE_HZ:
        raise ParseError(meta_path, 1, f"sample_rate_hz must be {SAMPLE_RATE_HZ}")

    lines = text.splitlines()
    if not lines or [h.strip() for h in lines[0].split(",")] != CSV_HEADER:
        raise ParseError(csv_path, 1, f"expected header {','.join(CSV_HEADER)}")
    data = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(CSV_HEADER):
            raise ParseError(csv_path, lineno, f"expected {len(CSV_HEADER)} fields, got {len(fields)}")
        try:
            data.append([float(f) for f in fields[1:]])
        except ValueError as exc:
            raise ParseError(csv_path, lineno, str(exc)) from None
    if not data:
        raise ParseError(csv_path, 2, "no samples")
    return TimeSeriesRecording(
        subject_id=str(meta["subject_id"]),
        gender=Gender.from_code(meta["gender"]),
        channels=np.array(data).T,
    )


def write_recordings(recordings: Iterable[TimeSeriesRecording], out_dir) -> list[Path]:
    return [write_recording(r, out_dir) for r in recordings]


def read_recordings(data_dir) -> list[TimeSeriesRecording]:
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise IoError(f"data directory not found: {data_dir}")
    paths = sorted(data_dir.glob("*.csv"))
    if not paths:
        raise IoError(f"no recording CSV files in {data_dir}")
    return [read_recording(p) for p in paths]


def write_windows(windows: Iterable[FeatureWindow], path) -> None:
    try:
        with open(path, "w") as fh:
            for w in windows:
                fh.write(json.dumps({"subject_id": w.subject_id, "gender": w.label.code,
                                     "window_index": w.window_index,
                                     "features": w.features.tolist()}) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_windows(path) -> list[FeatureWindow]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    windows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            windows.append(FeatureWindow(
                features=np.asarray(rec["features"], dtype=np.float64),
                label=Gender.from_code(rec["gender"]),
                subject_id=str(rec["subject_id"]),
                window_index=int(rec["window_index"]),
            ))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, lineno, f"bad window record: {exc}") from None
    return windows


def model_to_dict(net: DenseNetwork, training: dict | None = None, history: dict | None = None) -> dict:
    if net.norm_stats is None:
        raise FormatError("model file requires normalization statistics")
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_dims": list(net.dims),
        "activations": [l.activation.value for l in net.layers],
        "channel_order": list(net.channel_order),
        "seed": net.seed,
        "layers": [{"weights": l.weights.ravel().tolist(), "biases": l.biases.tolist()} for l in net.layers],
        "norm_stats": {"mean": net.norm_stats.mean.tolist(), "std": net.norm_stats.std.tolist()},
        "training": training or {},
        "history": history or {},
    }


def model_from_dict(doc: dict) -> DenseNetwork:
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(f"unsupported model format_version {version!r} (expected {MODEL_FORMAT_VERSION})")
    try:
        dims = [int(d) for d in doc["layer_dims"]]
        layers = []
        for i, (spec, act) in enumerate(zip(doc["layers"], doc["activations"])):
            w = np.array(spec["weights"], dtype=np.float64)
            b = np.array(spec["biases"], dtype=np.float64)
            if w.size != dims[i + 1] * dims[i] or b.size != dims[i + 1]:
                raise FormatError(f"layer {i}: array sizes do not match declared dims {dims[i]}->{dims[i + 1]}")
            layers.append(LayerParams(w.reshape(dims[i + 1], dims[i]), b, Activation(act)))
        if len(layers) != len(dims) - 1:
            raise FormatError("number of layers does not match layer_dims")
        stats = NormStats(np.array(doc["norm_stats"]["mean"], dtype=np.float64),
                          np.array(doc["norm_stats"]["std"], dtype=np.float64))
        if stats.mean.size != dims[0]:
            raise FormatError("norm_stats length does not match input dim")
        return DenseNetwork(layers, norm_stats=stats, channel_order=tuple(doc["channel_order"]),
                            seed=doc.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed model file: {exc}") from None


def save_model(path, net: DenseNetwork, training: dict | None = None, history: dict | None = None) -> None:
    text = json.dumps(model_to_dict(net, training, history), sort_keys=True, separators=(",", ":"))
    try:
        Path(path).write_text(text + "\n")
    except OSError as exc:
        raise IoError(f"cannot write model file {path}: {exc}") from exc


def load_model(path) -> tuple[DenseNetwork, dict]:
    """Return the network and the raw document (for training metadata)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read model file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    return model_from_dict(doc), doc


def write_maps_jsonl(maps_by_method: dict, path) -> int:
    """Dump RelevanceMaps, one JSON object per window and method."""
    n = 0
    try:
        with open(path, "w") as fh:
            for method, maps in maps_by_method.items():
                for m in maps:
                    fh.write(json.dumps({"subject_id": m.subject_id, "window_index": m.window_index,
                                         "method": m.method.value, "target": m.target,
                                         "values": m.values.tolist()}) + "\n")
                    n += 1
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return n


def write_json(obj, path) -> None:
    try:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def subject_summary(recordings: Sequence[TimeSeriesRecording]) -> dict:
    n_f = sum(r.gender is Gender.FEMALE for r in recordings)
    return {"subjects": len(recordings), "female": n_f, "male": len(recordings) - n_f,
            "samples_per_recording": sorted({r.n_samples for r in recordings})}
