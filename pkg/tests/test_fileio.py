import json

import numpy as np
import pytest

from gaitrel import fileio, nn
from gaitrel.datagen import GaitGenConfig, generate_dataset
from gaitrel.errors import FormatError, IoError, ParseError
from gaitrel.signals import NormStats, extract_windows


@pytest.fixture
def recordings():
    return generate_dataset(GaitGenConfig(n_subjects=3, duration_s=2, seed=1))


def test_recording_roundtrip(tmp_path, recordings):
    fileio.write_recordings(recordings, tmp_path)
    back = fileio.read_recordings(tmp_path)
    assert [r.subject_id for r in back] == [r.subject_id for r in recordings]
    for a, b in zip(recordings, back):
        assert a.gender == b.gender
        np.testing.assert_array_equal(a.channels, b.channels)


def test_recording_layout(tmp_path, recordings):
    path = fileio.write_recording(recordings[0], tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,gx,gy,gz,ax,ay,az"
    assert len(lines) == 201
    assert lines[2].split(",")[0] == "0.01"
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta == {"subject_id": "S0000", "gender": "F", "sample_rate_hz": 100}


def test_malformed_csv_reports_line(tmp_path, recordings):
    path = fileio.write_recording(recordings[0], tmp_path)
    lines = path.read_text().splitlines()
    lines[5] = "0.04,1.0,oops,0,0,0,0"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as exc:
        fileio.read_recording(path)
    assert exc.value.line == 6 and str(path) in str(exc.value)


def test_bad_header_and_field_count(tmp_path, recordings):
    path = fileio.write_recording(recordings[0], tmp_path)
    text = path.read_text()
    path.write_text(text.replace("t,gx", "time,gx", 1))
    with pytest.raises(ParseError):
        fileio.read_recording(path)
    path.write_text(text + "1.0,2.0\n")
    with pytest.raises(ParseError) as exc:
        fileio.read_recording(path)
    assert exc.value.line == 202


def test_bad_sidecar(tmp_path, recordings):
    path = fileio.write_recording(recordings[0], tmp_path)
    path.with_suffix(".json").write_text('{"subject_id": "x", "gender": "X", "sample_rate_hz": 100}')
    with pytest.raises(ParseError):
        fileio.read_recording(path)
    path.with_suffix(".json").unlink()
    with pytest.raises(IoError):
        fileio.read_recording(path)


def test_missing_dir(tmp_path):
    with pytest.raises(IoError):
        fileio.read_recordings(tmp_path / "nope")
    with pytest.raises(IoError):
        fileio.read_recordings(tmp_path)


def test_windows_jsonl_roundtrip(tmp_path, recordings):
    windows = [w for r in recordings for w in extract_windows(r)]
    fileio.write_windows(windows, tmp_path / "w.jsonl")
    rec = json.loads((tmp_path / "w.jsonl").read_text().splitlines()[0])
    assert set(rec) == {"subject_id", "gender", "window_index", "features"}
    assert len(rec["features"]) == 600
    back = fileio.read_windows(tmp_path / "w.jsonl")
    assert [w.key for w in back] == [w.key for w in windows]
    for a, b in zip(windows, back):
        assert a.label == b.label
        np.testing.assert_array_equal(a.features, b.features)


def test_windows_jsonl_parse_error(tmp_path):
    (tmp_path / "w.jsonl").write_text('{"subject_id": "a"}\n')
    with pytest.raises(ParseError):
        fileio.read_windows(tmp_path / "w.jsonl")


def trained_like_net(seed=0):
    net = nn.init_network(seed)
    r = np.random.default_rng(seed)
    for l in net.layers:
        l.biases[:] = r.normal(size=l.out_dim) * 0.01
    net.norm_stats = NormStats(r.normal(size=600), r.uniform(0.5, 2, 600))
    return net


def test_model_roundtrip_bit_exact(tmp_path, rng):
    net = trained_like_net()
    fileio.save_model(tmp_path / "m.json", net, {"seed": 3}, {"best_epoch": 1})
    back, doc = fileio.load_model(tmp_path / "m.json")
    assert doc["layer_dims"] == [600, 500, 250, 50, 20, 4, 2]
    assert doc["training"] == {"seed": 3}
    X = rng.normal(size=(5, 600))
    assert nn.forward(net, X).logits.tobytes() == nn.forward(back, X).logits.tobytes()
    assert back.norm_stats.std.tobytes() == net.norm_stats.std.tobytes()


def test_model_file_is_deterministic(tmp_path):
    fileio.save_model(tmp_path / "a.json", trained_like_net())
    fileio.save_model(tmp_path / "b.json", trained_like_net())
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_model_version_and_dims_checked(tmp_path):
    doc = fileio.model_to_dict(trained_like_net())
    doc["format_version"] = 2
    with pytest.raises(FormatError):
        fileio.model_from_dict(doc)
    doc = fileio.model_to_dict(trained_like_net())
    doc["layer_dims"][1] = 499
    with pytest.raises(FormatError):
        fileio.model_from_dict(doc)
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(FormatError):
        fileio.load_model(tmp_path / "bad.json")
