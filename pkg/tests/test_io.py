import json
import struct

import numpy as np
import pytest

from amrpe import io
from amrpe.encoding import EmbeddingTable
from amrpe.errors import ChecksumMismatch, DataError, MatrixFormatError


def test_matrix_header_layout():
    data = io.encode_matrix(np.arange(6.0).reshape(2, 3))
    assert data[:4] == b"SPE1"
    assert struct.unpack("<QQQ", data[4:28]) == (2, 3, 1)
    assert np.frombuffer(data[28:], "<f4").tolist() == [0, 1, 2, 3, 4, 5]
    data64 = io.encode_matrix(np.ones((1, 2)), f64=True)
    assert struct.unpack("<QQQ", data64[4:28]) == (1, 2, 2) and len(data64) == 28 + 16


def test_matrix_round_trip(tmp_path, rng):
    values = rng.normal(size=(7, 5))
    io.write_matrix(tmp_path / "a.mat", values, f64=True)
    assert np.array_equal(io.read_matrix(tmp_path / "a.mat"), values)
    io.write_matrix(tmp_path / "b.mat", values)
    assert np.array_equal(io.read_matrix(tmp_path / "b.mat"), values.astype(np.float32).astype(np.float64))


def test_empty_and_vector_matrices():
    assert io.decode_matrix(io.encode_matrix(np.zeros((0, 3)))).shape == (0, 3)
    assert io.decode_matrix(io.encode_matrix(np.ones(4))).shape == (1, 4)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: b"XXXX" + d[4:],
        lambda d: d[:-1],
        lambda d: d[:10],
        lambda d: d[:20] + struct.pack("<Q", 9) + d[28:],
    ],
)
def test_malformed_payloads(mutate):
    data = io.encode_matrix(np.ones((2, 2)))
    with pytest.raises(MatrixFormatError):
        io.decode_matrix(mutate(data))


def test_complex_rejected_and_split(tmp_path, rng):
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    with pytest.raises(MatrixFormatError):
        io.encode_matrix(z)
    files = io.write_complex(tmp_path, "gamma", z, f64=True)
    assert sorted(files) == ["gamma.im.mat", "gamma.re.mat"]
    assert np.array_equal(io.read_complex(tmp_path, "gamma"), z)


def test_manifest_round_trip_and_verification(tmp_path):
    data = io.write_matrix(tmp_path / "x.mat", np.eye(2))
    m = io.ExportManifest("g1", config={"k": 30})
    m.add_matrix("x.mat", data)
    (tmp_path / "manifest.json").write_text(m.to_json())
    loaded = io.load_manifest(tmp_path)
    assert loaded.files["x.mat"]["shape"] == [2, 2] and loaded.files["x.mat"]["dtype"] == "float32"
    text = m.to_json()
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"
    corrupted = bytearray(data)
    corrupted[-1] ^= 0xFF
    (tmp_path / "x.mat").write_bytes(bytes(corrupted))
    with pytest.raises(ChecksumMismatch):
        io.load_manifest(tmp_path)
    (tmp_path / "x.mat").unlink()
    with pytest.raises(ChecksumMismatch):
        loaded.verify(tmp_path)


def test_manifest_version_guard():
    with pytest.raises(DataError):
        io.ExportManifest.from_json(json.dumps({"version": 99, "files": {}}))
    with pytest.raises(DataError):
        io.ExportManifest.from_json(json.dumps({"files": {}}))


def test_embedding_table_loading(tmp_path):
    table = EmbeddingTable.seeded(10, 4, seed=1)
    data = io.write_matrix(tmp_path / "embeddings.mat", table.rows)
    assert np.array_equal(io.load_embedding_table(tmp_path / "embeddings.mat").rows, table.rows)
    m = io.ExportManifest("table")
    m.add_matrix("embeddings.mat", data)
    (tmp_path / "manifest.json").write_text(m.to_json())
    assert np.array_equal(io.load_embedding_table(tmp_path).rows, table.rows)
    assert np.array_equal(io.load_embedding_table(tmp_path / "manifest.json").rows, table.rows)


def test_config_defaults_and_invariants():
    cfg = io.PipelineConfig()
    assert (cfg.k, cfg.q, cfg.sin_base, cfg.sin_dim) == (30, 0.25, 1000.0, 8)
    assert cfg.hidden_width == cfg.d_emb
    for bad in ({"k": 0}, {"sin_dim": 7}, {"q": -0.1}, {"d_emb": 0}, {"tokenizer": "bpe"}):
        with pytest.raises(DataError):
            io.PipelineConfig(**bad)


def test_config_file_formats(tmp_path):
    kv = tmp_path / "c.conf"
    kv.write_text("# comment\nk = 8\nq=0.1\nstrict = true\nsin-dim = 4\n")
    cfg = io.PipelineConfig.from_mapping(io.read_config_file(kv))
    assert (cfg.k, cfg.q, cfg.strict, cfg.sin_dim) == (8, 0.1, True, 4)
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"k": 4, "d_emb": 16, "hidden": 8}))
    cfg = io.PipelineConfig.from_mapping(io.read_config_file(js))
    assert (cfg.k, cfg.d_emb, cfg.hidden_width) == (4, 16, 8)
    bad = tmp_path / "bad.conf"
    bad.write_text("k 3\n")
    with pytest.raises(DataError):
        io.read_config_file(bad)
    with pytest.raises(DataError):
        io.PipelineConfig.from_mapping({"colour": "red"})
    with pytest.raises(DataError):
        io.PipelineConfig.from_mapping({"k": "three"})
