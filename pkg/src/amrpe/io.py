"""Binary matrix payloads, export manifests and pipeline configuration.

Matrix files start with the 4-byte magic ``SPE1`` followed by three
little-endian ``uint64`` values (rows, cols, dtype code) and the row-major
little-endian values.  Dtype code 1 is float32 and 2 is float64.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ChecksumMismatch, DataError, MatrixFormatError

MAGIC = b"SPE1"
_HEADER = struct.Struct("<4sQQQ")
_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODES = {np.dtype("<f4"): 1, np.dtype("<f8"): 2}
MANIFEST_VERSION = 1


def encode_matrix(values, f64: bool = False) -> bytes:
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        raise MatrixFormatError("complex matrices must be split into .re/.im payloads")
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got shape {arr.shape}")
    dtype = _DTYPES[2 if f64 else 1]
    code = _CODES[dtype]
    body = np.ascontiguousarray(arr, dtype=dtype).tobytes(order="C")
    return _HEADER.pack(MAGIC, arr.shape[0], arr.shape[1], code) + body


def decode_matrix(data: bytes) -> np.ndarray:
    """Parse a payload into a float64 array (float32 payloads are widened)."""
    if len(data) < _HEADER.size:
        raise MatrixFormatError("payload shorter than its header")
    magic, rows, cols, code = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    if code not in _DTYPES:
        raise MatrixFormatError(f"unknown dtype code {code}")
    dtype = _DTYPES[code]
    expected = _HEADER.size + rows * cols * dtype.itemsize
    if len(data) != expected:
        raise MatrixFormatError(f"payload is {len(data)} bytes, header implies {expected}")
    arr = np.frombuffer(data, dtype=dtype, offset=_HEADER.size).reshape(rows, cols)
    return arr.astype(np.float64)


def write_matrix(path, values, f64: bool = False) -> bytes:
    data = encode_matrix(values, f64)
    Path(path).write_bytes(data)
    return data


def read_matrix(path) -> np.ndarray:
    return decode_matrix(Path(path).read_bytes())


def write_complex(directory, name: str, values, f64: bool = False) -> dict[str, bytes]:
    """Write ``<name>.re.mat`` and ``<name>.im.mat``; returns ``{filename: bytes}``."""
    values = np.asarray(values)
    out = {}
    for part, arr in (("re", values.real), ("im", values.imag)):
        fname = f"{name}.{part}.mat"
        out[fname] = write_matrix(Path(directory) / fname, arr, f64)
    return out


def read_complex(directory, name: str) -> np.ndarray:
    re = read_matrix(Path(directory) / f"{name}.re.mat")
    im = read_matrix(Path(directory) / f"{name}.im.mat")
    if re.shape != im.shape:
        raise MatrixFormatError(f"{name}: real and imaginary parts differ in shape")
    return re + 1j * im


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- manifest ------------------------------------------------------------------------


@dataclass
class ExportManifest:
    graph_id: str
    files: dict = dataclasses.field(default_factory=dict)
    config: dict = dataclasses.field(default_factory=dict)
    version: int = MANIFEST_VERSION

    def add(self, name: str, data: bytes, shape=None, dtype: str | None = None) -> None:
        entry = {"sha256": sha256(data), "bytes": len(data)}
        if shape is not None:
            entry["shape"] = list(shape)
        if dtype is not None:
            entry["dtype"] = dtype
        self.files[name] = entry

    def add_matrix(self, name: str, data: bytes) -> None:
        _, rows, cols, code = _HEADER.unpack_from(data)
        self.add(name, data, (rows, cols), "float32" if code == 1 else "float64")

    def to_json(self) -> str:
        payload = {"version": self.version, "graph_id": self.graph_id, "files": self.files, "config": self.config}
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExportManifest":
        data = json.loads(text)
        try:
            version = int(data["version"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError("manifest lacks an integer version") from exc
        if version > MANIFEST_VERSION:
            raise DataError(f"manifest version {version} is newer than supported {MANIFEST_VERSION}")
        return cls(data.get("graph_id", ""), data.get("files", {}), data.get("config", {}), version)

    def verify(self, directory) -> None:
        """Raise :class:`ChecksumMismatch` if any listed file is missing or altered."""
        directory = Path(directory)
        for name, entry in sorted(self.files.items()):
            path = directory / name
            if not path.is_file():
                raise ChecksumMismatch(f"{name}: file missing")
            if sha256(path.read_bytes()) != entry["sha256"]:
                raise ChecksumMismatch(f"{name}: checksum differs from manifest")


def load_manifest(directory, verify: bool = True) -> ExportManifest:
    directory = Path(directory)
    manifest = ExportManifest.from_json((directory / "manifest.json").read_text(encoding="utf-8"))
    if verify:
        manifest.verify(directory)
    return manifest


def load_embedding_table(path):
    """Load an embedding table from a ``.mat`` payload or a manifest that lists one.

    With a manifest, the file named ``embeddings.mat`` is used, or the only
    ``.mat`` entry when there is exactly one; checksums are verified first.
    """
    from .encoding import EmbeddingTable

    path = Path(path)
    if path.suffix == ".json" or path.is_dir():
        directory = path if path.is_dir() else path.parent
        manifest_path = path / "manifest.json" if path.is_dir() else path
        manifest = ExportManifest.from_json(manifest_path.read_text(encoding="utf-8"))
        manifest.verify(directory)
        mats = [n for n in manifest.files if n.endswith(".mat")]
        if "embeddings.mat" in mats:
            name = "embeddings.mat"
        elif len(mats) == 1:
            name = mats[0]
        else:
            raise DataError(f"{manifest_path}: cannot tell which matrix is the embedding table")
        return EmbeddingTable(read_matrix(directory / name))
    return EmbeddingTable(read_matrix(path))


# -- configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 30
    q: float = 0.25
    sin_base: float = 1000.0
    sin_dim: int = 8
    d_emb: int = 64
    hidden: int | None = None
    seed: int = 0
    vocab: str | None = None
    tokenizer: str = "greedy"
    strict: bool = False
    f64: bool = False
    intra_index: str = "published"
    embeddings: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise DataError("k must be >= 1")
        if self.sin_dim < 2 or self.sin_dim % 2:
            raise DataError("sin_dim must be a positive even integer")
        if self.q < 0:
            raise DataError("q must be >= 0")
        if self.d_emb < 1:
            raise DataError("d_emb must be >= 1")
        if self.hidden is not None and self.hidden < 1:
            raise DataError("hidden must be >= 1")
        if self.sin_base <= 1:
            raise DataError("sin_base must exceed 1")
        if self.tokenizer not in ("greedy", "whitespace"):
            raise DataError(f"unknown tokenizer mode {self.tokenizer!r}")
        if self.intra_index not in ("published", "zero_based"):
            raise DataError(f"unknown intra_index mode {self.intra_index!r}")

    @property
    def hidden_width(self) -> int:
        return self.d_emb if self.hidden is None else self.hidden

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, raw: dict) -> "PipelineConfig":
        """Build a config from string or typed values, e.g. from a config file."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            name = key.replace("-", "_")
            if name not in fields:
                raise DataError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(name, value)
        return cls(**kwargs)


_INT_FIELDS = {"k", "sin_dim", "d_emb", "hidden", "seed"}
_FLOAT_FIELDS = {"q", "sin_base"}
_BOOL_FIELDS = {"strict", "f64"}


def _coerce(name: str, value):
    if value is None:
        return None
    try:
        if name in _INT_FIELDS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if name in _FLOAT_FIELDS:
            return float(value)
        if name in _BOOL_FIELDS:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
    except ValueError as exc:
        raise DataError(f"invalid value for {name}: {value!r}") from exc
    return str(value)


def read_config_file(path) -> dict:
    """Parse a JSON object or ``key = value`` lines (``#`` starts a comment)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise DataError(f"{path}: config JSON must be an object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
