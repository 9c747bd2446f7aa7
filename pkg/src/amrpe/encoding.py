"""Token-level structural encodings and their injection into embeddings.

Each label of a linearization is tokenized on its own so every token knows
the graph node it came from.  A token's encoding is a small GeLU MLP
applied to ``[node encoding | sinusoid(intra-node index)]``; the resulting
rows are added onto the token embeddings of the graph span only, leaving
prompt tokens untouched.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import erf

from .errors import (
    DataError,
    DimensionMismatch,
    DuplicateVocabEntry,
    EmptyTokenization,
    LengthMismatch,
    UnknownToken,
)
from .linearize import LabelSequence
from .spectral import NodePeMatrix

DEFAULT_SIN_DIM = 8
DEFAULT_SIN_BASE = 1000.0

PROMPT_PREFIX = (
    "<AMR-to-Text>\n"
    "[Task: AMR-to-Text]\n"
    "[Instruction] Convert the following AMR into natural language text.\n"
    "[Input: AMR]"
)
PROMPT_SUFFIX = "[Output: Text]"

INTRA_INDEX_MODES = ("published", "zero_based")


# -- vocabulary ------------------------------------------------------------------


class Vocabulary:
    """Token-to-id map with greedy longest-match or whitespace tokenization.

    In whitespace mode with an empty vocabulary, ids are ``crc32(token) %
    hash_size`` so runs without a real vocabulary stay deterministic.
    Unknown pieces raise :class:`UnknownToken` in strict mode and map to
    ``unk_token`` otherwise.
    """

    def __init__(
        self,
        tokens: Mapping[str, int] | None = None,
        *,
        mode: str = "greedy",
        strict: bool = True,
        unk_token: str = "<unk>",
        hash_size: int = 1 << 16,
    ):
        if mode not in ("greedy", "whitespace"):
            raise ValueError(f"unknown tokenizer mode {mode!r}")
        self.ids = dict(tokens or {})
        self.mode = mode
        self.strict = strict
        self.unk_token = unk_token
        self.hash_size = hash_size
        self._max_len = max((len(t) for t in self.ids), default=0)

    @property
    def hashed(self) -> bool:
        return not self.ids

    @property
    def size(self) -> int:
        if self.hashed:
            return self.hash_size
        return max(self.ids.values()) + 1

    def _unknown(self, piece: str) -> tuple[str, int]:
        if self.strict or self.unk_token not in self.ids:
            raise UnknownToken(f"{piece!r} is not in the vocabulary")
        return self.unk_token, self.ids[self.unk_token]

    def _lookup(self, piece: str) -> tuple[str, int]:
        if self.hashed:
            return piece, zlib.crc32(piece.encode("utf-8")) % self.hash_size
        if piece in self.ids:
            return piece, self.ids[piece]
        return self._unknown(piece)

    def _greedy(self, word: str) -> list[tuple[str, int]]:
        out = []
        i = 0
        while i < len(word):
            for j in range(min(len(word), i + self._max_len), i, -1):
                if word[i:j] in self.ids:
                    out.append((word[i:j], self.ids[word[i:j]]))
                    i = j
                    break
            else:
                out.append(self._unknown(word[i]))
                i += 1
        return out

    def tokenize(self, text: str) -> list[tuple[str, int]]:
        pieces = []
        for word in text.split():
            if self.mode == "whitespace" or self.hashed:
                pieces.append(self._lookup(word))
            else:
                pieces.extend(self._greedy(word))
        return pieces

    def encode(self, text: str) -> list[int]:
        return [i for _, i in self.tokenize(text)]


def load_vocab(path, *, mode: str = "greedy", strict: bool = True, **kwargs) -> Vocabulary:
    """Read a newline-delimited token list or a JSON vocabulary.

    JSON may be a flat ``{token: id}`` object or a tokenizer file with
    ``{"model": {"vocab": {...}}}``; merges are ignored.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    ids: dict[str, int] = {}
    if path.suffix == ".json":
        data = json.loads(text)
        if "model" in data and isinstance(data["model"], dict):
            data = data["model"].get("vocab", {})
        if not isinstance(data, dict):
            raise DataError(f"{path}: expected a JSON object of token ids")
        seen: dict[int, str] = {}
        for tok, idx in data.items():
            if idx in seen:
                raise DuplicateVocabEntry(f"{path}: id {idx} used by {seen[idx]!r} and {tok!r}")
            seen[idx] = tok
            ids[tok] = int(idx)
    else:
        for lineno, line in enumerate(text.split("\n"), start=1):
            tok = line.rstrip("\r")
            if not tok:
                continue
            if tok in ids:
                raise DuplicateVocabEntry(f"{path}:{lineno}: duplicate token {tok!r}")
            ids[tok] = len(ids)
    return Vocabulary(ids, mode=mode, strict=strict, **kwargs)


# -- node-wise tokenization ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TokenizedLinearization:
    tokens: tuple[int, ...]
    pieces: tuple[str, ...]
    token_to_node: tuple[int, ...]
    node_token_counts: tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.tokens)

    @property
    def multi_token_nodes(self) -> list[int]:
        return [i for i, c in enumerate(self.node_token_counts) if c > 1]

    def to_json(self) -> str:
        payload = {
            "tokens": list(self.tokens),
            "pieces": list(self.pieces),
            "token_to_node": list(self.token_to_node),
            "node_token_counts": list(self.node_token_counts),
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)


def tokenize_nodewise(seq: LabelSequence, tokenizer: Vocabulary) -> TokenizedLinearization:
    tokens: list[int] = []
    pieces: list[str] = []
    owner: list[int] = []
    counts: list[int] = []
    for i, label in enumerate(seq.labels):
        run = tokenizer.tokenize(label.text)
        if not run:
            raise EmptyTokenization(f"label {i} ({label.text!r}) produced no tokens")
        for piece, idx in run:
            pieces.append(piece)
            tokens.append(idx)
            owner.append(i)
        counts.append(len(run))
    return TokenizedLinearization(tuple(tokens), tuple(pieces), tuple(owner), tuple(counts))


# -- intra-node sinusoid -------------------------------------------------------------


def sin_pe(j: int, d: int = DEFAULT_SIN_DIM, base: float = DEFAULT_SIN_BASE) -> np.ndarray:
    if d % 2 or d <= 0:
        raise ValueError("d must be a positive even integer")
    if j < 0 or base <= 1:
        raise ValueError("need j >= 0 and base > 1")
    out = np.empty(d)
    for m in range(d // 2):
        angle = j / base ** (2 * m / d)
        out[2 * m] = math.sin(angle)
        out[2 * m + 1] = math.cos(angle)
    return out


def intra_indices(tok: TokenizedLinearization, mode: str = "published") -> list[int]:
    """Per-token index fed to the sinusoid.

    ``published``: 1..p_i inside multi-token labels, 0 for single-token labels.
    ``zero_based``: 0..p_i-1 everywhere (not the published convention).
    """
    if mode not in INTRA_INDEX_MODES:
        raise ValueError(f"intra index mode must be one of {INTRA_INDEX_MODES}")
    out = []
    for count in tok.node_token_counts:
        if mode == "zero_based":
            out.extend(range(count))
        elif count == 1:
            out.append(0)
        else:
            out.extend(range(1, count + 1))
    return out


# -- projection MLP ---------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(x):
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def gelu_grad(x):
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * np.exp(-0.5 * x * x) * _INV_SQRT_2PI


@dataclass(frozen=True, eq=False)
class MlpParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)
        if self.W1.ndim != 2 or self.W2.ndim != 2:
            raise DimensionMismatch("weights must be matrices")
        if self.b1.shape != (self.W1.shape[1],) or self.W2.shape[0] != self.W1.shape[1]:
            raise DimensionMismatch("hidden width inconsistent across W1, b1, W2")
        if self.b2.shape != (self.W2.shape[1],):
            raise DimensionMismatch("b2 must match the output width of W2")

    @property
    def in_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def hidden(self) -> int:
        return self.W1.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W2.shape[1]

    @classmethod
    def init(cls, in_dim: int, hidden: int, out_dim: int, seed: int = 0) -> "MlpParams":
        """Seeded normal init scaled by ``1/sqrt(fan_in)``, zero biases."""
        rng = np.random.default_rng(seed)
        return cls(
            rng.standard_normal((in_dim, hidden)) / math.sqrt(in_dim),
            np.zeros(hidden),
            rng.standard_normal((hidden, out_dim)) / math.sqrt(hidden),
            np.zeros(out_dim),
        )

    @classmethod
    def zeros(cls, in_dim: int, hidden: int, out_dim: int) -> "MlpParams":
        return cls(np.zeros((in_dim, hidden)), np.zeros(hidden), np.zeros((hidden, out_dim)), np.zeros(out_dim))


@dataclass(frozen=True, eq=False)
class MlpGrads:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    x: np.ndarray


def _check_input(params: MlpParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (params.in_dim,) or x.ndim > 2:
        raise DimensionMismatch(f"input of shape {x.shape} does not match in_dim={params.in_dim}")
    return x


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    """``W2^T gelu(W1^T x + b1) + b2`` for a vector or a batch of row vectors."""
    x = _check_input(params, x)
    return gelu(x @ params.W1 + params.b1) @ params.W2 + params.b2


def mlp_backward(params: MlpParams, x, upstream) -> MlpGrads:
    """Gradients of ``sum(upstream * mlp_forward(params, x))``."""
    x = _check_input(params, x)
    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != x.shape[:-1] + (params.out_dim,):
        raise DimensionMismatch(f"upstream shape {g.shape} does not match output")
    z = x @ params.W1 + params.b1
    h = gelu(z)
    dh = g @ params.W2.T
    dz = dh * gelu_grad(z)
    if x.ndim == 1:
        return MlpGrads(np.outer(x, dz), dz, np.outer(h, g), g.copy(), dz @ params.W1.T)
    return MlpGrads(x.T @ dz, dz.sum(axis=0), h.T @ g, g.sum(axis=0), dz @ params.W1.T)


# -- assembly and injection --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PeMatrix:
    values: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]


def assemble_inputs(
    node_pe: NodePeMatrix,
    tok: TokenizedLinearization,
    sin_dim: int = DEFAULT_SIN_DIM,
    sin_base: float = DEFAULT_SIN_BASE,
    intra_index: str = "published",
) -> np.ndarray:
    """MLP inputs, one row per token: its node's encoding then its sinusoid."""
    if node_pe.values.shape[0] != len(tok.node_token_counts):
        raise DimensionMismatch(
            f"{node_pe.values.shape[0]} node encodings for {len(tok.node_token_counts)} labels"
        )
    idx = intra_indices(tok, intra_index)
    sin_rows = np.array([sin_pe(j, sin_dim, sin_base) for j in idx]).reshape(len(idx), sin_dim)
    return np.hstack([node_pe.values[list(tok.token_to_node)], sin_rows])


def assemble_amr_pe(
    node_pe: NodePeMatrix,
    tok: TokenizedLinearization,
    params: MlpParams,
    sin_dim: int = DEFAULT_SIN_DIM,
    sin_base: float = DEFAULT_SIN_BASE,
    intra_index: str = "published",
) -> PeMatrix:
    if params.in_dim != node_pe.values.shape[1] + sin_dim:
        raise DimensionMismatch(
            f"MLP expects {params.in_dim} inputs, got {node_pe.values.shape[1]} + {sin_dim}"
        )
    inputs = assemble_inputs(node_pe, tok, sin_dim, sin_base, intra_index)
    return PeMatrix(mlp_forward(params, inputs))


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    rows: np.ndarray

    @property
    def vocab_size(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def seeded(cls, vocab_size: int, dim: int, seed: int = 0, scale: float = 0.02) -> "EmbeddingTable":
        """Stand-in table: PCG64(seed) normals times ``scale``, rounded to float32.

        Rounding to single precision mirrors how model weights are stored.
        With a single-precision ``pe`` as well, ``(x + pe) - x == pe`` holds
        exactly in double precision.
        """
        rng = np.random.default_rng(seed)
        rows = (rng.standard_normal((vocab_size, dim)) * scale).astype(np.float32).astype(np.float64)
        return cls(rows)

    def lookup(self, ids: Sequence[int]) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise DataError(f"token id out of range for vocabulary of {self.vocab_size}")
        return self.rows[ids]


def inject(
    table: EmbeddingTable,
    tok: TokenizedLinearization,
    pe: PeMatrix,
    prefix: Sequence[int] = (),
    suffix: Sequence[int] = (),
) -> np.ndarray:
    """Embed ``prefix + graph tokens + suffix`` and add ``pe`` to the graph span."""
    if pe.p != tok.p:
        raise LengthMismatch(f"{pe.p} encoding rows for {tok.p} tokens")
    if pe.values.shape[1] != table.dim:
        raise DimensionMismatch(f"encoding width {pe.values.shape[1]} != embedding width {table.dim}")
    X = table.lookup(list(prefix) + list(tok.tokens) + list(suffix))
    H = X.copy()
    start = len(prefix)
    H[start : start + tok.p] += pe.values
    return H


def embed(table: EmbeddingTable, tok: TokenizedLinearization, prefix=(), suffix=()) -> np.ndarray:
    return table.lookup(list(prefix) + list(tok.tokens) + list(suffix))
