"""Corpus-to-bundle pipeline: parse, linearize, build the SPG, encode, export.

Every entry is computed in memory as ``{filename: bytes}`` and written
afterwards, so parallel workers cannot reorder or interleave output.
Bundle layout::

    out/
      manifest.json          # config, MLP files, entry directories
      mlp.W1.mat ...         # shared projection parameters
      00000_<id>/
        linearization.txt labels.json spg.json spg.dot tokens.json
        node_pe.mat gamma.re.mat gamma.im.mat eigenvalues.mat amr_pe.mat
        [embeddings_h.mat]   # only with emit_embeddings
        manifest.json
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .amr import CorpusEntry, graph_stats
from .encoding import (
    PROMPT_PREFIX,
    PROMPT_SUFFIX,
    EmbeddingTable,
    MlpParams,
    Vocabulary,
    assemble_amr_pe,
    inject,
    load_vocab,
    tokenize_nodewise,
)
from .errors import ConvergenceFailure, DataError
from .linearize import bfs_linearize, render_labels
from .spectral import maglap_pes
from .spg import transform

_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")


def entry_dirname(index: int, entry_id: str) -> str:
    safe = _SAFE_RE.sub("_", entry_id).strip("._") or "entry"
    return f"{index:05d}_{safe[:64]}"


@dataclass(frozen=True, eq=False)
class Resources:
    """Read-only state shared by every entry of a run."""

    config: io.PipelineConfig
    vocab: Vocabulary
    params: MlpParams
    table: EmbeddingTable | None = None


def build_resources(config: io.PipelineConfig, emit_embeddings: bool = False) -> Resources:
    if config.vocab:
        vocab = load_vocab(config.vocab, mode=config.tokenizer, strict=config.strict)
    else:
        vocab = Vocabulary(mode=config.tokenizer, strict=config.strict)
    params = MlpParams.init(2 * config.k + config.sin_dim, config.hidden_width, config.d_emb, config.seed)
    table = None
    if emit_embeddings:
        if config.embeddings:
            table = io.load_embedding_table(config.embeddings)
            if table.dim != config.d_emb:
                raise DataError(f"embedding width {table.dim} != d_emb {config.d_emb}")
        else:
            table = EmbeddingTable.seeded(vocab.size, config.d_emb, config.seed)
    return Resources(config, vocab, params, table)


def process_entry(entry: CorpusEntry, res: Resources) -> dict[str, bytes]:
    """All files of one entry's bundle, manifest included, as bytes."""
    try:
        return _process(entry, res)
    except ConvergenceFailure as exc:
        raise ConvergenceFailure(f"entry {entry.id!r}: {exc}") from exc
    except DataError as exc:
        raise DataError(f"entry {entry.id!r}: {exc}") from exc


def _process(entry: CorpusEntry, res: Resources) -> dict[str, bytes]:
    cfg = res.config
    manifest = io.ExportManifest(entry.id, config=cfg.snapshot())
    files: dict[str, bytes] = {}

    def text(name: str, body: str):
        files[name] = body.encode("utf-8")
        manifest.add(name, files[name])

    def matrix(name: str, values):
        files[name] = io.encode_matrix(values, cfg.f64)
        manifest.add_matrix(name, files[name])

    seq = bfs_linearize(entry.graph, entry.id)
    spg = transform(seq)
    spec, npe = maglap_pes(spg, cfg.k, cfg.q)
    tok = tokenize_nodewise(seq, res.vocab)
    pe = assemble_amr_pe(npe, tok, res.params, cfg.sin_dim, cfg.sin_base, cfg.intra_index)

    text("linearization.txt", render_labels(seq) + "\n")
    text("labels.json", seq.sidecar() + "\n")
    text("spg.json", spg.to_json() + "\n")
    text("spg.dot", spg.to_dot(entry.id))
    text("tokens.json", tok.to_json() + "\n")
    text("stats.json", json.dumps(graph_stats(entry.graph).as_dict(), sort_keys=True) + "\n")
    matrix("node_pe.mat", npe.values)
    for part, arr in (("re", spec.eigenvectors.real), ("im", spec.eigenvectors.imag)):
        matrix(f"gamma.{part}.mat", arr)
    matrix("eigenvalues.mat", spec.eigenvalues.reshape(1, -1))
    matrix("amr_pe.mat", pe.values)
    if res.table is not None:
        prefix = res.vocab.encode(PROMPT_PREFIX)
        suffix = res.vocab.encode(PROMPT_SUFFIX)
        # add the exported (possibly single-precision) encoding so H - X matches amr_pe.mat
        exported = type(pe)(io.decode_matrix(files["amr_pe.mat"]))
        H = inject(res.table, tok, exported, prefix, suffix)
        matrix("embeddings_h.mat", H)
        text("span.json", json.dumps({"start": len(prefix), "stop": len(prefix) + tok.p}) + "\n")
    files["manifest.json"] = manifest.to_json().encode("utf-8")
    return files


def params_files(params: MlpParams, f64: bool) -> dict[str, bytes]:
    return {
        f"mlp.{name}.mat": io.encode_matrix(np.atleast_2d(getattr(params, name)), f64)
        for name in ("W1", "b1", "W2", "b2")
    }


def run_pipeline(
    entries: Sequence[CorpusEntry],
    config: io.PipelineConfig,
    out_dir,
    *,
    emit_embeddings: bool = False,
    jobs: int = 1,
) -> list[Path]:
    """Write one bundle directory per entry plus the shared root files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = build_resources(config, emit_embeddings)
    root = io.ExportManifest("", config=config.snapshot())
    for name, data in params_files(res.params, config.f64).items():
        (out / name).write_bytes(data)
        root.add_matrix(name, data)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(lambda e: process_entry(e, res), entries)
            bundles = list(results)
    else:
        bundles = [process_entry(e, res) for e in entries]

    dirs = []
    names = []
    for index, (entry, files) in enumerate(zip(entries, bundles)):
        d = out / entry_dirname(index, entry.id)
        d.mkdir(exist_ok=True)
        for name, data in files.items():
            (d / name).write_bytes(data)
        dirs.append(d)
        names.append({"id": entry.id, "dir": d.name})
    root.config = dict(config.snapshot(), entries=names)
    (out / "manifest.json").write_text(root.to_json(), encoding="utf-8")
    return dirs


def bundle_digest(out_dir) -> str:
    """SHA-256 over every file path and content under ``out_dir``, in sorted order."""
    h = hashlib.sha256()
    base = Path(out_dir)
    for path in sorted(p for p in base.rglob("*") if p.is_file()):
        h.update(path.relative_to(base).as_posix().encode("utf-8") + b"\0")
        h.update(path.read_bytes())
    return h.hexdigest()
