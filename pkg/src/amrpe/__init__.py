"""Structure-aware positional encodings for AMR graphs fed to language models."""

from .amr import (
    AmrEdge,
    AmrGraph,
    AmrNode,
    CorpusEntry,
    GraphStats,
    canonical_form,
    graph_stats,
    iter_corpus,
    parse_penman,
    read_corpus,
    serialize_penman,
)
from .encoding import (
    EmbeddingTable,
    MlpParams,
    PeMatrix,
    Vocabulary,
    assemble_amr_pe,
    inject,
    load_vocab,
    mlp_backward,
    mlp_forward,
    sin_pe,
    tokenize_nodewise,
)
from .errors import AmrpeError, ConvergenceFailure, DataError
from .io import ExportManifest, PipelineConfig, read_matrix, write_matrix
from .kernels import BACKEND
from .linearize import Label, LabelKind, LabelSequence, bfs_linearize, parse_labels, render_labels
from .metrics import ScoredCorpus, StratifiedReport, bleu, chrfpp, delta_report, stratify
from .pipeline import run_pipeline
from .spectral import (
    Spectrum,
    NodePeMatrix,
    hermitian_eigen,
    magnetic_laplacian,
    maglap_pes,
    node_pes,
)
from .spg import Spg, transform

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
