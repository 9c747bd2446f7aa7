"""Magnetic Laplacian of a directed graph and node-level spectral encodings.

For adjacency ``A`` and potential ``q``::

    L = D_S - A_S * exp(i * 2*pi*q * (A - A.T))

with ``A_S = A | A.T`` and ``D_S`` its degree matrix.  ``L`` is Hermitian
and positive semidefinite; its eigenvectors for the ``k`` smallest
eigenvalues, split into real and imaginary halves, are the node encodings.

Eigenvectors of a Hermitian matrix are only defined up to a unit phase.
:func:`hermitian_eigen` picks a canonical one per column (largest-magnitude
entry real and positive, lowest row on ties) and orders columns inside a
degenerate eigenvalue cluster lexicographically, so exports are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg

from . import kernels
from .errors import ConvergenceFailure

DEFAULT_Q = 0.25
DEFAULT_K = 30
PSD_EPS = 1e-8
DEGENERACY_TOL = 1e-10
GAUGE_RTOL = 1e-8
ORDER_DECIMALS = 6


@dataclass(frozen=True, eq=False)
class MagneticLaplacian:
    n: int
    entries: np.ndarray
    q: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    q: float
    k: int

    @property
    def k_eff(self) -> int:
        return self.eigenvectors.shape[1]


@dataclass(frozen=True, eq=False)
class NodePeMatrix:
    values: np.ndarray
    k: int

    @property
    def real(self) -> np.ndarray:
        return self.values[:, : self.k]

    @property
    def imag(self) -> np.ndarray:
        return self.values[:, self.k :]


def _edge_arrays(edges: Iterable[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def magnetic_laplacian_from_edges(n: int, edges, q: float = DEFAULT_Q) -> MagneticLaplacian:
    if n < 1:
        raise ValueError("graph must have at least one node")
    if q < 0:
        raise ValueError("q must be non-negative")
    src, dst = _edge_arrays(edges)
    if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
        raise ValueError("edge endpoint out of range")
    theta = 2.0 * math.pi * q
    L = kernels.magnetic_laplacian(src, dst, n, math.cos(theta), math.sin(theta))
    return MagneticLaplacian(n, L, float(q))


def magnetic_laplacian(spg, q: float = DEFAULT_Q) -> MagneticLaplacian:
    """Magnetic Laplacian of anything exposing ``n`` and ``edges`` (e.g. an Spg)."""
    return magnetic_laplacian_from_edges(spg.n, spg.edges, q)


def hermitian_eigen(lap: MagneticLaplacian, k: int | None = None) -> Spectrum:
    """Eigendecomposition with canonical gauge.

    ``k=None`` returns the full spectrum; otherwise only the ``min(k, n)``
    smallest eigenpairs are computed.
    """
    n = lap.n
    k_eff = n if k is None else min(k, n)
    try:
        if k_eff == n:
            w, V = scipy.linalg.eigh(lap.entries, driver="evd", check_finite=True)
        else:
            w, V = scipy.linalg.eigh(lap.entries, subset_by_index=(0, k_eff - 1), driver="evr")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise ConvergenceFailure("eigensolver returned non-finite values")
    V = kernels.gauge_fix(np.ascontiguousarray(V, dtype=np.complex128), GAUGE_RTOL)
    V = _order_degenerate(w, V)
    return Spectrum(np.asarray(w, dtype=np.float64), V, lap.q, k_eff if k is None else k)


def _order_degenerate(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    order = list(range(len(w)))
    start = 0
    while start < len(w):
        end = start + 1
        while end < len(w) and w[end] - w[end - 1] < DEGENERACY_TOL:
            end += 1
        if end - start > 1:
            block = order[start:end]
            rounded = np.round(V[:, block], ORDER_DECIMALS) + 0.0  # drops -0.0
            keys = [tuple(zip(rounded[:, c].real, rounded[:, c].imag)) for c in range(end - start)]
            order[start:end] = [block[c] for c in sorted(range(end - start), key=keys.__getitem__)]
        start = end
    return V[:, order]


def node_pes(spec: Spectrum, k: int = DEFAULT_K) -> NodePeMatrix:
    """Rows ``[Re(phi) | Im(phi)]`` from the ``k`` lowest eigenvectors, zero padded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = spec.eigenvectors.shape[0]
    m = min(k, spec.k_eff)
    values = np.zeros((n, 2 * k), dtype=np.float64)
    values[:, :m] = spec.eigenvectors[:, :m].real
    values[:, k : k + m] = spec.eigenvectors[:, :m].imag
    return NodePeMatrix(values, k)


def symmetrized_adjacency(spg) -> np.ndarray:
    A = np.zeros((spg.n, spg.n), dtype=bool)
    src, dst = _edge_arrays(spg.edges)
    A[src, dst] = True
    return (A | A.T).astype(np.float64)


def combinatorial_laplacian(spg) -> np.ndarray:
    """``D_S - A_S``: the real Laplacian of the symmetrized graph."""
    AS = symmetrized_adjacency(spg)
    return np.diag(AS.sum(axis=1)) - AS


def symmetrized_normalized_laplacian(spg) -> np.ndarray:
    """``I - D_S^{-1/2} A_S D_S^{-1/2}``; rows of isolated nodes are zero."""
    AS = symmetrized_adjacency(spg)
    d = AS.sum(axis=1)
    dinv = np.zeros_like(d)
    nz = d > 0
    dinv[nz] = 1.0 / np.sqrt(d[nz])
    return dinv[:, None] * (np.diag(d) - AS) * dinv[None, :]


def laplacian_pes(spg, k: int = DEFAULT_K) -> np.ndarray:
    """Real eigenvector encodings of the normalized symmetric Laplacian (baseline)."""
    w, U = np.linalg.eigh(symmetrized_normalized_laplacian(spg))
    out = np.zeros((spg.n, k))
    m = min(k, spg.n)
    out[:, :m] = U[:, :m]
    return out


def maglap_pes(spg, k: int = DEFAULT_K, q: float = DEFAULT_Q) -> tuple[Spectrum, NodePeMatrix]:
    """Laplacian, eigensolve and node encodings in one call."""
    spec = hermitian_eigen(magnetic_laplacian(spg, q), k)
    return spec, node_pes(spec, k)
