"""Structured distance to ambiguity for spectral clustering."""

import json as _json

from ._core import (
    ParseError,
    StructuralError,
    WeightMatrix,
    __version__,
    component_count,
    compress_halve,
    generate_sbm,
    knn_similarity,
    label_agreement,
    laplacian,
    load_matrix_market,
    read_matrix_market_text,
    save_matrix_market,
    sbm_block_labels,
    spectral_clustering,
    spectral_gap,
    spectral_gaps,
    unstructured_coalescer,
)
from . import _core

__all__ = [
    "ParseError",
    "StructuralError",
    "WeightMatrix",
    "__version__",
    "component_count",
    "compress_halve",
    "generate_sbm",
    "knn_similarity",
    "label_agreement",
    "laplacian",
    "load_matrix_market",
    "read_matrix_market_text",
    "save_matrix_market",
    "sbm_block_labels",
    "select_k",
    "spectral_clustering",
    "spectral_gap",
    "spectral_gaps",
    "structured_distance",
    "unstructured_coalescer",
]


def structured_distance(w, k, method="auto", outer_tol=1e-2, inner_tol=1e-9, seed=0, compare=False):
    """d_k(W) and its diagnostics as a dict (keys as in the JSON report rows)."""
    return _json.loads(_core._structured_distance(w, k, method, outer_tol, inner_tol, seed, compare))


def select_k(w, kmin, kmax, method="auto", outer_tol=1e-2, inner_tol=1e-9, seed=0, compare=False, jobs=0):
    """Rows for k = kmin..kmax plus k_opt (argmax d_k) and k_gap (argmax g_k)."""
    return _json.loads(_core._select_k(w, kmin, kmax, method, outer_tol, inner_tol, seed, compare, jobs))
