"""NumPy implementations of the hot scoring loops.

These are the import-time fallback when the compiled extension is
unavailable (or when ``RAGENGINE_PURE_PYTHON=1``). The BM25 kernel keeps
the exact accumulation order of the native kernel (term-major, ascending
document index) so both backends produce bit-identical scores.
"""

from __future__ import annotations

import numpy as np


def cosine_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Dot product of each matrix row with the query.

    Rows and query are expected pre-normalized, so this is cosine.
    """
    if matrix.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    return matrix @ query


def bm25_accumulate(
    n_docs: int,
    doc_idx: np.ndarray,
    tf: np.ndarray,
    idf: np.ndarray,
    length_norm: np.ndarray,
    k1: float,
) -> np.ndarray:
    """Accumulate BM25 contributions over flattened postings.

    ``doc_idx``, ``tf`` and ``idf`` are parallel arrays with one entry
    per (query term, posting); ``length_norm`` holds the per-document
    ``k1 * (1 - b + b * dl / avgdl)`` factor.
    """
    scores = np.zeros(n_docs, dtype=np.float64)
    if doc_idx.shape[0] == 0:
        return scores
    contrib = idf * (tf * (k1 + 1.0)) / (tf + length_norm[doc_idx])
    np.add.at(scores, doc_idx, contrib)
    return scores
