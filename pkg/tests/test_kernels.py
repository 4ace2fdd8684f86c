"""Backend parity and correctness for the scoring kernels."""

from __future__ import annotations

import numpy as np
import pytest

from ragengine import kernels


def _backends():
    return kernels.available_backends()


def _random_case(seed: int, n: int = 120, d: int = 32):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, d))
    m = np.ascontiguousarray(m / np.linalg.norm(m, axis=1, keepdims=True))
    q = np.ascontiguousarray(m[rng.integers(n)])
    return m, q


def test_cosine_matches_naive_loop():
    m, q = _random_case(0, n=40, d=8)
    expected = np.array([float(np.dot(row, q)) for row in m])
    for name, backend in _backends().items():
        got = backend.cosine_scores(m, q)
        np.testing.assert_allclose(got, expected, atol=1e-12, err_msg=name)


def test_cosine_empty_matrix():
    m = np.zeros((0, 8), dtype=np.float64)
    q = np.ones(8, dtype=np.float64)
    for backend in _backends().values():
        assert backend.cosine_scores(m, q).shape == (0,)


def test_bm25_matches_naive_loop():
    rng = np.random.default_rng(1)
    n_docs = 30
    m = 80
    doc_idx = np.sort(rng.integers(0, n_docs, m)).astype(np.intp)
    tf = rng.integers(1, 6, m).astype(np.float64)
    idf = rng.uniform(0.05, 3.0, m)
    length_norm = rng.uniform(0.3, 3.0, n_docs)
    k1 = 1.2
    expected = np.zeros(n_docs)
    for i in range(m):
        d = doc_idx[i]
        expected[d] += idf[i] * (tf[i] * (k1 + 1.0)) / (tf[i] + length_norm[d])
    for name, backend in _backends().items():
        got = backend.bm25_accumulate(n_docs, doc_idx, tf, idf, length_norm, k1)
        np.testing.assert_allclose(got, expected, rtol=1e-12, err_msg=name)


@pytest.mark.skipif(
    "native" not in kernels.available_backends(), reason="native kernel not built"
)
class TestBackendParity:
    def test_cosine_parity(self):
        backs = _backends()
        for seed in range(5):
            m, q = _random_case(seed)
            np.testing.assert_allclose(
                backs["python"].cosine_scores(m, q),
                backs["native"].cosine_scores(m, q),
                atol=1e-12,
            )

    def test_bm25_bitwise_parity(self):
        backs = _backends()
        rng = np.random.default_rng(7)
        for _ in range(5):
            n_docs = int(rng.integers(5, 60))
            m = int(rng.integers(0, 150))
            doc_idx = np.sort(rng.integers(0, n_docs, m)).astype(np.intp)
            tf = rng.integers(1, 9, m).astype(np.float64)
            idf = rng.uniform(0.01, 4.0, m)
            length_norm = rng.uniform(0.2, 4.0, n_docs)
            a = backs["python"].bm25_accumulate(n_docs, doc_idx, tf, idf, length_norm, 1.2)
            b = backs["native"].bm25_accumulate(n_docs, doc_idx, tf, idf, length_norm, 1.2)
            assert np.array_equal(a, b), "BM25 kernels must agree bit for bit"
