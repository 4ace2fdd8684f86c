# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels: brute-force cosine scan and BM25 accumulation.

Mirrors ``fallback.py``; the BM25 loop uses the same accumulation order
(term-major, ascending document index) so scores match bit for bit.
"""

import numpy as np


def cosine_scores(double[:, ::1] matrix, double[::1] query):
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += matrix[i, j] * query[j]
        o[i] = acc
    return out


def bm25_accumulate(
    Py_ssize_t n_docs,
    Py_ssize_t[::1] doc_idx,
    double[::1] tf,
    double[::1] idf,
    double[::1] length_norm,
    double k1,
):
    cdef Py_ssize_t m = doc_idx.shape[0]
    cdef Py_ssize_t i, di
    cdef double t
    out = np.zeros(n_docs, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(m):
        di = doc_idx[i]
        t = tf[i]
        o[di] += idf[i] * (t * (k1 + 1.0)) / (t + length_norm[di])
    return out
