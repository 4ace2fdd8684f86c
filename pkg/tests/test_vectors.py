"""Cosine similarity contract and vector validation."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragengine.errors import DegenerateVectorError, DimensionError
from ragengine.vectors import EmbeddingVector, cosine_similarity

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def nonzero_vectors(dim: int):
    return (
        st.lists(finite_floats, min_size=dim, max_size=dim)
        .map(EmbeddingVector.of)
        .filter(lambda v: any(x != 0.0 for x in v.values))
    )


class TestCosine:
    def test_identical_unit_vectors(self):
        assert cosine_similarity(EmbeddingVector.of([1, 0]), EmbeddingVector.of([1, 0])) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity(EmbeddingVector.of([1, 0]), EmbeddingVector.of([0, 1])) == 0.0

    def test_hand_computed_value(self):
        # 32 / (sqrt(14) * sqrt(77)), frozen from an independent script
        got = cosine_similarity(
            EmbeddingVector.of([1, 2, 3]), EmbeddingVector.of([4, 5, 6])
        )
        assert got == pytest.approx(0.9746318461970762, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            cosine_similarity(EmbeddingVector.of([1, 2]), EmbeddingVector.of([1, 2, 3]))

    def test_zero_vector(self):
        with pytest.raises(DegenerateVectorError):
            cosine_similarity(EmbeddingVector.of([0, 0]), EmbeddingVector.of([1, 0]))

    @given(nonzero_vectors(4))
    def test_self_similarity(self, v):
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)

    @given(nonzero_vectors(4), nonzero_vectors(4))
    def test_symmetry(self, a, b):
        assert abs(cosine_similarity(a, b) - cosine_similarity(b, a)) < 1e-12

    @given(
        nonzero_vectors(4),
        nonzero_vectors(4),
        st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    )
    def test_scale_invariance(self, a, b, c):
        scaled = EmbeddingVector.of([c * x for x in a.values])
        assert cosine_similarity(scaled, b) == pytest.approx(
            cosine_similarity(a, b), abs=1e-9
        )

    @given(nonzero_vectors(4), nonzero_vectors(4))
    def test_clamped_range(self, a, b):
        assert -1.0 <= cosine_similarity(a, b) <= 1.0


class TestEmbeddingVector:
    def test_dim(self):
        assert EmbeddingVector.of([1.0, 2.0, 3.0]).dim == 3

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            EmbeddingVector.of([])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            EmbeddingVector.of([1.0, math.nan])
        with pytest.raises(ValueError):
            EmbeddingVector.of([math.inf])

    def test_as_array_round_trip(self):
        v = EmbeddingVector.of([0.5, -1.25])
        assert list(v.as_array()) == [0.5, -1.25]
