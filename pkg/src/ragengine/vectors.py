"""Embedding vectors and cosine similarity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DegenerateVectorError, DimensionError


@dataclass(frozen=True)
class EmbeddingVector:
    """A fixed-length vector of finite reals."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("embedding vector must have positive dimension")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding vector contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)

    @classmethod
    def of(cls, values: Iterable[float]) -> "EmbeddingVector":
        return cls(tuple(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine of the angle between ``a`` and ``b``, clamped to [-1, 1].

    Clamping keeps floating-point drift from leaking values like
    1.0000000000000002 into threshold comparisons downstream.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    va = a.as_array()
    vb = b.as_array()
    # Pre-scale by the max magnitude so denormal inputs don't underflow
    # in the norm; cosine is scale-invariant, so this is exact.
    max_a = float(np.max(np.abs(va)))
    max_b = float(np.max(np.abs(vb)))
    if max_a == 0.0 or max_b == 0.0:
        raise DegenerateVectorError("cosine similarity undefined for zero vector")
    va = va / max_a
    vb = vb / max_b
    value = float(np.dot(va, vb)) / (
        float(np.linalg.norm(va)) * float(np.linalg.norm(vb))
    )
    return max(-1.0, min(1.0, value))
