"""Vector-similarity answer cache with dynamic thresholds and TTL.

A lookup embeds nothing itself: the caller supplies the query vector.
Queries containing uncertainty markers ("maybe", "possibly", ...) are
held to the tighter fuzzy threshold so an ambiguous intent is never
confirmed by a merely-close cached answer. Entries expire at
``ttl_seconds`` (age == ttl counts as expired) and eviction is
oldest-first once ``max_entries`` is exceeded.

Lookups are scoped by partition so cached answers never leak across
tenants.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._concurrency import RWLock
from .errors import DimensionError
from .text import tokenize
from .vectors import EmbeddingVector


@dataclass(frozen=True)
class CacheConfig:
    default_threshold: float = 0.95
    fuzzy_threshold: float = 0.98
    default_ttl_seconds: int = 604800  # 7 days (168 hours)
    max_entries: int = 10000
    fuzzy_markers: tuple[str, ...] = ("maybe", "possibly", "perhaps", "might", "not sure")

    def __post_init__(self) -> None:
        if not (0 < self.default_threshold <= self.fuzzy_threshold <= 1):
            raise ValueError(
                "thresholds must satisfy 0 < default <= fuzzy <= 1, got "
                f"{self.default_threshold}/{self.fuzzy_threshold}"
            )
        if self.default_ttl_seconds <= 0:
            raise ValueError("default_ttl_seconds must be positive")
        if self.max_entries < 1:
            raise ValueError("max_entries must be >= 1")


@dataclass(frozen=True)
class CacheEntry:
    query_text: str
    query_vec: EmbeddingVector
    answer: str
    sources: tuple[str, ...]
    created_at: float
    ttl_seconds: int
    partition_key: str = ""

    def __post_init__(self) -> None:
        if self.ttl_seconds <= 0:
            raise ValueError("ttl_seconds must be positive")
        if not any(v != 0.0 for v in self.query_vec.values):
            raise ValueError("cache entry query vector must be non-zero")


@dataclass(frozen=True)
class CacheHit:
    answer: str
    sources: tuple[str, ...]
    similarity: float


def is_fuzzy(query_text: str, cfg: CacheConfig) -> bool:
    """True when an uncertainty marker appears as whole token(s)."""
    tokens = tokenize(query_text)
    for marker in cfg.fuzzy_markers:
        marker_tokens = tokenize(marker)
        if not marker_tokens:
            continue
        width = len(marker_tokens)
        for i in range(len(tokens) - width + 1):
            if tokens[i : i + width] == marker_tokens:
                return True
    return False


class SemanticCache:
    """In-memory cache matched by cosine similarity over query vectors."""

    def __init__(self, cfg: CacheConfig | None = None):
        self.cfg = cfg or CacheConfig()
        self._entries: list[CacheEntry] = []
        self._normed: list[np.ndarray] = []
        self._seq: list[int] = []
        self._next_seq = 0
        self._dim: int | None = None
        self._matrix: np.ndarray | None = None
        self._rw = RWLock()
        self._build_lock = threading.Lock()
        self._stats_lock = threading.Lock()
        self.stats = {"lookups": 0, "hits": 0, "inserts": 0}

    def __len__(self) -> int:
        return len(self._entries)

    def _bump(self, key: str) -> None:
        with self._stats_lock:
            self.stats[key] += 1

    def lookup(
        self,
        query_text: str,
        query_vec: EmbeddingVector,
        now: float,
        partition: str = "",
    ) -> CacheHit | None:
        """Best fresh entry above the applicable threshold, else None.

        Ties on similarity go to the most recently created entry.
        """
        self._bump("lookups")
        threshold = (
            self.cfg.fuzzy_threshold
            if is_fuzzy(query_text, self.cfg)
            else self.cfg.default_threshold
        )
        with self._rw.read():
            if not self._entries:
                return None
            if query_vec.dim != self._dim:
                raise DimensionError(
                    f"query dim {query_vec.dim} != cache dim {self._dim}"
                )
            q = query_vec.as_array()
            qnorm = float(np.linalg.norm(q))
            if qnorm == 0.0:
                return None
            matrix = self._ensure_matrix()
            scores = np.clip(kernels.cosine_scores(matrix, q / qnorm), -1.0, 1.0)
            alive = np.array(
                [
                    (now - e.created_at) < e.ttl_seconds
                    and e.partition_key == partition
                    for e in self._entries
                ]
            )
            if not alive.any():
                return None
            masked = np.where(alive, scores, -np.inf)
            best = float(masked.max())
            if not math.isfinite(best) or best < threshold:
                return None
            candidates = np.flatnonzero(masked == best)
            winner = max(
                candidates,
                key=lambda i: (self._entries[i].created_at, self._seq[i]),
            )
            entry = self._entries[winner]
            self._bump("hits")
            return CacheHit(entry.answer, entry.sources, best)

    def insert(self, entry: CacheEntry) -> None:
        """Store an entry, evicting the oldest when over capacity."""
        self._bump("inserts")
        with self._rw.write():
            if self._dim is None:
                self._dim = entry.query_vec.dim
            elif entry.query_vec.dim != self._dim:
                raise DimensionError(
                    f"entry dim {entry.query_vec.dim} != cache dim {self._dim}"
                )
            arr = entry.query_vec.as_array()
            self._entries.append(entry)
            self._normed.append(arr / float(np.linalg.norm(arr)))
            self._seq.append(self._next_seq)
            self._next_seq += 1
            self._matrix = None
            while len(self._entries) > self.cfg.max_entries:
                oldest = min(
                    range(len(self._entries)),
                    key=lambda i: (self._entries[i].created_at, self._seq[i]),
                )
                self._remove_at(oldest)

    def purge_expired(self, now: float) -> int:
        """Drop entries whose age has reached their TTL."""
        with self._rw.write():
            stale = [
                i
                for i, e in enumerate(self._entries)
                if (now - e.created_at) >= e.ttl_seconds
            ]
            for i in reversed(stale):
                self._remove_at(i)
            return len(stale)

    def _remove_at(self, i: int) -> None:
        del self._entries[i]
        del self._normed[i]
        del self._seq[i]
        self._matrix = None

    def _ensure_matrix(self) -> np.ndarray:
        with self._build_lock:
            if self._matrix is None:
                self._matrix = np.ascontiguousarray(
                    np.stack(self._normed), dtype=np.float64
                )
            return self._matrix
