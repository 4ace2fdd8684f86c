"""In-process hybrid index: dense cosine + BM25 with partition isolation.

Dense and sparse retrieval are brute force by design at this scale; the
inner scoring loops are delegated to :mod:`ragengine.kernels`. Results
from both retrievers are merged with reciprocal rank fusion and then
rescaled by metadata boost rules. Every ranking breaks score ties by
ascending chunk id so runs are fully reproducible.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from ._concurrency import RWLock
from .errors import DegenerateVectorError, DimensionError
from .text import tokenize
from .types import Chunk, ScoredChunk
from .vectors import EmbeddingVector


@dataclass(frozen=True)
class BoostRule:
    """Multiply a candidate's score by ``factor`` when its metadata matches."""

    metadata_key: str
    metadata_value: str
    factor: float = 1.2

    def __post_init__(self) -> None:
        if not (self.factor > 0 and math.isfinite(self.factor)):
            raise ValueError(f"boost factor must be positive, got {self.factor}")

    def matches(self, chunk: Chunk) -> bool:
        return chunk.metadata.get(self.metadata_key) == self.metadata_value


@dataclass(frozen=True)
class RrfConfig:
    k: int = 60

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("rrf smoothing constant k must be >= 1")


@dataclass(frozen=True)
class Bm25Config:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 <= 0 or not 0 <= self.b <= 1:
            raise ValueError(f"invalid BM25 parameters k1={self.k1} b={self.b}")


def rrf_fuse(
    rankings: Sequence[Sequence[str]], cfg: RrfConfig | None = None
) -> list[tuple[str, float]]:
    """Reciprocal rank fusion over ranked id lists.

    score(d) = sum over lists containing d of 1 / (k + rank), ranks
    1-based. Output is sorted by score descending, ties by ascending id.
    """
    cfg = cfg or RrfConfig()
    scores: dict[str, float] = {}
    for ranking in rankings:
        if len(set(ranking)) != len(ranking):
            raise ValueError("ranking contains duplicate ids")
        for rank, chunk_id in enumerate(ranking, start=1):
            scores[chunk_id] = scores.get(chunk_id, 0.0) + 1.0 / (cfg.k + rank)
    return sorted(scores.items(), key=lambda item: (-item[1], item[0]))


def apply_boost(
    candidates: Sequence[ScoredChunk], rules: Sequence[BoostRule]
) -> list[ScoredChunk]:
    """Rescale scores by the product of all matching boost rules.

    Non-matching candidates keep their score (factor 1.0); the list is
    re-sorted descending with ties by ascending chunk id.
    """
    boosted = []
    for cand in candidates:
        if cand.score < 0:
            raise ValueError(f"apply_boost requires non-negative scores, got {cand.score}")
        factor = 1.0
        for rule in rules:
            if rule.matches(cand.chunk):
                factor *= rule.factor
        boosted.append(ScoredChunk(cand.chunk, cand.score * factor, "boosted"))
    boosted.sort(key=lambda sc: (-sc.score, sc.chunk.id))
    return boosted


@dataclass
class _SparsePartition:
    """Prepared per-partition BM25 arrays."""

    ids: list[str]
    doc_len: np.ndarray
    length_norm: np.ndarray  # k1 * (1 - b + b * dl / avgdl), per doc
    postings: dict[str, tuple[np.ndarray, np.ndarray]]  # token -> (doc_idx, tf)
    n_docs: int


_SNAPSHOT_FORMAT = "ragengine-index"
_SNAPSHOT_VERSION = 1


class HybridIndex:
    """Partitioned in-memory index over (chunk, embedding) pairs.

    Concurrency: many readers or one writer; searches never observe a
    partially applied upsert or delete.
    """

    def __init__(self, bm25: Bm25Config | None = None):
        self._bm25 = bm25 or Bm25Config()
        self._dim: int | None = None
        self._chunks: dict[str, Chunk] = {}
        self._vectors: dict[str, np.ndarray] = {}  # raw, as provided
        self._partitions: dict[str, set[str]] = {}
        self._rw = RWLock()
        self._prep_lock = threading.Lock()
        self._dense_cache: dict[str, tuple[list[str], np.ndarray]] = {}
        self._sparse_cache: dict[str, _SparsePartition] = {}
        # Observability counters used by routing-contract tests.
        self.search_counts = {"dense": 0, "sparse": 0}

    def __len__(self) -> int:
        return len(self._chunks)

    @property
    def dim(self) -> int | None:
        return self._dim

    def partitions(self) -> set[str]:
        return set(self._partitions)

    def get_chunk(self, chunk_id: str) -> Chunk | None:
        return self._chunks.get(chunk_id)

    # ------------------------------------------------------------------
    # mutation
    # ------------------------------------------------------------------

    def upsert_chunks(
        self, items: Iterable[tuple[Chunk, EmbeddingVector]]
    ) -> int:
        """Insert or replace chunks; returns the number of items applied."""
        items = list(items)
        with self._rw.write():
            dim = self._dim
            arrays = []
            for chunk, vec in items:
                if dim is None:
                    dim = vec.dim
                elif vec.dim != dim:
                    raise DimensionError(f"vector dim {vec.dim} != index dim {dim}")
                arr = vec.as_array()
                if float(np.linalg.norm(arr)) == 0.0:
                    raise DegenerateVectorError(
                        f"chunk {chunk.id!r} has a zero embedding"
                    )
                arrays.append(arr)
            self._dim = dim
            for (chunk, _vec), arr in zip(items, arrays):
                old = self._chunks.get(chunk.id)
                if old is not None:
                    self._partitions[old.partition_key].discard(chunk.id)
                    self._invalidate(old.partition_key)
                self._chunks[chunk.id] = chunk
                self._vectors[chunk.id] = arr
                self._partitions.setdefault(chunk.partition_key, set()).add(chunk.id)
                self._invalidate(chunk.partition_key)
        return len(items)

    def delete_partition(self, partition: str) -> int:
        """Remove every chunk of a partition; other partitions unaffected."""
        with self._rw.write():
            ids = self._partitions.pop(partition, set())
            for chunk_id in ids:
                del self._chunks[chunk_id]
                del self._vectors[chunk_id]
            self._invalidate(partition)
            return len(ids)

    def _invalidate(self, partition: str) -> None:
        self._dense_cache.pop(partition, None)
        self._sparse_cache.pop(partition, None)

    # ------------------------------------------------------------------
    # search
    # ------------------------------------------------------------------

    def dense_search(
        self, query_vec: EmbeddingVector, partition: str, top_k: int
    ) -> list[ScoredChunk]:
        """Brute-force cosine ranking within one partition."""
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        q = query_vec.as_array()
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            raise DegenerateVectorError("query vector is all zeros")
        with self._rw.read():
            self.search_counts["dense"] += 1
            if partition not in self._partitions:
                return []
            if self._dim is not None and query_vec.dim != self._dim:
                raise DimensionError(
                    f"query dim {query_vec.dim} != index dim {self._dim}"
                )
            ids, matrix = self._dense_partition(partition)
            scores = kernels.cosine_scores(matrix, q / qnorm)
            scores = np.clip(scores, -1.0, 1.0)
            order = np.argsort(-scores, kind="stable")[:top_k]
            return [
                ScoredChunk(self._chunks[ids[i]], float(scores[i]), "dense")
                for i in order
            ]

    def sparse_search(
        self, query_text: str, partition: str, top_k: int
    ) -> list[ScoredChunk]:
        """Okapi BM25 ranking within one partition.

        IDF = ln(1 + (N - n + 0.5) / (n + 0.5)) with N counted over the
        partition only; chunks scoring zero are omitted. Repeated query
        tokens contribute once per occurrence.
        """
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        tokens = tokenize(query_text)
        with self._rw.read():
            self.search_counts["sparse"] += 1
            if partition not in self._partitions or not tokens:
                return []
            prep = self._sparse_partition(partition)
            if prep.n_docs == 0:
                return []
            idx_parts = []
            tf_parts = []
            idf_parts = []
            for token in tokens:
                posting = prep.postings.get(token)
                if posting is None:
                    continue
                doc_idx, tf = posting
                n = doc_idx.shape[0]
                idf = math.log(1.0 + (prep.n_docs - n + 0.5) / (n + 0.5))
                idx_parts.append(doc_idx)
                tf_parts.append(tf)
                idf_parts.append(np.full(n, idf, dtype=np.float64))
            if not idx_parts:
                return []
            scores = kernels.bm25_accumulate(
                prep.n_docs,
                np.concatenate(idx_parts),
                np.concatenate(tf_parts),
                np.concatenate(idf_parts),
                prep.length_norm,
                self._bm25.k1,
            )
            ranked = [
                (prep.ids[i], float(scores[i]))
                for i in range(prep.n_docs)
                if scores[i] > 0.0
            ]
            ranked.sort(key=lambda item: (-item[1], item[0]))
            return [
                ScoredChunk(self._chunks[cid], score, "sparse")
                for cid, score in ranked[:top_k]
            ]

    def hybrid_search(
        self,
        query_text: str,
        query_vec: EmbeddingVector,
        partition: str,
        top_k: int,
        rrf_cfg: RrfConfig | None = None,
        boost_rules: Sequence[BoostRule] = (),
    ) -> list[ScoredChunk]:
        """Dense + sparse retrieval fused with RRF, then boost-rescaled.

        Each retriever contributes its top 4*top_k candidates so the
        fusion has breadth to work with.
        """
        fan_out = 4 * top_k
        dense = self.dense_search(query_vec, partition, fan_out)
        sparse = self.sparse_search(query_text, partition, fan_out)
        if not dense and not sparse:
            return []
        fused = rrf_fuse(
            [
                [sc.chunk.id for sc in dense],
                [sc.chunk.id for sc in sparse],
            ],
            rrf_cfg,
        )
        with self._rw.read():
            candidates = [
                ScoredChunk(self._chunks[cid], score, "fused")
                for cid, score in fused
                if cid in self._chunks
            ]
        return apply_boost(candidates, boost_rules)[:top_k]

    # ------------------------------------------------------------------
    # prepared per-partition structures
    # ------------------------------------------------------------------

    def _dense_partition(self, partition: str) -> tuple[list[str], np.ndarray]:
        with self._prep_lock:
            cached = self._dense_cache.get(partition)
            if cached is not None:
                return cached
            ids = sorted(self._partitions.get(partition, ()))
            if ids:
                matrix = np.stack([self._vectors[cid] for cid in ids])
                norms = np.linalg.norm(matrix, axis=1, keepdims=True)
                matrix = matrix / norms
            else:
                dim = self._dim or 1
                matrix = np.zeros((0, dim), dtype=np.float64)
            matrix = np.ascontiguousarray(matrix, dtype=np.float64)
            self._dense_cache[partition] = (ids, matrix)
            return ids, matrix

    def _sparse_partition(self, partition: str) -> _SparsePartition:
        with self._prep_lock:
            cached = self._sparse_cache.get(partition)
            if cached is not None:
                return cached
            ids = sorted(self._partitions.get(partition, ()))
            doc_tokens = {cid: tokenize(self._chunks[cid].content) for cid in ids}
            doc_len = np.array(
                [len(doc_tokens[cid]) for cid in ids], dtype=np.float64
            )
            total = float(doc_len.sum())
            if ids and total > 0:
                avgdl = total / len(ids)
                k1, b = self._bm25.k1, self._bm25.b
                length_norm = k1 * (1.0 - b + b * doc_len / avgdl)
            else:
                length_norm = np.zeros(len(ids), dtype=np.float64)
            raw: dict[str, dict[int, int]] = {}
            for i, cid in enumerate(ids):
                counts: dict[str, int] = {}
                for token in doc_tokens[cid]:
                    counts[token] = counts.get(token, 0) + 1
                for token, tf in counts.items():
                    raw.setdefault(token, {})[i] = tf
            postings = {}
            for token, by_doc in raw.items():
                doc_idx = np.array(sorted(by_doc), dtype=np.intp)
                tf = np.array([by_doc[i] for i in doc_idx], dtype=np.float64)
                postings[token] = (doc_idx, tf)
            prep = _SparsePartition(
                ids=ids,
                doc_len=doc_len,
                length_norm=length_norm,
                postings=postings,
                n_docs=len(ids),
            )
            self._sparse_cache[partition] = prep
            return prep

    # ------------------------------------------------------------------
    # persistence
    # ------------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write a self-describing snapshot; loading reproduces results bit-exactly.

        Raw vectors are serialized through repr-exact JSON floats, and
        chunks are sorted by id, so identical index contents always
        produce identical bytes.
        """
        with self._rw.read():
            records = []
            for cid in sorted(self._chunks):
                chunk = self._chunks[cid]
                records.append(
                    {
                        "id": chunk.id,
                        "doc_id": chunk.doc_id,
                        "content": chunk.content,
                        "heading_path": list(chunk.heading_path),
                        "partition_key": chunk.partition_key,
                        "char_span": list(chunk.char_span),
                        "metadata": chunk.metadata,
                        "vector": self._vectors[cid].tolist(),
                    }
                )
            payload = {
                "format": _SNAPSHOT_FORMAT,
                "version": _SNAPSHOT_VERSION,
                "dim": self._dim,
                "bm25": {"k1": self._bm25.k1, "b": self._bm25.b},
                "chunks": records,
            }
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "HybridIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != _SNAPSHOT_FORMAT:
            raise ValueError(f"{path}: not a {_SNAPSHOT_FORMAT} snapshot")
        bm25 = payload.get("bm25", {})
        index = cls(Bm25Config(k1=bm25.get("k1", 1.2), b=bm25.get("b", 0.75)))
        items = []
        for rec in payload["chunks"]:
            chunk = Chunk(
                id=rec["id"],
                doc_id=rec["doc_id"],
                content=rec["content"],
                heading_path=tuple(rec["heading_path"]),
                partition_key=rec["partition_key"],
                char_span=tuple(rec["char_span"]),
                metadata=dict(rec["metadata"]),
            )
            items.append((chunk, EmbeddingVector.of(rec["vector"])))
        index.upsert_chunks(items)
        return index
