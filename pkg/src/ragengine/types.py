"""Domain types shared by every stage of the pipeline.

All types are immutable value objects; construction validates their
invariants so downstream code never re-checks them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class RouteDecision(str, Enum):
    """Three-way query classification that shapes the workflow."""

    SIMPLE = "simple"
    COMPLEX = "complex"
    EXTERNAL = "external"


class CragVerdict(str, Enum):
    """Corrective-retrieval confidence verdict."""

    CORRECT = "correct"
    INCORRECT = "incorrect"
    AMBIGUOUS = "ambiguous"


# Pipeline stages allowed to label a ScoredChunk.
SCORE_STAGES = frozenset({"dense", "sparse", "fused", "boosted", "reranked"})


@dataclass(frozen=True)
class Document:
    """A pre-split Markdown document carrying its partition tag.

    ``metadata`` keys of interest downstream: ``doc_type``, ``version``.
    """

    id: str
    source_path: str
    content: str
    partition_key: str
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.partition_key:
            raise ValueError("document partition_key must be non-empty")


@dataclass(frozen=True)
class Chunk:
    """An atomic retrieval unit.

    ``char_span`` is the half-open offset range of this chunk in its
    source document; ``heading_path`` lists the enclosing heading texts
    from outermost to innermost.
    """

    id: str
    doc_id: str
    content: str
    heading_path: tuple[str, ...]
    partition_key: str
    char_span: tuple[int, int]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("chunk id must be non-empty")
        if not self.content.strip():
            raise ValueError("chunk content must be non-empty after trimming")
        if not self.partition_key:
            raise ValueError("chunk partition_key must be non-empty")
        start, end = self.char_span
        if end <= start:
            raise ValueError(f"invalid char_span {self.char_span}")


@dataclass(frozen=True)
class ScoredChunk:
    """A chunk paired with a relevance score at one pipeline stage."""

    chunk: Chunk
    score: float
    stage: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score}")
        if self.stage not in SCORE_STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
