"""Post-retrieval refinement: reranking, corrective evaluation, compression.

The corrective evaluator scores each chunk in [0, 1] through the
generator contract and aggregates with max: one clearly relevant
document is enough to ground an answer, so the corrective branch only
fires on total retrieval failure. Verdict bands:

    aggregate >= upper_threshold  -> correct   (keep + compress)
    aggregate <= lower_threshold  -> incorrect (discard, web search)
    otherwise                     -> ambiguous (keep + web search, merged)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import GatewayError
from .gateway.base import Generator, Reranker, WebResult, WebSearcher
from .prompts import PromptCatalog
from .splitter import detect_code_blocks
from .text import content_tokens
from .types import Chunk, CragVerdict, ScoredChunk

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")

WEB_FAILURE_WARNING = "web search failed; answering from internal context only"


@dataclass(frozen=True)
class CragConfig:
    upper_threshold: float = 0.7
    lower_threshold: float = 0.3
    evaluator_prompt_key: str = "crag_evaluator"

    def __post_init__(self) -> None:
        if not (0 <= self.lower_threshold < self.upper_threshold <= 1):
            raise ValueError(
                "thresholds must satisfy 0 <= lower < upper <= 1, got "
                f"{self.lower_threshold}/{self.upper_threshold}"
            )


@dataclass(frozen=True)
class CragOutcome:
    verdict: CragVerdict
    per_chunk_scores: tuple[float, ...]
    retained: tuple[ScoredChunk, ...]
    web_results: tuple[WebResult, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.verdict is CragVerdict.CORRECT and self.web_results:
            raise ValueError("correct verdict must not carry web results")
        if self.verdict is CragVerdict.INCORRECT and self.retained:
            raise ValueError("incorrect verdict must not retain chunks")


def parse_score(text: str) -> float:
    """First real number in the text, clamped to [0, 1]; unparseable -> 0.0."""
    m = _NUMBER_RE.search(text)
    if not m:
        return 0.0
    return max(0.0, min(1.0, float(m.group(0))))


def rerank(
    reranker: Reranker,
    query: str,
    candidates: list[ScoredChunk],
    top_n: int,
) -> list[ScoredChunk]:
    """Replace scores with cross-encoder scores and keep the top_n."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    scores = reranker.rerank_scores(query, [c.chunk.content for c in candidates])
    if len(scores) != len(candidates):
        raise GatewayError(
            "reranker", f"expected {len(candidates)} scores, got {len(scores)}"
        )
    rescored = [
        ScoredChunk(c.chunk, float(s), "reranked") for c, s in zip(candidates, scores)
    ]
    rescored.sort(key=lambda sc: (-sc.score, sc.chunk.id))
    return rescored[:top_n]


def crag_evaluate(
    generator: Generator,
    websearch: WebSearcher,
    catalog: PromptCatalog,
    query: str,
    chunks: list[ScoredChunk],
    cfg: CragConfig | None = None,
    web_top_k: int = 5,
) -> CragOutcome:
    """Score retrieved chunks and run the three-way corrective branch.

    In the ambiguous band a web-search failure degrades gracefully: the
    retained chunks are kept, the failure is recorded as a warning, and
    the request proceeds instead of erroring.
    """
    cfg = cfg or CragConfig()
    if not chunks:
        web = tuple(websearch.web_search(query, web_top_k))
        return CragOutcome(CragVerdict.INCORRECT, (), (), web)

    scores = []
    for sc in chunks:
        system, user = catalog.render(
            cfg.evaluator_prompt_key, query=query, passage=sc.chunk.content
        )
        scores.append(parse_score(generator.complete(user, system)))
    aggregate = max(scores)

    if aggregate <= cfg.lower_threshold:
        web = tuple(websearch.web_search(query, web_top_k))
        return CragOutcome(CragVerdict.INCORRECT, tuple(scores), (), web)

    retained = tuple(
        replace(sc, chunk=replace(sc.chunk, content=compress(query, sc.chunk)))
        for sc, score in zip(chunks, scores)
        if score >= cfg.lower_threshold
    )
    if aggregate >= cfg.upper_threshold:
        return CragOutcome(CragVerdict.CORRECT, tuple(scores), retained, ())

    try:
        web = tuple(websearch.web_search(query, web_top_k))
    except GatewayError:
        return CragOutcome(
            CragVerdict.AMBIGUOUS,
            tuple(scores),
            retained,
            (),
            warnings=(WEB_FAILURE_WARNING,),
        )
    return CragOutcome(CragVerdict.AMBIGUOUS, tuple(scores), retained, web)


def compress(query: str, chunk: Chunk) -> str:
    """Drop sentences sharing no content token with the query.

    Sentences split on ./!/? followed by whitespace; a fenced code block
    is one atomic sentence. If nothing survives, the full original
    content is returned — the generator never sees an empty context.
    """
    if not chunk.content.strip():
        raise ValueError("chunk content must be non-empty")
    segments = sentence_segments(chunk.content)
    query_tokens = set(content_tokens(query))
    kept = [
        seg
        for seg in segments
        if query_tokens & set(content_tokens(seg))
    ]
    if not kept:
        return chunk.content
    return "\n".join(kept)


def sentence_segments(text: str) -> list[str]:
    """Sentence-ish segments in order, with code blocks kept atomic."""
    segments: list[str] = []
    cursor = 0
    for span in detect_code_blocks(text):
        segments.extend(_split_plain(text[cursor : span.start]))
        segments.append(text[span.start : span.end].strip())
        cursor = span.end
    segments.extend(_split_plain(text[cursor:]))
    return [s for s in segments if s]


def _split_plain(text: str) -> list[str]:
    return [piece.strip() for piece in _SENTENCE_SPLIT_RE.split(text) if piece.strip()]
