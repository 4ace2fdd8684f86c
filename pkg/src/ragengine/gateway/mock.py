"""Deterministic mock backends.

The mock generator is a scripted responder: it reads a ``#task=<name>``
directive from the system prompt and applies a fixed rule table, which
makes every LLM-dependent stage reproducible offline. The mock embedder
feature-hashes token counts with sha256 so identical texts embed
identically on every platform.

``latency_s`` adds a fixed sleep per call, for latency-contract tests
and cache ablation experiments.
"""

from __future__ import annotations

import hashlib
import re
import time
from collections import Counter

import numpy as np

from ..text import content_tokens, token_f1, tokenize
from ..vectors import EmbeddingVector
from .base import (
    Embedder,
    Gateway,
    Generator,
    Reranker,
    WebResult,
    WebSearcher,
    check_passages,
    check_prompt,
    check_texts,
    check_top_k,
)

_TASK_RE = re.compile(r"#task=(\w+)")
_QUESTION_RE = re.compile(r"^Question:\s*(.*)$", re.MULTILINE)
_PASSAGE_RE = re.compile(r"^Passage:\s*\n(.*)\Z", re.MULTILINE | re.DOTALL)
_CONTEXT_BLOCK_RE = re.compile(
    r"^### Context \(source: [^)]*\)\n(.*?)(?=\n### |\Z)", re.MULTILINE | re.DOTALL
)
_ANSWER_RE = re.compile(r"^Answer:\s*(.*)$", re.MULTILINE)
_COMPARE_RE = re.compile(
    r"\bcompare\s+(.+?)\s+(?:and|vs\.?|versus|with)\s+(.+)", re.IGNORECASE
)

EXTERNAL_MARKERS = frozenset(
    {"yesterday", "today", "latest", "news", "current", "now", "recent", "recently"}
)
COMPLEX_MARKERS = frozenset(
    {"compare", "comparison", "versus", "vs", "difference", "differences",
     "tradeoffs", "why", "how"}
)

REFUSAL_ANSWER = "I don't know based on the provided context."


class MockEmbedder(Embedder):
    def __init__(self, dim: int = 64, latency_s: float = 0.0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.latency_s = latency_s
        self.calls: list[list[str]] = []

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        check_texts(texts)
        self.calls.append(list(texts))
        if self.latency_s:
            time.sleep(self.latency_s)
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> EmbeddingVector:
        tokens = tokenize(text) or [f"raw:{text}"]
        vec = np.zeros(self.dim, dtype=np.float64)
        for token, count in Counter(tokens).items():
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:8], "big") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[idx] += sign * count
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        return EmbeddingVector.of(vec / norm)


class MockGenerator(Generator):
    """Scripted responder keyed by the #task directive in the system prompt."""

    def __init__(self, latency_s: float = 0.0):
        self.latency_s = latency_s
        self.calls: list[tuple[str, str]] = []  # (task, user prompt)

    def complete(self, prompt: str, system: str = "") -> str:
        check_prompt(prompt)
        task_match = _TASK_RE.search(system)
        task = task_match.group(1) if task_match else "generate"
        self.calls.append((task, prompt))
        if self.latency_s:
            time.sleep(self.latency_s)
        handler = getattr(self, f"_{task}", None)
        if handler is None:
            return ""
        return handler(prompt)

    def calls_for(self, task: str) -> list[str]:
        return [p for t, p in self.calls if t == task]

    @staticmethod
    def _question(prompt: str) -> str:
        m = _QUESTION_RE.search(prompt)
        return m.group(1).strip() if m else prompt

    def _route(self, prompt: str) -> str:
        tokens = set(tokenize(self._question(prompt)))
        if tokens & EXTERNAL_MARKERS:
            return "external"
        if tokens & COMPLEX_MARKERS:
            return "complex"
        return "simple"

    def _rewrite(self, prompt: str) -> str:
        return " ".join(content_tokens(self._question(prompt)))

    def _decompose(self, prompt: str) -> str:
        question = self._question(prompt)
        m = _COMPARE_RE.search(question)
        if not m:
            return ""
        return f"features of {m.group(1).strip()}\nfeatures of {m.group(2).strip()}"

    def _hyde(self, prompt: str) -> str:
        question = self._question(prompt)
        words = " ".join(content_tokens(question)) or question
        return (
            f"{question.strip().rstrip('?')} can be summarized as follows. "
            f"This passage explains {words} in detail, covering {words} end to end."
        )

    def _crag_eval(self, prompt: str) -> str:
        question = self._question(prompt)
        passage_match = _PASSAGE_RE.search(prompt)
        passage = passage_match.group(1) if passage_match else ""
        overlap = len(set(tokenize(question)) & set(tokenize(passage)))
        if overlap >= 2:
            return "0.9"
        if overlap == 1:
            return "0.5"
        return "0.0"

    def _generate(self, prompt: str) -> str:
        blocks = _CONTEXT_BLOCK_RE.findall(prompt)
        for block in blocks:
            text = block.strip()
            if text:
                return text
        return REFUSAL_ANSWER

    def _judge(self, prompt: str) -> str:
        m = _ANSWER_RE.search(prompt)
        answer_tokens = tokenize(m.group(1)) if m else []
        context_tokens = set(tokenize(prompt))
        if not answer_tokens:
            return "0.0"
        covered = sum(1 for t in answer_tokens if t in context_tokens)
        return f"{covered / len(answer_tokens):.2f}"


class MockReranker(Reranker):
    """Scores each passage by token-overlap F1 against the query."""

    def __init__(self, latency_s: float = 0.0):
        self.latency_s = latency_s
        self.calls: list[tuple[str, int]] = []

    def rerank_scores(self, query: str, passages: list[str]) -> list[float]:
        check_passages(passages)
        self.calls.append((query, len(passages)))
        if self.latency_s:
            time.sleep(self.latency_s)
        query_tokens = tokenize(query)
        return [token_f1(query_tokens, tokenize(p)) for p in passages]


class MockWebSearcher(WebSearcher):
    """Returns canned fixtures for queries containing a registered keyword."""

    def __init__(self, fixtures: dict[str, list[WebResult]] | None = None,
                 latency_s: float = 0.0):
        self.fixtures = {k.lower(): v for k, v in (fixtures or {}).items()}
        self.latency_s = latency_s
        self.calls: list[tuple[str, int]] = []

    def register(self, keyword: str, results: list[WebResult]) -> None:
        self.fixtures[keyword.lower()] = results

    def web_search(self, query: str, top_k: int) -> list[WebResult]:
        check_top_k(top_k)
        self.calls.append((query, top_k))
        if self.latency_s:
            time.sleep(self.latency_s)
        lowered = query.lower()
        for keyword in sorted(self.fixtures):
            if keyword in lowered:
                return self.fixtures[keyword][:top_k]
        return []


def mock_gateway(
    dim: int = 64,
    latency_s: float = 0.0,
    web_fixtures: dict[str, list[WebResult]] | None = None,
) -> Gateway:
    """A full gateway bundle backed by deterministic mocks."""
    return Gateway(
        embedder=MockEmbedder(dim=dim, latency_s=latency_s),
        generator=MockGenerator(latency_s=latency_s),
        reranker=MockReranker(latency_s=latency_s),
        websearch=MockWebSearcher(web_fixtures, latency_s=latency_s),
    )
