"""Contracts for the four external model services.

Every pipeline stage talks to these four interfaces; deterministic mock
implementations live in :mod:`ragengine.gateway.mock` and generic
HTTP-backed ones in :mod:`ragengine.gateway.http`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from ..vectors import EmbeddingVector


@dataclass(frozen=True)
class ServiceConfig:
    base_url: str = ""
    api_key_env: str = ""
    model_name: str = ""
    timeout_seconds: float = 30.0
    retry_count: int = 2

    def __post_init__(self) -> None:
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")
        if self.retry_count < 0:
            raise ValueError("retry_count must be >= 0")


@dataclass(frozen=True)
class GatewayConfig:
    embedder: ServiceConfig = field(
        default_factory=lambda: ServiceConfig(api_key_env="EMBEDDER_API_KEY")
    )
    generator: ServiceConfig = field(
        default_factory=lambda: ServiceConfig(api_key_env="LLM_API_KEY")
    )
    reranker: ServiceConfig = field(
        default_factory=lambda: ServiceConfig(api_key_env="RERANKER_API_KEY")
    )
    websearch: ServiceConfig = field(
        default_factory=lambda: ServiceConfig(api_key_env="WEBSEARCH_API_KEY")
    )
    embedding_dim: int = 64  # used by the mock embedder

    def __post_init__(self) -> None:
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")


@dataclass(frozen=True)
class WebResult:
    title: str
    url: str
    snippet: str
    score: float = 0.0

    def __post_init__(self) -> None:
        if not self.url:
            raise ValueError("web result url must be non-empty")


class Embedder(ABC):
    @abstractmethod
    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        """One vector per input text, all the same dimension."""


class Generator(ABC):
    @abstractmethod
    def complete(self, prompt: str, system: str = "") -> str:
        """Generated text for a (user prompt, system prompt) pair."""


class Reranker(ABC):
    @abstractmethod
    def rerank_scores(self, query: str, passages: list[str]) -> list[float]:
        """One finite relevance score per passage; higher is better."""


class WebSearcher(ABC):
    @abstractmethod
    def web_search(self, query: str, top_k: int) -> list[WebResult]:
        """Up to top_k external results."""


@dataclass
class Gateway:
    """Bundle of the four service clients the pipeline needs."""

    embedder: Embedder
    generator: Generator
    reranker: Reranker
    websearch: WebSearcher


def check_texts(texts: list[str]) -> None:
    if not texts:
        raise ValueError("texts must be non-empty")
    for t in texts:
        if not t:
            raise ValueError("texts must not contain empty strings")


def check_prompt(prompt: str) -> None:
    if not prompt:
        raise ValueError("prompt must be non-empty")


def check_passages(passages: list[str]) -> None:
    if not passages:
        raise ValueError("passages must be non-empty")


def check_top_k(top_k: int) -> None:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
