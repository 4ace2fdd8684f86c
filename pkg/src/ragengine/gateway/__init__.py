"""Model service contracts with mock and HTTP-backed implementations."""

from .base import (
    Embedder,
    Gateway,
    GatewayConfig,
    Generator,
    Reranker,
    ServiceConfig,
    WebResult,
    WebSearcher,
)
from .http import (
    HttpEmbedder,
    HttpGenerator,
    HttpReranker,
    HttpWebSearcher,
    http_gateway,
)
from .mock import (
    MockEmbedder,
    MockGenerator,
    MockReranker,
    MockWebSearcher,
    mock_gateway,
)

__all__ = [
    "Embedder",
    "Gateway",
    "GatewayConfig",
    "Generator",
    "Reranker",
    "ServiceConfig",
    "WebResult",
    "WebSearcher",
    "HttpEmbedder",
    "HttpGenerator",
    "HttpReranker",
    "HttpWebSearcher",
    "http_gateway",
    "MockEmbedder",
    "MockGenerator",
    "MockReranker",
    "MockWebSearcher",
    "mock_gateway",
]
