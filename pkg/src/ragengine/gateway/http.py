"""Generic HTTP backends.

Embeddings and completions speak the de-facto OpenAI-compatible JSON
shapes; rerank accepts the common ``results[].relevance_score`` or bare
``scores`` response forms; web search speaks a Tavily-style
``/search`` endpoint. API keys come from environment variables only.

Transient failures (connection errors, timeouts, 5xx) are retried
``retry_count`` times with exponential backoff before surfacing a
GatewayError carrying the service name.
"""

from __future__ import annotations

import os
import time
from typing import Any, Callable

import requests

from ..errors import GatewayError
from ..vectors import EmbeddingVector
from .base import (
    Embedder,
    Gateway,
    GatewayConfig,
    Generator,
    Reranker,
    ServiceConfig,
    WebResult,
    WebSearcher,
    check_passages,
    check_prompt,
    check_texts,
    check_top_k,
)

_BACKOFF_BASE_S = 0.5


class _HttpClient:
    def __init__(
        self,
        service: str,
        cfg: ServiceConfig,
        session: Any | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if not cfg.base_url:
            raise ValueError(f"{service}: base_url is required for the HTTP backend")
        self.service = service
        self.cfg = cfg
        self.session = session or requests.Session()
        self.sleep = sleep

    def post_json(self, path: str, payload: dict) -> dict:
        url = self.cfg.base_url.rstrip("/") + path
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.cfg.api_key_env) if self.cfg.api_key_env else None
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        attempts = self.cfg.retry_count + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self.session.post(
                    url,
                    json=payload,
                    headers=headers,
                    timeout=self.cfg.timeout_seconds,
                )
                if response.status_code >= 500:
                    last_error = GatewayError(
                        self.service, f"HTTP {response.status_code} from {url}"
                    )
                elif response.status_code >= 400:
                    raise GatewayError(
                        self.service, f"HTTP {response.status_code} from {url}"
                    )
                else:
                    return response.json()
            except GatewayError:
                raise
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
            except (requests.RequestException, ValueError) as exc:
                raise GatewayError(self.service, str(exc)) from exc
            if attempt < attempts - 1:
                self.sleep(_BACKOFF_BASE_S * 2**attempt)
        raise GatewayError(
            self.service, f"failed after {attempts} attempts: {last_error}"
        )


class HttpEmbedder(Embedder):
    def __init__(self, cfg: ServiceConfig, session=None, sleep=time.sleep):
        self._client = _HttpClient("embedder", cfg, session, sleep)
        self._model = cfg.model_name

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        check_texts(texts)
        data = self._client.post_json(
            "/embeddings", {"model": self._model, "input": list(texts)}
        )
        try:
            rows = data["data"]
            vectors = [EmbeddingVector.of(row["embedding"]) for row in rows]
        except (KeyError, TypeError) as exc:
            raise GatewayError("embedder", f"malformed response: {exc}") from exc
        if len(vectors) != len(texts):
            raise GatewayError(
                "embedder", f"expected {len(texts)} vectors, got {len(vectors)}"
            )
        return vectors


class HttpGenerator(Generator):
    def __init__(self, cfg: ServiceConfig, session=None, sleep=time.sleep):
        self._client = _HttpClient("generator", cfg, session, sleep)
        self._model = cfg.model_name

    def complete(self, prompt: str, system: str = "") -> str:
        check_prompt(prompt)
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": prompt})
        data = self._client.post_json(
            "/chat/completions", {"model": self._model, "messages": messages}
        )
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError("generator", f"malformed response: {exc}") from exc


class HttpReranker(Reranker):
    def __init__(self, cfg: ServiceConfig, session=None, sleep=time.sleep):
        self._client = _HttpClient("reranker", cfg, session, sleep)
        self._model = cfg.model_name

    def rerank_scores(self, query: str, passages: list[str]) -> list[float]:
        check_passages(passages)
        data = self._client.post_json(
            "/rerank",
            {"model": self._model, "query": query, "documents": list(passages)},
        )
        scores = self._parse_scores(data, len(passages))
        if len(scores) != len(passages):
            raise GatewayError(
                "reranker", f"expected {len(passages)} scores, got {len(scores)}"
            )
        return scores

    @staticmethod
    def _parse_scores(data: dict, n: int) -> list[float]:
        if "results" in data:
            scores = [0.0] * n
            try:
                for item in data["results"]:
                    scores[int(item["index"])] = float(item["relevance_score"])
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise GatewayError("reranker", f"malformed response: {exc}") from exc
            return scores
        if "scores" in data:
            try:
                return [float(s) for s in data["scores"]]
            except (TypeError, ValueError) as exc:
                raise GatewayError("reranker", f"malformed response: {exc}") from exc
        raise GatewayError("reranker", "response has neither 'results' nor 'scores'")


class HttpWebSearcher(WebSearcher):
    def __init__(self, cfg: ServiceConfig, session=None, sleep=time.sleep):
        self._client = _HttpClient("websearch", cfg, session, sleep)

    def web_search(self, query: str, top_k: int) -> list[WebResult]:
        check_top_k(top_k)
        data = self._client.post_json(
            "/search", {"query": query, "max_results": top_k}
        )
        try:
            results = [
                WebResult(
                    title=str(item.get("title", "")),
                    url=str(item["url"]),
                    snippet=str(item.get("content", item.get("snippet", ""))),
                    score=float(item.get("score", 0.0)),
                )
                for item in data.get("results", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise GatewayError("websearch", f"malformed response: {exc}") from exc
        return results[:top_k]


def http_gateway(cfg: GatewayConfig) -> Gateway:
    """A gateway bundle speaking HTTP/JSON to the configured endpoints."""
    return Gateway(
        embedder=HttpEmbedder(cfg.embedder),
        generator=HttpGenerator(cfg.generator),
        reranker=HttpReranker(cfg.reranker),
        websearch=HttpWebSearcher(cfg.websearch),
    )
