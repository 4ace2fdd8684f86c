"""Shared fixtures: tiny corpora, mock gateways, assembled pipelines."""

from __future__ import annotations

import pytest

from ragengine.cache import CacheConfig, SemanticCache
from ragengine.gateway.base import WebResult
from ragengine.gateway.mock import mock_gateway
from ragengine.pipeline import Pipeline, PipelineConfig
from ragengine.prompts import PromptCatalog
from ragengine.retrieval import HybridIndex
from ragengine.types import Chunk
from ragengine.vectors import EmbeddingVector


def make_chunk(
    cid: str,
    content: str,
    partition: str = "default",
    metadata: dict | None = None,
    doc_id: str = "doc",
) -> Chunk:
    return Chunk(
        id=cid,
        doc_id=doc_id,
        content=content,
        heading_path=(),
        partition_key=partition,
        char_span=(0, max(1, len(content))),
        metadata=metadata or {},
    )


def vec(*values: float) -> EmbeddingVector:
    return EmbeddingVector.of(values)


@pytest.fixture
def catalog() -> PromptCatalog:
    return PromptCatalog.load_default()


@pytest.fixture
def gateway():
    gw = mock_gateway(dim=64)
    gw.websearch.register(
        "latest release",
        [
            WebResult(
                title="Release notes",
                url="https://example.com/releases",
                snippet="The latest release shipped yesterday with bug fixes.",
                score=0.9,
            )
        ],
    )
    return gw


CORPUS = {
    "c-alpha": "The gateway listens on port 8080 by default.",
    "c-bravo": "Reciprocal rank fusion merges dense and sparse rankings.",
    "c-charlie": "Semantic caching returns recurrent answers quickly.",
    "c-delta": "Partition keys isolate tenants inside the shared index.",
    "c-echo": "The reranker scores query passage pairs jointly.",
}


@pytest.fixture
def corpus_index(gateway) -> HybridIndex:
    index = HybridIndex()
    items = []
    for cid, text in sorted(CORPUS.items()):
        vector = gateway.embedder.embed([text])[0]
        items.append((make_chunk(cid, text), vector))
    index.upsert_chunks(items)
    gateway.embedder.calls.clear()
    return index


@pytest.fixture
def pipeline(gateway, corpus_index, catalog) -> Pipeline:
    cfg = PipelineConfig(top_k_retrieve=8, top_n_rerank=3)
    cache = SemanticCache(CacheConfig())
    return Pipeline(gateway, corpus_index, cache=cache, config=cfg, catalog=catalog)
