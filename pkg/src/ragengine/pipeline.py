"""Workflow orchestration: the chat and search flows.

``search`` is the stateless flow: embed, hybrid retrieve, rerank.
``chat`` is the stateful flow: semantic cache check, adaptive routing,
route-specific retrieval, corrective evaluation with bounded multi-hop
retries, grounded generation, and cache fill.

Every stage runs under a named guard so failures surface as
``StageError`` with the failing stage attached; cache failures alone are
non-fatal.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .cache import CacheConfig, CacheEntry, CacheHit, SemanticCache
from .errors import StageError
from .gateway.base import Gateway, WebResult
from .post_retrieval import CragConfig, CragOutcome, crag_evaluate, rerank
from .pre_retrieval import DEFAULT_MAX_SUB_QUERIES, QueryTransformer
from .prompts import PromptCatalog
from .retrieval import BoostRule, HybridIndex, RrfConfig, rrf_fuse
from .types import CragVerdict, RouteDecision, ScoredChunk
from .vectors import EmbeddingVector

logger = logging.getLogger(__name__)

NO_CONTEXT_PLACEHOLDER = "### Context\n(none available)"


@dataclass(frozen=True)
class PipelineConfig:
    top_k_retrieve: int = 20
    top_n_rerank: int = 5
    max_hops: int = 2
    use_cache: bool = True
    partition_key: str = "default"
    boost_rules: tuple[BoostRule, ...] = ()
    rrf: RrfConfig = field(default_factory=RrfConfig)
    crag: CragConfig = field(default_factory=CragConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    web_top_k: int = 5
    max_sub_queries: int = DEFAULT_MAX_SUB_QUERIES

    def __post_init__(self) -> None:
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        if not 1 <= self.top_n_rerank <= self.top_k_retrieve:
            raise ValueError("require 1 <= top_n_rerank <= top_k_retrieve")
        if self.web_top_k < 1:
            raise ValueError("web_top_k must be >= 1")
        if not self.partition_key:
            raise ValueError("partition_key must be non-empty")


@dataclass
class ChatResult:
    answer: str
    sources: tuple[tuple[str, float], ...]
    route: RouteDecision | None  # None on a cache hit (routing was bypassed)
    cache_hit: bool
    hops_used: int
    verdict: CragVerdict | None
    contexts: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()
    timings: dict[str, float] = field(default_factory=dict)


class _StageTimer:
    def __init__(self) -> None:
        self.timings: dict[str, float] = {}
        self._start = time.perf_counter()

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        finally:
            elapsed = (time.perf_counter() - t0) * 1000.0
            self.timings[name] = self.timings.get(name, 0.0) + elapsed

    def finish(self) -> dict[str, float]:
        self.timings["total"] = (time.perf_counter() - self._start) * 1000.0
        return self.timings


class Pipeline:
    def __init__(
        self,
        gateway: Gateway,
        index: HybridIndex,
        cache: SemanticCache | None = None,
        config: PipelineConfig | None = None,
        catalog: PromptCatalog | None = None,
    ):
        self.gateway = gateway
        self.index = index
        self.config = config or PipelineConfig()
        self.cache = cache or SemanticCache(self.config.cache)
        self.catalog = catalog or PromptCatalog.load_default()
        self.transformer = QueryTransformer(gateway.generator, self.catalog)

    # ------------------------------------------------------------------
    # search workflow (stateless)
    # ------------------------------------------------------------------

    def search(
        self,
        query: str,
        partition: str | None = None,
        top_k: int | None = None,
    ) -> list[ScoredChunk]:
        """Hybrid retrieval plus reranking; no cache, no generation."""
        if not query:
            raise ValueError("query must be non-empty")
        cfg = self.config
        partition = partition or cfg.partition_key
        final_k = top_k if top_k is not None else cfg.top_n_rerank
        if final_k < 1:
            raise ValueError("top_k must be >= 1")
        timer = _StageTimer()
        with timer.stage("embed"):
            query_vec = self._embed(query)
        with timer.stage("retrieval"):
            candidates = self.index.hybrid_search(
                query,
                query_vec,
                partition,
                max(cfg.top_k_retrieve, final_k),
                cfg.rrf,
                cfg.boost_rules,
            )
        if not candidates:
            return []
        with timer.stage("rerank"):
            return rerank(self.gateway.reranker, query, candidates, final_k)

    # ------------------------------------------------------------------
    # chat workflow (stateful through the cache)
    # ------------------------------------------------------------------

    def chat(
        self,
        query: str,
        partition: str | None = None,
        use_cache: bool | None = None,
    ) -> ChatResult:
        if not query:
            raise ValueError("query must be non-empty")
        cfg = self.config
        partition = partition or cfg.partition_key
        caching = cfg.use_cache if use_cache is None else use_cache
        timer = _StageTimer()

        query_vec: EmbeddingVector | None = None
        if caching:
            with timer.stage("embed"):
                query_vec = self._embed(query)
            hit = self._cache_lookup(timer, query, query_vec, partition)
            if hit is not None:
                return ChatResult(
                    answer=hit.answer,
                    sources=tuple((sid, hit.similarity) for sid in hit.sources),
                    route=None,
                    cache_hit=True,
                    hops_used=0,
                    verdict=None,
                    timings=timer.finish(),
                )

        with timer.stage("route"):
            route = self.transformer.route(query)

        hops_used = 0
        current_query = query
        current_route = route
        outcome: CragOutcome | None = None
        web_only: tuple[WebResult, ...] = ()
        warnings: tuple[str, ...] = ()

        while True:
            hops_used += 1
            if current_route is RouteDecision.EXTERNAL:
                with timer.stage("web_search"):
                    web_only = tuple(
                        self.gateway.websearch.web_search(
                            current_query, cfg.web_top_k
                        )
                    )
                break

            if current_route is RouteDecision.SIMPLE:
                with timer.stage("embed"):
                    if query_vec is None:
                        query_vec = self._embed(query)
                with timer.stage("retrieval"):
                    candidates = self.index.hybrid_search(
                        current_query,
                        query_vec,
                        partition,
                        cfg.top_k_retrieve,
                        cfg.rrf,
                        cfg.boost_rules,
                    )
                rerank_query = current_query
            else:
                with timer.stage("pre_retrieval"):
                    rewritten = self.transformer.rewrite(current_query)
                    sub_queries = self.transformer.decompose(
                        rewritten, cfg.max_sub_queries
                    )
                    hyde_doc = self.transformer.hyde(rewritten)
                with timer.stage("retrieval"):
                    candidates = self._complex_retrieve(
                        rewritten, sub_queries, hyde_doc, partition
                    )
                current_query = rewritten
                rerank_query = rewritten

            if candidates:
                with timer.stage("rerank"):
                    reranked = rerank(
                        self.gateway.reranker,
                        rerank_query,
                        candidates,
                        cfg.top_n_rerank,
                    )
            else:
                reranked = []

            with timer.stage("crag"):
                outcome = crag_evaluate(
                    self.gateway.generator,
                    self.gateway.websearch,
                    self.catalog,
                    rerank_query,
                    reranked,
                    cfg.crag,
                    cfg.web_top_k,
                )
            warnings = warnings + outcome.warnings

            if (
                outcome.verdict is CragVerdict.INCORRECT
                and not outcome.web_results
                and hops_used < cfg.max_hops
            ):
                current_route = RouteDecision.COMPLEX
                continue
            break

        retained = outcome.retained if outcome is not None else ()
        web_results = outcome.web_results if outcome is not None else web_only
        with timer.stage("generate"):
            answer, contexts, sources = self._generate(query, retained, web_results)

        if caching:
            self._cache_insert(timer, query, query_vec, answer, sources, partition)

        return ChatResult(
            answer=answer,
            sources=sources,
            route=route,
            cache_hit=False,
            hops_used=hops_used,
            verdict=outcome.verdict if outcome is not None else None,
            contexts=contexts,
            warnings=warnings,
            timings=timer.finish(),
        )

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------

    def _embed(self, text: str) -> EmbeddingVector:
        return self.gateway.embedder.embed([text])[0]

    def _complex_retrieve(
        self,
        rewritten: str,
        sub_queries: list[str],
        hyde_doc: str,
        partition: str,
    ) -> list[ScoredChunk]:
        """Complex-route retrieval.

        The dense leg searches with the hypothetical-document embedding
        (answer-to-answer matching); the sparse leg keeps the rewritten
        text for keyword fidelity. Each sub-query runs its own hybrid
        search and the ranked lists are merged with RRF.
        """
        cfg = self.config
        hyde_vec = self._embed(hyde_doc)
        main = self.index.hybrid_search(
            rewritten,
            hyde_vec,
            partition,
            cfg.top_k_retrieve,
            cfg.rrf,
            cfg.boost_rules,
        )
        if not sub_queries:
            return main
        rankings = [[sc.chunk.id for sc in main]]
        for sub in sub_queries:
            sub_vec = self._embed(sub)
            results = self.index.hybrid_search(
                sub,
                sub_vec,
                partition,
                cfg.top_k_retrieve,
                cfg.rrf,
                cfg.boost_rules,
            )
            rankings.append([sc.chunk.id for sc in results])
        fused = rrf_fuse(rankings, cfg.rrf)
        merged = [
            ScoredChunk(chunk, score, "fused")
            for cid, score in fused
            if (chunk := self.index.get_chunk(cid)) is not None
        ]
        return merged[: cfg.top_k_retrieve]

    def _generate(
        self,
        query: str,
        retained: tuple[ScoredChunk, ...],
        web_results: tuple[WebResult, ...],
    ) -> tuple[str, tuple[str, ...], tuple[tuple[str, float], ...]]:
        blocks = []
        sources: list[tuple[str, float]] = []
        contexts: list[str] = []
        for sc in retained:
            blocks.append(f"### Context (source: {sc.chunk.id})\n{sc.chunk.content}")
            contexts.append(sc.chunk.content)
            sources.append((sc.chunk.id, sc.score))
        for wr in web_results:
            snippet = f"{wr.title}\n{wr.snippet}" if wr.title else wr.snippet
            blocks.append(f"### Context (source: {wr.url})\n{snippet}")
            contexts.append(snippet)
            sources.append((wr.url, wr.score))
        prompt_contexts = "\n".join(blocks) if blocks else NO_CONTEXT_PLACEHOLDER
        system, user = self.catalog.render(
            "generate", contexts=prompt_contexts, query=query
        )
        answer = self.gateway.generator.complete(user, system)
        return answer, tuple(contexts), tuple(sources)

    def _cache_lookup(
        self,
        timer: _StageTimer,
        query: str,
        query_vec: EmbeddingVector,
        partition: str,
    ) -> CacheHit | None:
        try:
            with timer.stage("cache_lookup"):
                return self.cache.lookup(query, query_vec, time.time(), partition)
        except StageError as exc:
            logger.warning("cache lookup failed, continuing uncached: %s", exc.cause)
            return None

    def _cache_insert(
        self,
        timer: _StageTimer,
        query: str,
        query_vec: EmbeddingVector | None,
        answer: str,
        sources: tuple[tuple[str, float], ...],
        partition: str,
    ) -> None:
        try:
            with timer.stage("cache_insert"):
                if query_vec is None:
                    query_vec = self._embed(query)
                self.cache.insert(
                    CacheEntry(
                        query_text=query,
                        query_vec=query_vec,
                        answer=answer,
                        sources=tuple(sid for sid, _ in sources),
                        created_at=time.time(),
                        ttl_seconds=self.cache.cfg.default_ttl_seconds,
                        partition_key=partition,
                    )
                )
        except StageError as exc:
            logger.warning("cache insert failed, answer not cached: %s", exc.cause)
