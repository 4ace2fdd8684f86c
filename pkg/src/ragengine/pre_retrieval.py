"""Pre-retrieval query transformation, driven through the generator contract.

Routing parses the classifier's first token case-insensitively; anything
unrecognized falls back to the complex route, which is the conservative
choice (full pipeline rather than a possibly-wrong shortcut).
"""

from __future__ import annotations

from dataclasses import dataclass

from .gateway.base import Generator
from .prompts import PromptCatalog
from .types import RouteDecision

_ROUTE_WORDS = {
    "simple": RouteDecision.SIMPLE,
    "complex": RouteDecision.COMPLEX,
    "external": RouteDecision.EXTERNAL,
}

DEFAULT_MAX_SUB_QUERIES = 4


@dataclass(frozen=True)
class TransformedQuery:
    original: str
    rewritten: str
    route: RouteDecision
    sub_queries: tuple[str, ...] = ()
    hyde_document: str | None = None

    def __post_init__(self) -> None:
        if not self.rewritten:
            raise ValueError("rewritten query must be non-empty")
        if self.route is RouteDecision.SIMPLE and (
            self.sub_queries or self.hyde_document is not None
        ):
            raise ValueError("simple route carries no sub-queries or hyde document")


class QueryTransformer:
    def __init__(self, generator: Generator, catalog: PromptCatalog):
        self._generator = generator
        self._catalog = catalog

    def _ask(self, key: str, **fields: str) -> str:
        system, user = self._catalog.render(key, **fields)
        return self._generator.complete(user, system)

    def route(self, query: str) -> RouteDecision:
        """Classify the query as simple, complex, or external."""
        _check_query(query)
        response = self._ask("route", query=query)
        words = response.strip().split()
        if words:
            return _ROUTE_WORDS.get(words[0].lower(), RouteDecision.COMPLEX)
        return RouteDecision.COMPLEX

    def rewrite(self, query: str) -> str:
        """Keyword-rich rewriting; blank generator output keeps the original."""
        _check_query(query)
        rewritten = self._ask("rewrite", query=query).strip()
        return rewritten or query

    def decompose(
        self, query: str, max_subs: int = DEFAULT_MAX_SUB_QUERIES
    ) -> list[str]:
        """Sub-queries parsed one per line; single-faceted queries yield []."""
        _check_query(query)
        if max_subs < 1:
            raise ValueError("max_subs must be >= 1")
        response = self._ask("decompose", query=query)
        lines = [line.strip() for line in response.splitlines()]
        return [line for line in lines if line][:max_subs]

    def hyde(self, query: str) -> str:
        """Hypothetical answer passage; blank output falls back to the query."""
        _check_query(query)
        passage = self._ask("hyde", query=query).strip()
        return passage or query


def _check_query(query: str) -> None:
    if not query:
        raise ValueError("query must be non-empty")
