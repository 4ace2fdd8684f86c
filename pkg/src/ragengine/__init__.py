"""ragengine: a self-contained retrieval-augmented generation engine.

Structure-aware Markdown ingestion, hybrid dense+BM25 retrieval with
reciprocal rank fusion and metadata boosting, semantic answer caching,
adaptive routing, corrective post-retrieval, and a JSON-RPC 2.0 tool
server — with every model backend behind a pluggable contract so the
whole pipeline runs deterministically on mocks.
"""

__version__ = "0.1.0"

from .cache import CacheConfig, CacheEntry, CacheHit, SemanticCache, is_fuzzy
from .errors import (
    ConfigError,
    DatasetError,
    DegenerateVectorError,
    DimensionError,
    EmptyDocumentError,
    GatewayError,
    RagEngineError,
    StageError,
)
from .pipeline import ChatResult, Pipeline, PipelineConfig
from .post_retrieval import CragConfig, CragOutcome, compress, crag_evaluate, rerank
from .pre_retrieval import QueryTransformer, TransformedQuery
from .retrieval import (
    Bm25Config,
    BoostRule,
    HybridIndex,
    RrfConfig,
    apply_boost,
    rrf_fuse,
)
from .server import ToolServer
from .splitter import CodeSpan, SplitterConfig, detect_code_blocks, split_document
from .text import normalize_answer, tokenize
from .types import Chunk, CragVerdict, Document, RouteDecision, ScoredChunk
from .vectors import EmbeddingVector, cosine_similarity

__all__ = [
    "__version__",
    "CacheConfig",
    "CacheEntry",
    "CacheHit",
    "SemanticCache",
    "is_fuzzy",
    "ConfigError",
    "DatasetError",
    "DegenerateVectorError",
    "DimensionError",
    "EmptyDocumentError",
    "GatewayError",
    "RagEngineError",
    "StageError",
    "ChatResult",
    "Pipeline",
    "PipelineConfig",
    "CragConfig",
    "CragOutcome",
    "compress",
    "crag_evaluate",
    "rerank",
    "QueryTransformer",
    "TransformedQuery",
    "Bm25Config",
    "BoostRule",
    "HybridIndex",
    "RrfConfig",
    "apply_boost",
    "rrf_fuse",
    "ToolServer",
    "CodeSpan",
    "SplitterConfig",
    "detect_code_blocks",
    "split_document",
    "normalize_answer",
    "tokenize",
    "Chunk",
    "CragVerdict",
    "Document",
    "RouteDecision",
    "ScoredChunk",
    "EmbeddingVector",
    "cosine_similarity",
]
