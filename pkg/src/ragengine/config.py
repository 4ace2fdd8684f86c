"""Application configuration: file < environment < flags.

The config file is YAML; unknown keys are rejected up front so typos
fail before any work starts. Precedence for every key is
flag > environment > config file > built-in default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .cache import CacheConfig
from .errors import ConfigError
from .gateway.base import GatewayConfig, ServiceConfig
from .pipeline import PipelineConfig
from .post_retrieval import CragConfig
from .retrieval import BoostRule, RrfConfig
from .splitter import SplitterConfig

ENV_SNAPSHOT = "RAGENGINE_SNAPSHOT"
ENV_PARTITION = "RAGENGINE_PARTITION"

DEFAULT_SNAPSHOT_PATH = "index.snapshot.json"


@dataclass
class AppConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    splitter: SplitterConfig = field(default_factory=SplitterConfig)
    snapshot_path: str = DEFAULT_SNAPSHOT_PATH
    prompt_catalog_path: str | None = None
    mock: bool = False
    embed_batch_size: int = 32
    protocol_version: str = "2024-11-05"

    def __post_init__(self) -> None:
        if self.embed_batch_size < 1:
            raise ConfigError("embed_batch_size must be >= 1")


def load_config(
    config_file: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    flag_overrides: Mapping[str, Any] | None = None,
) -> AppConfig:
    """Merge file, environment and flag values into a validated AppConfig."""
    env = os.environ if env is None else env
    flag_overrides = flag_overrides or {}

    data: dict[str, Any] = {}
    if config_file is not None:
        try:
            loaded = yaml.safe_load(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{config_file}: top level must be a mapping")
        data = loaded

    _check_keys(
        data,
        {
            "snapshot_path",
            "prompt_catalog",
            "mock",
            "embed_batch_size",
            "embedding_dim",
            "protocol_version",
            "pipeline",
            "splitter",
            "gateway",
        },
        context="config",
    )

    snapshot_path = _pick(
        flag_overrides.get("snapshot_path"),
        env.get(ENV_SNAPSHOT),
        data.get("snapshot_path"),
        DEFAULT_SNAPSHOT_PATH,
    )
    partition = _pick(
        flag_overrides.get("partition"),
        env.get(ENV_PARTITION),
        _dig(data, "pipeline", "partition_key"),
        "default",
    )

    try:
        pipeline_cfg = _build_pipeline_config(data.get("pipeline") or {}, partition)
        splitter_cfg = _build_splitter_config(data.get("splitter") or {})
        gateway_cfg = _build_gateway_config(
            data.get("gateway") or {}, data.get("embedding_dim", 64)
        )
        cfg = AppConfig(
            gateway=gateway_cfg,
            pipeline=pipeline_cfg,
            splitter=splitter_cfg,
            snapshot_path=str(snapshot_path),
            prompt_catalog_path=data.get("prompt_catalog"),
            mock=bool(_pick(flag_overrides.get("mock"), data.get("mock"), False)),
            embed_batch_size=int(data.get("embed_batch_size", 32)),
            protocol_version=str(data.get("protocol_version", "2024-11-05")),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return cfg


def _pick(*values: Any) -> Any:
    for value in values:
        if value is not None:
            return value
    return None


def _dig(data: dict, *keys: str) -> Any:
    node: Any = data
    for key in keys:
        if not isinstance(node, dict):
            return None
        node = node.get(key)
    return node


def _check_keys(data: dict, allowed: set[str], context: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")


def _build_pipeline_config(raw: dict, partition: str) -> PipelineConfig:
    _check_keys(
        raw,
        {
            "top_k_retrieve",
            "top_n_rerank",
            "max_hops",
            "use_cache",
            "partition_key",
            "boost_rules",
            "rrf",
            "crag",
            "cache",
            "web_top_k",
            "max_sub_queries",
        },
        context="pipeline",
    )
    rrf_raw = raw.get("rrf") or {}
    _check_keys(rrf_raw, {"k"}, context="pipeline.rrf")
    crag_raw = raw.get("crag") or {}
    _check_keys(
        crag_raw,
        {"upper_threshold", "lower_threshold", "evaluator_prompt_key"},
        context="pipeline.crag",
    )
    cache_raw = raw.get("cache") or {}
    _check_keys(
        cache_raw,
        {
            "default_threshold",
            "fuzzy_threshold",
            "default_ttl_seconds",
            "max_entries",
            "fuzzy_markers",
        },
        context="pipeline.cache",
    )
    boost_rules = []
    for rule in raw.get("boost_rules") or []:
        _check_keys(dict(rule), {"key", "value", "factor"}, context="boost rule")
        boost_rules.append(
            BoostRule(
                metadata_key=str(rule["key"]),
                metadata_value=str(rule["value"]),
                factor=float(rule.get("factor", 1.2)),
            )
        )
    cache_kwargs: dict[str, Any] = dict(cache_raw)
    if "fuzzy_markers" in cache_kwargs:
        cache_kwargs["fuzzy_markers"] = tuple(cache_kwargs["fuzzy_markers"])
    return PipelineConfig(
        top_k_retrieve=int(raw.get("top_k_retrieve", 20)),
        top_n_rerank=int(raw.get("top_n_rerank", 5)),
        max_hops=int(raw.get("max_hops", 2)),
        use_cache=bool(raw.get("use_cache", True)),
        partition_key=str(partition),
        boost_rules=tuple(boost_rules),
        rrf=RrfConfig(**rrf_raw),
        crag=CragConfig(**crag_raw),
        cache=CacheConfig(**cache_kwargs),
        web_top_k=int(raw.get("web_top_k", 5)),
        max_sub_queries=int(raw.get("max_sub_queries", 4)),
    )


def _build_splitter_config(raw: dict) -> SplitterConfig:
    _check_keys(raw, {"max_chunk_chars", "split_heading_levels"}, context="splitter")
    kwargs: dict[str, Any] = {}
    if "max_chunk_chars" in raw:
        kwargs["max_chunk_chars"] = int(raw["max_chunk_chars"])
    if "split_heading_levels" in raw:
        kwargs["split_heading_levels"] = frozenset(
            int(level) for level in raw["split_heading_levels"]
        )
    return SplitterConfig(**kwargs)


def _build_gateway_config(raw: dict, embedding_dim: int) -> GatewayConfig:
    _check_keys(
        raw, {"embedder", "generator", "reranker", "websearch"}, context="gateway"
    )
    defaults = GatewayConfig(embedding_dim=int(embedding_dim))

    def service(name: str, base: ServiceConfig) -> ServiceConfig:
        entry = raw.get(name) or {}
        _check_keys(
            entry,
            {"base_url", "api_key_env", "model_name", "timeout_seconds", "retry_count"},
            context=f"gateway.{name}",
        )
        return ServiceConfig(
            base_url=str(entry.get("base_url", base.base_url)),
            api_key_env=str(entry.get("api_key_env", base.api_key_env)),
            model_name=str(entry.get("model_name", base.model_name)),
            timeout_seconds=float(entry.get("timeout_seconds", base.timeout_seconds)),
            retry_count=int(entry.get("retry_count", base.retry_count)),
        )

    return GatewayConfig(
        embedder=service("embedder", defaults.embedder),
        generator=service("generator", defaults.generator),
        reranker=service("reranker", defaults.reranker),
        websearch=service("websearch", defaults.websearch),
        embedding_dim=int(embedding_dim),
    )
