"""Operator command line: ingest corpora, serve, query, evaluate.

    ragengine [--config FILE] [--mock] [--snapshot PATH] ingest --input DIR --partition KEY
    ragengine ... serve --transport stdio|http [--bind ADDR]
    ragengine ... query --text STR [--search-only] [--no-cache] [--partition KEY]
    ragengine ... eval --dataset FILE [--no-cache] [--output PREFIX]

``--mock`` swaps the whole model gateway for deterministic mocks so the
full pipeline runs offline. All subcommands exit non-zero on error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import AppConfig, load_config
from .errors import GatewayError, RagEngineError
from .evaluation import format_summary, run_eval, write_report
from .gateway import http_gateway, mock_gateway
from .gateway.base import Gateway
from .pipeline import Pipeline
from .prompts import PromptCatalog
from .retrieval import HybridIndex
from .server import ToolServer
from .splitter import parse_front_matter, split_document
from .types import Document

logger = logging.getLogger(__name__)


@dataclass
class IngestSummary:
    docs: int = 0
    chunks: int = 0
    skipped: int = 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(
            args.config,
            flag_overrides={
                "snapshot_path": args.snapshot,
                "mock": True if args.mock else None,
                "partition": getattr(args, "partition", None),
            },
        )
        return args.handler(args, cfg)
    except RagEngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragengine",
        description="Retrieval-augmented generation engine and tool server.",
    )
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("--mock", action="store_true",
                        help="use deterministic mock model backends")
    parser.add_argument("--snapshot", help="index snapshot path")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="split, embed and index markdown files")
    p_ingest.add_argument("--input", required=True, help="directory of *.md files")
    p_ingest.add_argument("--partition", required=True, help="default partition key")
    p_ingest.set_defaults(handler=cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the JSON-RPC tool server")
    p_serve.add_argument("--transport", choices=["stdio", "http"], default="stdio")
    p_serve.add_argument("--bind", default="127.0.0.1:8080",
                         help="host:port for the http transport")
    p_serve.set_defaults(handler=cmd_serve)

    p_query = sub.add_parser("query", help="one-shot chat or search")
    p_query.add_argument("--text", required=True, help="the question or search text")
    p_query.add_argument("--search-only", action="store_true",
                         help="retrieval only, no generation")
    p_query.add_argument("--no-cache", action="store_true",
                         help="bypass the semantic cache")
    p_query.add_argument("--partition", help="partition key override")
    p_query.set_defaults(handler=cmd_query)

    p_eval = sub.add_parser("eval", help="run the evaluation harness")
    p_eval.add_argument("--dataset", required=True, help="line-JSON dataset file")
    p_eval.add_argument("--no-cache", action="store_true",
                        help="disable the semantic cache for every sample")
    p_eval.add_argument("--output", help="report file prefix (.jsonl/.txt)")
    p_eval.add_argument("--parallelism", type=int, default=1)
    p_eval.set_defaults(handler=cmd_eval)

    return parser


# ----------------------------------------------------------------------
# wiring
# ----------------------------------------------------------------------


def _gateway_for(cfg: AppConfig) -> Gateway:
    if cfg.mock:
        return mock_gateway(dim=cfg.gateway.embedding_dim)
    return http_gateway(cfg.gateway)


def _catalog_for(cfg: AppConfig) -> PromptCatalog:
    if cfg.prompt_catalog_path:
        return PromptCatalog.load(cfg.prompt_catalog_path)
    return PromptCatalog.load_default()


def _load_index(cfg: AppConfig) -> HybridIndex:
    path = Path(cfg.snapshot_path)
    if not path.exists():
        raise RagEngineError(
            f"index snapshot {path} not found; run 'ragengine ingest' first"
        )
    return HybridIndex.load(path)


def _pipeline_for(cfg: AppConfig, index: HybridIndex) -> Pipeline:
    return Pipeline(
        gateway=_gateway_for(cfg),
        index=index,
        config=cfg.pipeline,
        catalog=_catalog_for(cfg),
    )


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: AppConfig) -> int:
    input_dir = Path(args.input)
    if not input_dir.is_dir():
        print(f"error: input directory {input_dir} does not exist", file=sys.stderr)
        return 2
    gateway = _gateway_for(cfg)
    index = HybridIndex()
    summary = IngestSummary()
    for md_path in sorted(input_dir.rglob("*.md")):
        try:
            text = md_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            logger.warning("skipping unreadable file %s: %s", md_path, exc)
            summary.skipped += 1
            continue
        metadata, content = parse_front_matter(text)
        partition = metadata.pop("partition", args.partition)
        doc_id = md_path.relative_to(input_dir).as_posix()
        if not content.strip():
            logger.warning("skipping empty document %s", md_path)
            summary.skipped += 1
            continue
        doc = Document(
            id=doc_id,
            source_path=str(md_path),
            content=content,
            partition_key=partition,
            metadata=metadata,
        )
        chunks = split_document(doc, cfg.splitter)
        try:
            items = []
            for batch_start in range(0, len(chunks), cfg.embed_batch_size):
                batch = chunks[batch_start : batch_start + cfg.embed_batch_size]
                vectors = gateway.embedder.embed([c.content for c in batch])
                items.extend(zip(batch, vectors))
        except GatewayError as exc:
            print(
                f"error: embedder failed on {md_path}: {exc}\n"
                f"partial progress: {summary.docs} docs / {summary.chunks} chunks "
                "indexed before the failure; snapshot NOT written",
                file=sys.stderr,
            )
            return 2
        index.upsert_chunks(items)
        summary.docs += 1
        summary.chunks += len(chunks)
    index.save(cfg.snapshot_path)
    print(
        f"ingested docs={summary.docs} chunks={summary.chunks} "
        f"skipped={summary.skipped} -> {cfg.snapshot_path}"
    )
    return 0


def cmd_serve(args: argparse.Namespace, cfg: AppConfig) -> int:
    index = _load_index(cfg)
    pipeline = _pipeline_for(cfg, index)
    server = ToolServer(
        pipeline, protocol_version=cfg.protocol_version, server_version=__version__
    )
    if args.transport == "stdio":
        try:
            server.serve_stdio()
        except KeyboardInterrupt:
            pass
        return 0
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: invalid --bind address {args.bind!r}", file=sys.stderr)
        return 2
    http_server = server.serve_http(host, int(port))
    print(f"listening on http://{host}:{port}/rpc", file=sys.stderr)
    try:
        http_server.serve_forever()
    except KeyboardInterrupt:
        http_server.shutdown()
    return 0


def cmd_query(args: argparse.Namespace, cfg: AppConfig) -> int:
    index = _load_index(cfg)
    pipeline = _pipeline_for(cfg, index)
    if args.search_only:
        results = pipeline.search(args.text, partition=args.partition)
        for sc in results:
            heading = " > ".join(sc.chunk.heading_path)
            print(f"{sc.score:8.4f}  {sc.chunk.id}  [{heading}]")
            print(f"          {sc.chunk.content.strip()[:200]}")
        if not results:
            print("(no results)")
        return 0
    result = pipeline.chat(
        args.text,
        partition=args.partition,
        use_cache=False if args.no_cache else None,
    )
    print(f"answer: {result.answer}")
    print(
        f"route={result.route.value if result.route else 'cache'} "
        f"cache_hit={result.cache_hit} hops={result.hops_used} "
        f"verdict={result.verdict.value if result.verdict else '-'}"
    )
    for sid, score in result.sources:
        print(f"source: {sid} ({score:.4f})")
    timings = ", ".join(f"{k}={v:.1f}ms" for k, v in sorted(result.timings.items()))
    print(f"timings: {timings}")
    return 0


def cmd_eval(args: argparse.Namespace, cfg: AppConfig) -> int:
    index = _load_index(cfg)
    pipeline = _pipeline_for(cfg, index)
    report = run_eval(
        args.dataset,
        pipeline,
        no_cache=args.no_cache,
        parallelism=args.parallelism,
        factuality=not cfg.mock,
    )
    print(format_summary(report), end="")
    if args.output:
        rows_path, summary_path = write_report(report, args.output)
        print(f"report rows: {rows_path}")
        print(f"report summary: {summary_path}")
    else:
        print(json.dumps(report.aggregates, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
