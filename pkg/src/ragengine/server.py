"""JSON-RPC 2.0 tool server exposing the pipeline.

Two tools are registered: ``rag_chat`` (the stateful chat workflow) and
``rag_search`` (the stateless retrieval workflow). Supported methods are
``initialize``, ``tools/list`` and ``tools/call``; requests without an
id are notifications and receive no response. Transports: newline-
delimited JSON-RPC on stdio (sequential) and HTTP POST /rpc (concurrent,
errors travel in-band with HTTP 200).
"""

from __future__ import annotations

import json
import logging
import sys
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, IO

from .errors import RagEngineError, StageError
from .pipeline import Pipeline

logger = logging.getLogger(__name__)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603

DEFAULT_PROTOCOL_VERSION = "2024-11-05"
SERVER_NAME = "ragengine"


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    input_schema: dict

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
        }


TOOLS = (
    ToolDescriptor(
        name="rag_chat",
        description=(
            "Answer a question from the indexed knowledge base, with "
            "semantic caching, adaptive routing and corrective retrieval."
        ),
        input_schema={
            "type": "object",
            "properties": {
                "query": {"type": "string", "description": "The user question."},
                "no_cache": {
                    "type": "boolean",
                    "description": "Bypass the semantic cache for this request.",
                },
                "partition": {
                    "type": "string",
                    "description": "Restrict retrieval to this partition key.",
                },
            },
            "required": ["query"],
        },
    ),
    ToolDescriptor(
        name="rag_search",
        description="Retrieve and rerank document chunks without generating.",
        input_schema={
            "type": "object",
            "properties": {
                "query": {"type": "string", "description": "The search query."},
                "top_k": {
                    "type": "integer",
                    "minimum": 1,
                    "description": "Number of results to return.",
                },
                "partition": {
                    "type": "string",
                    "description": "Restrict retrieval to this partition key.",
                },
            },
            "required": ["query"],
        },
    ),
)


class _RpcError(Exception):
    def __init__(self, code: int, message: str, data: Any = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.data = data


class ToolServer:
    def __init__(
        self,
        pipeline: Pipeline,
        protocol_version: str = DEFAULT_PROTOCOL_VERSION,
        server_version: str = "0.1.0",
    ):
        self.pipeline = pipeline
        self.protocol_version = protocol_version
        self.server_version = server_version

    # ------------------------------------------------------------------
    # request handling
    # ------------------------------------------------------------------

    def handle_request(self, raw: str) -> str | None:
        """One JSON-RPC envelope in, one response out (None for notifications)."""
        try:
            envelope = json.loads(raw)
        except (json.JSONDecodeError, TypeError):
            return json.dumps(_error_response(None, PARSE_ERROR, "Parse error"))
        response = self._handle_envelope(envelope)
        return None if response is None else json.dumps(response)

    def _handle_envelope(self, envelope: Any) -> dict | None:
        if not isinstance(envelope, dict):
            return _error_response(None, INVALID_REQUEST, "Invalid request")
        request_id = envelope.get("id")
        is_notification = "id" not in envelope
        if envelope.get("jsonrpc") != "2.0" or not isinstance(
            envelope.get("method"), str
        ):
            if is_notification:
                return None
            return _error_response(request_id, INVALID_REQUEST, "Invalid request")
        try:
            result = self._dispatch(envelope["method"], envelope.get("params") or {})
        except _RpcError as exc:
            if is_notification:
                return None
            return _error_response(request_id, exc.code, exc.message, exc.data)
        if is_notification:
            return None
        return {"jsonrpc": "2.0", "id": request_id, "result": result}

    def _dispatch(self, method: str, params: Any) -> dict:
        if not isinstance(params, dict):
            raise _RpcError(INVALID_PARAMS, "params must be an object")
        if method == "initialize":
            return {
                "protocolVersion": self.protocol_version,
                "capabilities": {"tools": {}},
                "serverInfo": {
                    "name": SERVER_NAME,
                    "version": self.server_version,
                },
            }
        if method == "tools/list":
            return {"tools": [tool.as_dict() for tool in TOOLS]}
        if method == "tools/call":
            return self._call_tool(params)
        if method.startswith("notifications/"):
            return {}
        raise _RpcError(METHOD_NOT_FOUND, f"Method not found: {method}")

    def _call_tool(self, params: dict) -> dict:
        name = params.get("name")
        arguments = params.get("arguments") or {}
        if not isinstance(arguments, dict):
            raise _RpcError(INVALID_PARAMS, "arguments must be an object")
        if name == "rag_chat":
            payload = self._tool_rag_chat(arguments)
        elif name == "rag_search":
            payload = self._tool_rag_search(arguments)
        else:
            raise _RpcError(INVALID_PARAMS, f"Unknown tool: {name}")
        return {
            "content": [
                {"type": "text", "text": json.dumps(payload, ensure_ascii=False)}
            ],
            "isError": False,
        }

    def _tool_rag_chat(self, args: dict) -> dict:
        query = _require_query(args)
        no_cache = args.get("no_cache")
        if no_cache is not None and not isinstance(no_cache, bool):
            raise _RpcError(INVALID_PARAMS, "no_cache must be a boolean")
        partition = _optional_str(args, "partition")
        try:
            result = self.pipeline.chat(
                query,
                partition=partition,
                use_cache=None if no_cache is None else not no_cache,
            )
        except RagEngineError as exc:
            raise _internal_error(exc) from exc
        return {
            "answer": result.answer,
            "sources": [[sid, score] for sid, score in result.sources],
            "route": result.route.value if result.route else None,
            "cache_hit": result.cache_hit,
            "hops_used": result.hops_used,
            "verdict": result.verdict.value if result.verdict else None,
            "warnings": list(result.warnings),
            "timings_ms": result.timings,
        }

    def _tool_rag_search(self, args: dict) -> dict:
        query = _require_query(args)
        top_k = args.get("top_k")
        if top_k is not None and (not isinstance(top_k, int) or top_k < 1):
            raise _RpcError(INVALID_PARAMS, "top_k must be an integer >= 1")
        partition = _optional_str(args, "partition")
        try:
            results = self.pipeline.search(query, partition=partition, top_k=top_k)
        except RagEngineError as exc:
            raise _internal_error(exc) from exc
        return {
            "results": [
                {
                    "chunk_id": sc.chunk.id,
                    "score": sc.score,
                    "stage": sc.stage,
                    "content": sc.chunk.content,
                    "heading_path": list(sc.chunk.heading_path),
                    "partition": sc.chunk.partition_key,
                }
                for sc in results
            ]
        }

    # ------------------------------------------------------------------
    # transports
    # ------------------------------------------------------------------

    def serve_stdio(
        self, stdin: IO[str] | None = None, stdout: IO[str] | None = None
    ) -> None:
        """Newline-delimited JSON-RPC until EOF; requests run sequentially."""
        stdin = stdin if stdin is not None else sys.stdin
        stdout = stdout if stdout is not None else sys.stdout
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            response = self.handle_request(line)
            if response is not None:
                stdout.write(response + "\n")
                stdout.flush()

    def serve_http(self, host: str = "127.0.0.1", port: int = 8080) -> "RpcHttpServer":
        """Start the HTTP transport; caller owns serve_forever/shutdown."""
        return RpcHttpServer(self, host, port)


class RpcHttpServer:
    """HTTP POST /rpc transport; one envelope per request, errors in-band."""

    def __init__(self, tool_server: ToolServer, host: str, port: int):
        handler = _make_handler(tool_server)
        try:
            self._httpd = ThreadingHTTPServer((host, port), handler)
        except OSError as exc:
            raise RagEngineError(f"failed to bind {host}:{port}: {exc}") from exc
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._httpd.server_address[:2]
        return str(host), int(port)

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def start_background(self) -> None:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def shutdown(self) -> None:
        """Stop accepting requests and finish in-flight ones."""
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=10)


def _make_handler(tool_server: ToolServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def do_POST(self) -> None:  # noqa: N802 (stdlib naming)
            if self.path != "/rpc":
                self.send_error(404, "Not found")
                return
            length = int(self.headers.get("Content-Length", 0))
            body = self.rfile.read(length).decode("utf-8", errors="replace")
            response = tool_server.handle_request(body)
            if response is None:
                self.send_response(204)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            payload = response.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, fmt: str, *args: Any) -> None:
            logger.debug("http: " + fmt, *args)

    return Handler


def _require_query(args: dict) -> str:
    query = args.get("query")
    if not isinstance(query, str) or not query.strip():
        raise _RpcError(INVALID_PARAMS, "missing required parameter: query")
    return query


def _optional_str(args: dict, key: str) -> str | None:
    value = args.get(key)
    if value is None:
        return None
    if not isinstance(value, str) or not value:
        raise _RpcError(INVALID_PARAMS, f"{key} must be a non-empty string")
    return value


def _internal_error(exc: RagEngineError) -> _RpcError:
    stage = exc.stage if isinstance(exc, StageError) else None
    return _RpcError(INTERNAL_ERROR, str(exc), data={"stage": stage})


def _error_response(request_id: Any, code: int, message: str, data: Any = None) -> dict:
    error: dict[str, Any] = {"code": code, "message": message}
    if data is not None:
        error["data"] = data
    return {"jsonrpc": "2.0", "id": request_id, "error": error}
