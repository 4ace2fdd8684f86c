"""Structure-aware Markdown splitting.

Splits at configurable heading levels (H2/H3 by default), never cuts
inside a fenced code block, and falls back to blank-line paragraph
boundaries when a section outgrows the size budget. Chunk contents are
verbatim slices of the source, so concatenating them reproduces the
document exactly and ``char_span``s partition ``[0, len(content))``.

A chunk's ``heading_path`` is the stack of H1..H3 headings in effect at
its first body line; heading lines themselves open the chunk they title.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import yaml

from .errors import EmptyDocumentError
from .types import Chunk, Document

_HEADING_RE = re.compile(r"^(#{1,6})(\s+.*)?$")
_FRONT_MATTER_RE = re.compile(
    r"\A---[ \t]*\n(.*?)\n(?:---|\.\.\.)[ \t]*(?:\n|\Z)", re.DOTALL
)

# Only headings up to this level contribute to heading_path.
_PATH_MAX_LEVEL = 3


@dataclass(frozen=True)
class SplitterConfig:
    max_chunk_chars: int = 1500
    split_heading_levels: frozenset[int] = frozenset({2, 3})

    def __post_init__(self) -> None:
        if self.max_chunk_chars < 100:
            raise ValueError("max_chunk_chars must be >= 100")
        levels = frozenset(self.split_heading_levels)
        if not levels or not levels.issubset(range(1, 7)):
            raise ValueError("split_heading_levels must be a non-empty subset of 1..6")
        object.__setattr__(self, "split_heading_levels", levels)


@dataclass(frozen=True)
class CodeSpan:
    """Half-open offset range of a fenced code block, fences included."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise ValueError(f"invalid code span ({self.start}, {self.end})")


@dataclass
class _Line:
    start: int
    end: int  # exclusive, includes the trailing newline if present
    text: str  # without the trailing newline
    in_code: bool = False
    heading_level: int = 0
    heading_text: str = ""

    @property
    def is_blank(self) -> bool:
        return not self.text.strip()

    @property
    def is_heading(self) -> bool:
        return self.heading_level > 0 and not self.in_code

    @property
    def is_body(self) -> bool:
        # Lines inside code fences always count as body, blank or not.
        return self.in_code or (not self.is_blank and not self.is_heading)


def detect_code_blocks(markdown: str) -> list[CodeSpan]:
    """Find fenced regions delimited by lines starting with ``` .

    The span covers both fence lines and the body; an unclosed fence
    extends to the end of the document. Spans are disjoint and sorted.
    """
    spans: list[CodeSpan] = []
    open_start: int | None = None
    offset = 0
    for line in markdown.splitlines(keepends=True):
        stripped = line.rstrip("\n")
        if stripped.startswith("```"):
            if open_start is None:
                open_start = offset
            else:
                spans.append(CodeSpan(open_start, offset + len(stripped)))
                open_start = None
        offset += len(line)
    if open_start is not None and len(markdown) > open_start:
        spans.append(CodeSpan(open_start, len(markdown)))
    return spans


def parse_front_matter(text: str) -> tuple[dict[str, str], str]:
    """Extract a leading YAML front-matter block.

    Returns (metadata, remaining content). Scalar values are stringified;
    nested values are ignored. Malformed front matter is left in place.
    """
    match = _FRONT_MATTER_RE.match(text)
    if not match:
        return {}, text
    try:
        data = yaml.safe_load(match.group(1))
    except yaml.YAMLError:
        return {}, text
    if not isinstance(data, dict):
        return {}, text
    metadata = {
        str(k): str(v)
        for k, v in data.items()
        if isinstance(v, (str, int, float, bool))
    }
    return metadata, text[match.end() :]


def chunk_id_for(doc_id: str, span: tuple[int, int]) -> str:
    """Deterministic chunk identity from document id and position."""
    digest = hashlib.sha256(f"{doc_id}:{span[0]}:{span[1]}".encode()).hexdigest()
    return digest[:16]


def split_document(doc: Document, cfg: SplitterConfig | None = None) -> list[Chunk]:
    """Split a document into ordered chunks at structural boundaries."""
    cfg = cfg or SplitterConfig()
    content = doc.content
    if not content.strip():
        raise EmptyDocumentError(f"document {doc.id!r} has no content")

    lines = _scan_lines(content)
    segments = _heading_segments(lines, content, cfg.split_heading_levels)
    chunk_spans: list[tuple[int, int]] = []
    for seg_start, seg_end in segments:
        if seg_end - seg_start <= cfg.max_chunk_chars:
            chunk_spans.append((seg_start, seg_end))
        else:
            chunk_spans.extend(
                _pack_paragraphs(lines, seg_start, seg_end, cfg.max_chunk_chars)
            )

    paths = _heading_paths(lines, chunk_spans)
    chunks = []
    for span, path in zip(chunk_spans, paths):
        start, end = span
        chunks.append(
            Chunk(
                id=chunk_id_for(doc.id, span),
                doc_id=doc.id,
                content=content[start:end],
                heading_path=path,
                partition_key=doc.partition_key,
                char_span=span,
                metadata=dict(doc.metadata),
            )
        )
    return chunks


def _scan_lines(content: str) -> list[_Line]:
    spans = detect_code_blocks(content)
    lines: list[_Line] = []
    offset = 0
    span_i = 0
    for raw in content.splitlines(keepends=True):
        text = raw.rstrip("\n")
        line = _Line(start=offset, end=offset + len(raw), text=text)
        while span_i < len(spans) and offset >= spans[span_i].end:
            span_i += 1
        if span_i < len(spans) and spans[span_i].start <= offset < spans[span_i].end:
            line.in_code = True
        else:
            m = _HEADING_RE.match(text)
            if m:
                line.heading_level = len(m.group(1))
                line.heading_text = (m.group(2) or "").strip()
        lines.append(line)
        offset += len(raw)
    return lines


def _heading_segments(
    lines: list[_Line], content: str, split_levels: frozenset[int]
) -> list[tuple[int, int]]:
    """Cut at split-level headings, then fold bodyless segments forward.

    A segment holding only headings and blank lines (e.g. a lone H1
    title before the first H2) is merged into the segment that follows,
    so every emitted segment has body content — except when the whole
    document is bodyless, which yields a single segment.
    """
    cuts = [0]
    for line in lines:
        if line.is_heading and line.heading_level in split_levels and line.start != 0:
            cuts.append(line.start)
    cuts.append(len(content))

    raw_segments = [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]
    has_body = _body_presence(lines, raw_segments)

    merged: list[tuple[int, int]] = []
    carry_start: int | None = None
    for (start, end), body in zip(raw_segments, has_body):
        if not body:
            if carry_start is None:
                carry_start = start
            continue
        merged.append((carry_start if carry_start is not None else start, end))
        carry_start = None
    if carry_start is not None:
        if merged:
            merged[-1] = (merged[-1][0], len(content))
        else:
            merged = [(carry_start, len(content))]
    return merged


def _body_presence(
    lines: list[_Line], segments: list[tuple[int, int]]
) -> list[bool]:
    result = []
    li = 0
    for start, end in segments:
        body = False
        while li < len(lines) and lines[li].start < end:
            if lines[li].start >= start and lines[li].is_body:
                body = True
            li += 1
        result.append(body)
    return result


def _pack_paragraphs(
    lines: list[_Line], seg_start: int, seg_end: int, max_chars: int
) -> list[tuple[int, int]]:
    """Greedily pack paragraph atoms of an oversize section.

    Atoms are runs of lines separated by blank lines outside code
    fences; blank separator lines stay attached to the preceding atom.
    A single atom longer than the budget (typically an atomic code
    block) becomes its own oversize chunk.
    """
    atoms: list[tuple[int, int]] = []
    atom_start: int | None = None
    has_content = False
    gap_seen = False
    for line in lines:
        if line.start < seg_start or line.start >= seg_end:
            continue
        blank_outside = line.is_blank and not line.in_code
        if atom_start is None:
            atom_start = line.start
            has_content = not blank_outside
            continue
        if blank_outside:
            gap_seen = has_content
            continue
        if gap_seen:
            atoms.append((atom_start, line.start))
            atom_start = line.start
            gap_seen = False
        has_content = True
    if atom_start is not None:
        atoms.append((atom_start, seg_end))

    packed: list[tuple[int, int]] = []
    cur_start, cur_end = atoms[0]
    for a_start, a_end in atoms[1:]:
        if a_end - cur_start > max_chars and cur_end > cur_start:
            packed.append((cur_start, cur_end))
            cur_start = a_start
        cur_end = a_end
    packed.append((cur_start, cur_end))
    return packed


def _heading_paths(
    lines: list[_Line], chunk_spans: list[tuple[int, int]]
) -> list[tuple[str, ...]]:
    """Heading stack at each chunk's first body line.

    Leading heading lines are consumed into the stack before the
    snapshot, so a chunk opening with "# T" then "## A" gets path
    (T, A). Headings after body only affect later chunks.
    """
    stack: list[tuple[int, str]] = []
    paths: list[tuple[str, ...]] = []
    li = 0
    for start, end in chunk_spans:
        pending = True
        path: tuple[str, ...] = ()
        while li < len(lines) and lines[li].start < end:
            line = lines[li]
            li += 1
            if line.is_heading:
                while stack and stack[-1][0] >= line.heading_level:
                    stack.pop()
                stack.append((line.heading_level, line.heading_text))
                continue
            if pending and line.is_body:
                path = _snapshot(stack)
                pending = False
        if pending:
            path = _snapshot(stack)
        paths.append(path)
    return paths


def _snapshot(stack: list[tuple[int, str]]) -> tuple[str, ...]:
    return tuple(text for level, text in stack if level <= _PATH_MAX_LEVEL)
