"""Text primitives: tokenization, answer normalization, token overlap."""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable

# Unicode-aware alphanumeric runs; underscores are separators.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_TERMINAL_PUNCT_RE = re.compile(r"[.!?]+$")

# Small function-word list used when stripping queries down to content
# words (mock rewriting, context compression). Deliberately short: this
# is a filter, not linguistics.
STOPWORDS = frozenset(
    """
    a an the is are was were be been being am do does did done have has had
    i you he she it we they me him her us them my your his its our their
    this that these those what which who whom whose when where why how
    of in on at by for with to from as into over under about against
    and or but not no nor so if then than too very just only also
    can could should would will shall may might must
    here there all any both each few more most other some such own same
    up down out off again further once
    please hey hi hello thanks thank tell show give let know want need like
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Split on non-alphanumeric boundaries, lowercase, drop empties."""
    return _TOKEN_RE.findall(text.lower())


def normalize_answer(text: str) -> str:
    """Canonical form for exact-match comparison.

    Lowercase, collapse whitespace runs, strip terminal sentence
    punctuation. Idempotent.
    """
    t = " ".join(text.lower().split())
    t = _TERMINAL_PUNCT_RE.sub("", t)
    return t.strip()


def content_tokens(text: str) -> list[str]:
    """Tokens with function words removed."""
    return [t for t in tokenize(text) if t not in STOPWORDS]


def token_f1(a_tokens: Iterable[str], b_tokens: Iterable[str]) -> float:
    """Multiset-overlap F1 between two token sequences.

    Both empty -> 1.0; exactly one empty -> 0.0.
    """
    ca = Counter(a_tokens)
    cb = Counter(b_tokens)
    na = sum(ca.values())
    nb = sum(cb.values())
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        return 0.0
    common = sum((ca & cb).values())
    if common == 0:
        return 0.0
    precision = common / na
    recall = common / nb
    return 2 * precision * recall / (precision + recall)
