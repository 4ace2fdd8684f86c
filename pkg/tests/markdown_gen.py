"""Random Markdown generator for the splitter property suite.

Generates documents mixing headings (H1..H4), short paragraphs and
fenced code blocks (some oversize, some unclosed at end of input).
Blank lines always surround code fences so every code block is its own
paragraph atom, and plain paragraphs stay well under the size budget —
the two assumptions the stated size-bound property relies on.
"""

from __future__ import annotations

import random

WORDS = (
    "gateway route plugin cache index token filter shard broker policy "
    "replica quota metric trace schema buffer socket thread header cursor"
).split()

# Keep code-block sizes away from the max_chunk_chars boundary region:
# clearly small or clearly oversize.
SMALL_CODE_LINES = (1, 4)
BIG_CODE_CHARS = 900


def make_markdown(rng: random.Random, max_elements: int = 14) -> str:
    parts: list[str] = []
    for _ in range(rng.randint(1, max_elements)):
        kind = rng.random()
        if kind < 0.35:
            parts.append(_heading(rng))
            # sometimes glue the first paragraph to its heading
            if rng.random() < 0.4:
                parts[-1] += "\n" + _paragraph(rng)
        elif kind < 0.75:
            parts.append(_paragraph(rng))
        else:
            parts.append(_code_block(rng))
    doc = "\n\n".join(parts)
    if rng.random() < 0.15:
        doc += "\n\n```" + ("\n" + _sentence(rng)) * rng.randint(0, 3)  # unclosed
    return doc + ("\n" if rng.random() < 0.5 else "")


def _heading(rng: random.Random) -> str:
    level = rng.randint(1, 4)
    return "#" * level + " " + " ".join(rng.sample(WORDS, rng.randint(1, 3))).title()


def _sentence(rng: random.Random) -> str:
    words = [rng.choice(WORDS) for _ in range(rng.randint(3, 9))]
    return " ".join(words).capitalize() + rng.choice([".", ".", "!", "?"])


def _paragraph(rng: random.Random) -> str:
    return " ".join(_sentence(rng) for _ in range(rng.randint(1, 3)))


def _code_block(rng: random.Random) -> str:
    lang = rng.choice(["", "go", "python", "yaml"])
    if rng.random() < 0.25:
        body_lines = []
        while sum(len(x) + 1 for x in body_lines) < BIG_CODE_CHARS:
            body_lines.append("cfg = " + " ".join(rng.sample(WORDS, 4)))
    else:
        body_lines = [
            rng.choice(["x = 1", "# comment line", "", "run(" + rng.choice(WORDS) + ")"])
            for _ in range(rng.randint(*SMALL_CODE_LINES))
        ]
    return "```" + lang + "\n" + "\n".join(body_lines) + "\n```"
