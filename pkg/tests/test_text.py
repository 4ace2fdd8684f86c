"""Tokenization and answer normalization."""

from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from ragengine.text import content_tokens, normalize_answer, token_f1, tokenize


class TestTokenize:
    def test_splits_on_non_alphanumeric(self):
        assert tokenize("Semantic Caching, 50ms!") == ["semantic", "caching", "50ms"]

    def test_empty_input(self):
        assert tokenize("") == []

    def test_case_folding_preserves_multiplicity(self):
        assert tokenize("RAG RAG rag") == ["rag", "rag", "rag"]

    def test_underscore_is_a_separator(self):
        assert tokenize("doc_type") == ["doc", "type"]

    def test_unicode(self):
        assert tokenize("café Grüße") == ["café", "grüße"]

    @given(st.text(max_size=80))
    def test_deterministic_and_lowercase(self, s):
        first = tokenize(s)
        assert first == tokenize(s)
        assert all(t == t.lower() and t for t in first)


class TestNormalizeAnswer:
    def test_strip_lower_terminal_punct(self):
        assert normalize_answer("  The Answer. ") == "the answer"

    def test_fixed_point(self):
        assert normalize_answer("x") == "x"

    def test_whitespace_collapse(self):
        assert normalize_answer("A  B") == "a b"

    def test_internal_punctuation_kept(self):
        assert normalize_answer("a.b") == "a.b"

    def test_repeated_terminal_punctuation(self):
        assert normalize_answer("sure?!") == "sure"

    @given(st.text(max_size=80))
    def test_idempotent(self, s):
        once = normalize_answer(s)
        assert normalize_answer(once) == once


class TestTokenF1:
    def test_identical(self):
        assert token_f1(["a", "b"], ["a", "b"]) == 1.0

    def test_half_overlap(self):
        assert token_f1(["a", "b"], ["b", "c"]) == 0.5

    def test_multiset_clipping(self):
        assert token_f1(["a", "a"], ["a"]) == 2 / 3

    def test_both_empty(self):
        assert token_f1([], []) == 1.0

    def test_one_empty(self):
        assert token_f1([], ["a"]) == 0.0
        assert token_f1(["a"], []) == 0.0

    @given(
        st.lists(st.sampled_from("abcde"), max_size=8),
        st.lists(st.sampled_from("abcde"), max_size=8),
    )
    def test_symmetric_and_bounded(self, xs, ys):
        f = token_f1(xs, ys)
        assert f == token_f1(ys, xs)
        assert 0.0 <= f <= 1.0


def test_content_tokens_strips_function_words():
    assert content_tokens("hey could you tell me about RRF fusion please") == [
        "rrf",
        "fusion",
    ]
