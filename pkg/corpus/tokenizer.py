"""
Whitespace tokenizer shared by token budgeting, BM25 analysis and the hash embedder
"""

import re
import unicodedata
from typing import List, Tuple

_WORD = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def token_spans(text: str) -> List[Tuple[int, int]]:
    """
    Character spans of every token in `text`

    Text is split on Unicode whitespace; leading and trailing punctuation
    characters of each word become single-character tokens of their own.
    """
    spans: List[Tuple[int, int]] = []
    for match in _WORD.finditer(text):
        start, end = match.span()
        while start < end and _is_punct(text[start]):
            spans.append((start, start + 1))
            start += 1
        trailing: List[Tuple[int, int]] = []
        while end > start and _is_punct(text[end - 1]):
            trailing.append((end - 1, end))
            end -= 1
        if start < end:
            spans.append((start, end))
        spans.extend(reversed(trailing))
    return spans


def tokenize(text: str) -> List[str]:
    """Lowercased token sequence"""
    return [text[s:e].lower() for s, e in token_spans(text)]


def count_tokens(text: str) -> int:
    """Number of tokens; 0 only for empty or whitespace-only text"""
    return len(token_spans(text))


def is_punctuation_token(token: str) -> bool:
    return not any(ch.isalnum() for ch in token)


def analyze(text: str) -> List[str]:
    """Index terms: lowercased tokens with punctuation-only tokens dropped"""
    return [t for t in tokenize(text) if not is_punctuation_token(t)]
