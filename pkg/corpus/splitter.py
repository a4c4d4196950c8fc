"""
Semantic paragraph splitting and short-passage aggregation
"""

import logging
import re
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from corpus.models import Passage, PassageKind
from corpus.tokenizer import analyze, count_tokens, token_spans
from utils.constants import MIN_AGGREGATE_TOKENS, MIN_SPLIT_LIMIT, TOKEN_LIMIT
from utils.diagnostics import DiagnosticLog
from utils.errors import UsageError

logger = logging.getLogger(__name__)

SimilarityFn = Callable[[str, str], float]

_TABLE_LINE = re.compile(r"^[ \t]*\|.*$", re.MULTILINE)
_SENTENCE_END = re.compile(r"[.?!;](?=\s)")


def jaccard_similarity(a: str, b: str) -> float:
    """Token-overlap Jaccard similarity of two sentences"""
    left, right = set(analyze(a)), set(analyze(b))
    union = left | right
    if not union:
        return 0.0
    return len(left & right) / len(union)


class VectorSimilarity:
    """Cosine similarity over precomputed sentence embeddings"""

    def __init__(self, vectors: Dict[str, np.ndarray], fallback: SimilarityFn = jaccard_similarity):
        self.vectors = vectors
        self.fallback = fallback

    def __call__(self, a: str, b: str) -> float:
        va, vb = self.vectors.get(a), self.vectors.get(b)
        if va is None or vb is None:
            return self.fallback(a, b)
        return float(np.dot(va, vb))


def _strip(text: str, start: int, end: int) -> Tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _text_sentences(text: str, start: int, end: int) -> List[Tuple[int, int]]:
    out = []
    cursor = start
    for match in _SENTENCE_END.finditer(text, start, end):
        out.append(_strip(text, cursor, match.end()))
        cursor = match.end()
    out.append(_strip(text, cursor, end))
    return out


def sentence_spans(paragraph: str) -> List[Tuple[int, int]]:
    """
    Sentence spans of a paragraph

    Sentences end at ".", "?", "!" or ";" followed by whitespace. Markdown
    table rows are atomic sentences and are never cut.
    """
    spans: List[Tuple[int, int]] = []
    cursor = 0
    for row in _TABLE_LINE.finditer(paragraph):
        spans.extend(_text_sentences(paragraph, cursor, row.start()))
        spans.append(_strip(paragraph, row.start(), row.end()))
        cursor = row.end()
    spans.extend(_text_sentences(paragraph, cursor, len(paragraph)))
    return [(s, e) for s, e in spans if s < e]


def split_sentences(paragraph: str) -> List[str]:
    return [paragraph[s:e] for s, e in sentence_spans(paragraph)]


def _hard_split(text: str, limit: int) -> List[str]:
    spans = token_spans(text)
    return [
        text[spans[i][0]:spans[min(i + limit, len(spans)) - 1][1]]
        for i in range(0, len(spans), limit)
    ]


def split_paragraph(
    paragraph: str,
    limit: int = TOKEN_LIMIT,
    similarity: Optional[SimilarityFn] = None,
    diagnostics: Optional[DiagnosticLog] = None,
    subject: str = ""
) -> List[str]:
    """
    Split a paragraph into chunks of at most `limit` tokens

    Sentences are packed greedily; when the next sentence overflows the window,
    the window is cut at the adjacent-sentence pair with the lowest similarity
    (the later pair wins ties). A sentence longer than `limit` is hard-split at
    token boundaries and reported as a diagnostic.

    Args:
        paragraph: Paragraph text
        limit: Maximum tokens per chunk (>= 16)
        similarity: Sentence-pair similarity, Jaccard when None
        diagnostics: Receives oversized-sentence records
        subject: Identifier used in diagnostics

    Returns:
        Chunks as slices of the original text, in order
    """
    if limit < MIN_SPLIT_LIMIT:
        raise UsageError(f"token limit must be >= {MIN_SPLIT_LIMIT}, got {limit}")
    total = count_tokens(paragraph)
    if total == 0:
        return []
    if total <= limit:
        return [paragraph]

    similarity = similarity or jaccard_similarity
    spans = sentence_spans(paragraph)
    sizes = [count_tokens(paragraph[s:e]) for s, e in spans]
    pair_cache: Dict[int, float] = {}

    def pair_similarity(m: int) -> float:
        if m not in pair_cache:
            left, right = spans[m], spans[m + 1]
            pair_cache[m] = similarity(paragraph[left[0]:left[1]], paragraph[right[0]:right[1]])
        return pair_cache[m]

    chunks: List[str] = []
    i, n = 0, len(spans)
    while i < n:
        if sizes[i] > limit:
            sentence = paragraph[spans[i][0]:spans[i][1]]
            if diagnostics is not None:
                diagnostics.warn(
                    "oversized_sentence", subject,
                    f"sentence of {sizes[i]} tokens hard-split at {limit}"
                )
            chunks.extend(_hard_split(sentence, limit))
            i += 1
            continue

        used, j = 0, i
        while j < n and used + sizes[j] <= limit:
            used += sizes[j]
            j += 1
        if j == n:
            chunks.append(paragraph[spans[i][0]:spans[n - 1][1]])
            break

        # Window i..j overflows; cut after the least similar adjacent pair
        cut, lowest = i, float("inf")
        for m in range(i, j):
            score = pair_similarity(m)
            if score <= lowest:
                cut, lowest = m, score
        chunks.append(paragraph[spans[i][0]:spans[cut][1]])
        i = cut + 1

    logger.debug("Split %s (%d tokens) into %d chunks", subject or "paragraph", total, len(chunks))
    return chunks


def aggregate_short(
    passages: Sequence[Passage],
    min_tokens: int = MIN_AGGREGATE_TOKENS,
    limit: int = TOKEN_LIMIT
) -> List[Passage]:
    """
    Merge consecutive short text passages of the same document section

    A run of text passages sharing doc_id and section_path is merged with
    newline joins while the merged token count stays within `limit` and at
    least one member is shorter than `min_tokens`. The merged passage keeps
    the first member's id. Table passages are never merged.
    """
    if min_tokens >= limit:
        raise UsageError(f"min_tokens ({min_tokens}) must be below the token limit ({limit})")

    out: List[Passage] = []
    current: Optional[Passage] = None
    has_short = False
    for passage in passages:
        is_short = passage.kind is PassageKind.TEXT and passage.token_count < min_tokens
        if (
            current is not None
            and current.kind is PassageKind.TEXT
            and passage.kind is PassageKind.TEXT
            and current.doc_id == passage.doc_id
            and current.section_path == passage.section_path
            and (has_short or is_short)
        ):
            merged_text = current.text + "\n" + passage.text
            if count_tokens(merged_text) <= limit:
                current = replace(current, text=merged_text)
                has_short = True
                continue
        if current is not None:
            out.append(current)
        current = passage
        has_short = is_short
    if current is not None:
        out.append(current)
    return out
