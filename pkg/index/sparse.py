"""
BM25 (Okapi) inverted index
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from corpus.models import Passage
from corpus.tokenizer import analyze
from retrieve.models import RetrievalResult, rank_hits
from utils.constants import BM25_B, BM25_K1
from utils.errors import DataError, UsageError

logger = logging.getLogger(__name__)


@dataclass
class InvertedIndex:
    """Postings, passage lengths and Okapi parameters"""
    postings: Dict[str, List[Tuple[str, int]]]
    passage_lengths: Dict[str, int]
    passage_docs: Dict[str, str]
    k1: float = BM25_K1
    b: float = BM25_B
    avg_length: float = field(init=False)
    n_passages: int = field(init=False)

    def __post_init__(self):
        if self.k1 <= 0 or not 0 <= self.b <= 1:
            raise UsageError(f"BM25 parameters out of range: k1={self.k1}, b={self.b}")
        self.n_passages = len(self.passage_lengths)
        lengths = list(self.passage_lengths.values())
        self.avg_length = sum(lengths) / len(lengths) if lengths else 0.0
        self._tf: Dict[str, Dict[str, int]] = {
            term: dict(entries) for term, entries in self.postings.items()
        }

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.document_frequency(term)
        return math.log(1 + (self.n_passages - df + 0.5) / (df + 0.5))

    def term_frequency(self, term: str, passage_id: str) -> int:
        return self._tf.get(term, {}).get(passage_id, 0)


def build_sparse_index(passages: Sequence[Passage], k1: float = BM25_K1, b: float = BM25_B) -> InvertedIndex:
    """
    Build a BM25 index over passage texts

    Analysis is the corpus tokenizer with punctuation-only tokens dropped.
    Postings list passages in input order.
    """
    if not passages:
        raise DataError("cannot build a sparse index over zero passages")

    postings: Dict[str, List[Tuple[str, int]]] = {}
    lengths: Dict[str, int] = {}
    docs: Dict[str, str] = {}
    for passage in passages:
        terms = analyze(passage.text)
        lengths[passage.passage_id] = len(terms)
        docs[passage.passage_id] = passage.doc_id
        for term, tf in Counter(terms).items():
            postings.setdefault(term, []).append((passage.passage_id, tf))

    index = InvertedIndex(postings=postings, passage_lengths=lengths, passage_docs=docs, k1=k1, b=b)
    logger.info("Built sparse index: %d passages, %d terms", index.n_passages, len(postings))
    return index


def bm25_score(index: InvertedIndex, query_terms: Sequence[str], passage_id: str) -> float:
    """Okapi BM25 score of one passage; repeated query terms count once per occurrence"""
    if passage_id not in index.passage_lengths:
        raise DataError(f"unknown passage_id {passage_id!r}")

    length = index.passage_lengths[passage_id]
    ratio = length / index.avg_length if index.avg_length > 0 else 0.0
    norm = index.k1 * (1 - index.b + index.b * ratio)
    score = 0.0
    for term in query_terms:
        tf = index.term_frequency(term, passage_id)
        if tf == 0:
            continue
        score += index.idf(term) * tf * (index.k1 + 1) / (tf + norm)
    return score


def bm25_search(index: InvertedIndex, query: str, k: int) -> List[RetrievalResult]:
    """Top-k passages with a nonzero score, ties broken by ascending passage_id"""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")

    terms = analyze(query)
    candidates = {pid for term in set(terms) for pid, _ in index.postings.get(term, ())}
    hits = []
    for pid in candidates:
        score = bm25_score(index, terms, pid)
        if score > 0:
            hits.append((pid, index.passage_docs[pid], score))
    return rank_hits(hits, k)
