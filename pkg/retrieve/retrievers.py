"""
BM25, DPR and DHR retrievers over prebuilt indexes
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from index.dense import VectorIndex, dense_search
from index.embeddings import EmbeddingProvider, embed
from index.sparse import InvertedIndex, bm25_search
from retrieve.models import RetrievalResult, RetrieverConfig, RetrieverMethod
from train.adapter import AdapterMatrix, apply_adapter
from utils.errors import DataError, UsageError

logger = logging.getLogger(__name__)


def check_adapter(index: VectorIndex, adapter: Optional[AdapterMatrix]) -> None:
    """Refuse a query adapter that differs from the one the index was built with"""
    expected = adapter.fingerprint if adapter is not None else ""
    if index.fingerprint != expected:
        built = index.fingerprint[:12] or "no adapter"
        query = expected[:12] or "no adapter"
        raise DataError(f"{index.level.value} index was built with {built} but the query uses {query}")


def project_query(vector: np.ndarray, adapter: Optional[AdapterMatrix]) -> np.ndarray:
    return apply_adapter(adapter, vector) if adapter is not None else vector


async def embed_query(question: str, provider: EmbeddingProvider, adapter: Optional[AdapterMatrix] = None) -> np.ndarray:
    (vector,) = await embed(provider, [question])
    return project_query(vector, adapter)


def dpr_search(query_vector: np.ndarray, passage_index: VectorIndex, k: int) -> List[RetrievalResult]:
    return dense_search(passage_index, query_vector, k)


def dhr_search(
    query_vector: np.ndarray,
    doc_index: VectorIndex,
    passage_index: VectorIndex,
    k: int,
    d: int
) -> List[RetrievalResult]:
    """Top-d documents first, then passages within them scored by passage cosine alone"""
    if d < 1:
        raise UsageError(f"d must be >= 1, got {d}")
    documents = dense_search(doc_index, query_vector, d)
    return dense_search(passage_index, query_vector, k, doc_filter={r.doc_id for r in documents})


async def dpr_retrieve(
    question: str,
    passage_index: VectorIndex,
    provider: EmbeddingProvider,
    k: int,
    adapter: Optional[AdapterMatrix] = None
) -> List[RetrievalResult]:
    """Dense retrieval over the full passage index"""
    check_adapter(passage_index, adapter)
    return dpr_search(await embed_query(question, provider, adapter), passage_index, k)


async def dhr_retrieve(
    question: str,
    doc_index: VectorIndex,
    passage_index: VectorIndex,
    provider: EmbeddingProvider,
    k: int,
    d: int,
    adapter: Optional[AdapterMatrix] = None
) -> List[RetrievalResult]:
    """Two-stage hierarchical retrieval: documents by metadata, then their passages"""
    check_adapter(doc_index, adapter)
    check_adapter(passage_index, adapter)
    return dhr_search(await embed_query(question, provider, adapter), doc_index, passage_index, k, d)


class Retriever:
    """Configured retriever bound to its indexes"""

    def __init__(
        self,
        config: RetrieverConfig,
        provider: Optional[EmbeddingProvider] = None,
        sparse_index: Optional[InvertedIndex] = None,
        passage_index: Optional[VectorIndex] = None,
        doc_index: Optional[VectorIndex] = None,
        adapter: Optional[AdapterMatrix] = None
    ):
        """
        Initialize retriever

        Args:
            config: Method, k, d and representation
            provider: Embedding provider (dense methods)
            sparse_index: BM25 index (bm25)
            passage_index: Passage vectors built with the configured representation
            doc_index: Document vectors (dhr)
            adapter: Adapter the dense indexes were built with
        """
        self.config = config
        self.provider = provider
        self.sparse_index = sparse_index
        self.passage_index = passage_index
        self.doc_index = doc_index
        self.adapter = adapter

        method = config.method
        if method is RetrieverMethod.BM25 and sparse_index is None:
            raise UsageError("bm25 retrieval needs a sparse index")
        if method.is_dense:
            if provider is None or passage_index is None:
                raise UsageError(f"{method.value} retrieval needs a provider and a passage index")
            check_adapter(passage_index, adapter)
        if method is RetrieverMethod.DHR:
            if doc_index is None:
                raise UsageError("dhr retrieval needs a document index")
            check_adapter(doc_index, adapter)

    @property
    def method(self) -> RetrieverMethod:
        return self.config.method

    def _search(self, question: str, vector: Optional[np.ndarray], k: int) -> List[RetrievalResult]:
        if self.method is RetrieverMethod.BM25:
            return bm25_search(self.sparse_index, question, k)
        if self.method is RetrieverMethod.DPR:
            return dpr_search(vector, self.passage_index, k)
        return dhr_search(vector, self.doc_index, self.passage_index, k, self.config.d)

    async def query_vectors(self, questions: Sequence[str]) -> List[np.ndarray]:
        """Embedded (and adapted) question vectors"""
        vectors = await embed(self.provider, list(questions))
        return [project_query(v, self.adapter) for v in vectors]

    async def retrieve(self, question: str, k: Optional[int] = None) -> List[RetrievalResult]:
        """Top-k results for one question"""
        (results,) = await self.retrieve_many([question], k)
        return results

    async def retrieve_many(self, questions: Sequence[str], k: Optional[int] = None) -> List[List[RetrievalResult]]:
        """Top-k results for every question; dense queries are embedded in shared batches"""
        k = k if k is not None else self.config.k
        if not questions:
            return []
        if self.method.is_dense:
            vectors = await self.query_vectors(questions)
        else:
            vectors = [None] * len(questions)
        results = [self._search(q, v, k) for q, v in zip(questions, vectors)]
        logger.debug("Retrieved with %s for %d questions", self.method.value, len(questions))
        return results
