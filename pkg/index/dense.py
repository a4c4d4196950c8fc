"""
Exact dense vector index over passage and document representations
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, AbstractSet, List, Optional, Sequence, Tuple

import numpy as np

from index.embeddings import EmbeddingProvider, embed
from retrieve.models import RetrievalResult, rank_hits
from utils.errors import DataError, DimensionMismatchError, EmbeddingError, UsageError

if TYPE_CHECKING:
    from train.adapter import AdapterMatrix

logger = logging.getLogger(__name__)


class IndexLevel(str, Enum):
    """Granularity of vector index entries"""
    PASSAGE = "passage"
    DOCUMENT = "document"


@dataclass
class VectorIndex:
    """
    Entries are rows of `vectors` (float32, unit-norm) with parallel id lists.
    Document-level entries use the doc_id as their id.
    """
    ids: List[str]
    doc_ids: List[str]
    vectors: np.ndarray
    level: IndexLevel = IndexLevel.PASSAGE
    fingerprint: str = ""
    _scoring: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.level = IndexLevel(self.level)
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids) or len(self.ids) != len(self.doc_ids):
            raise DataError("vector index ids, doc_ids and vectors disagree in length")
        self._scoring = self.vectors.astype(np.float64)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.ids)

    def scores(self, query_vector: np.ndarray) -> np.ndarray:
        """Cosine of the query against every entry"""
        query = np.asarray(query_vector, dtype=np.float64)
        if query.shape != (self.dim,):
            raise DimensionMismatchError(f"query dim {query.shape} does not match index dim {self.dim}")
        return self._scoring @ query

    def vector(self, entry_id: str) -> np.ndarray:
        return self._scoring[self.ids.index(entry_id)]


async def build_vector_index(
    items: Sequence[Tuple[str, str, str]],
    provider: EmbeddingProvider,
    level: IndexLevel = IndexLevel.PASSAGE,
    adapter: Optional["AdapterMatrix"] = None,
    batch_size: Optional[int] = None
) -> VectorIndex:
    """
    Embed (id, doc_id, representation_text) items into a vector index

    When an adapter is given every vector is projected through it and the
    index records the adapter fingerprint.
    """
    ids = [item[0] for item in items]
    if len(set(ids)) != len(ids):
        raise DataError(f"duplicate ids in {IndexLevel(level).value} index items")
    if not items:
        return VectorIndex(ids=[], doc_ids=[], vectors=np.zeros((0, provider.dim or 0)), level=level,
                           fingerprint=adapter.fingerprint if adapter is not None else "")

    try:
        vectors = await embed(provider, [item[2] for item in items], batch_size=batch_size)
    except EmbeddingError as e:
        where = f" (first item {ids[e.start]!r})" if e.start is not None else ""
        raise EmbeddingError(f"{IndexLevel(level).value} index{where}: {e}", retriable=e.retriable) from e

    if adapter is not None:
        from train.adapter import apply_adapter
        vectors = [apply_adapter(adapter, v) for v in vectors]

    index = VectorIndex(
        ids=ids,
        doc_ids=[item[1] for item in items],
        vectors=np.vstack(vectors),
        level=level,
        fingerprint=adapter.fingerprint if adapter is not None else "",
    )
    logger.info("Built %s index: %d entries, dim %d", index.level.value, len(index), index.dim)
    return index


def dense_search(
    index: VectorIndex,
    query_vector: np.ndarray,
    k: int,
    doc_filter: Optional[AbstractSet[str]] = None
) -> List[RetrievalResult]:
    """
    Exact top-k by cosine, ties broken by ascending id

    Args:
        index: Vector index
        query_vector: Unit-norm query of the index dim
        k: Results to return
        doc_filter: Restrict to entries whose doc_id is in this set

    Returns:
        Ranked results, possibly fewer than k
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    scores = index.scores(query_vector)
    if doc_filter is None:
        candidates = np.arange(len(index))
    else:
        mask = np.fromiter((d in doc_filter for d in index.doc_ids), dtype=bool, count=len(index))
        candidates = np.nonzero(mask)[0]
    if candidates.size == 0:
        return []

    subset = scores[candidates]
    if candidates.size > k:
        # Keep everything tied with the k-th best so id tie-breaking stays exact
        threshold = np.partition(subset, candidates.size - k)[candidates.size - k]
        candidates = candidates[subset >= threshold]

    return rank_hits(((index.ids[i], index.doc_ids[i], scores[i]) for i in candidates), k)
