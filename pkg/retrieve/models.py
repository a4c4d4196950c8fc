"""
Data models for retrieval
Defines retriever configuration, ranked results, context items and run-log entries
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from utils.constants import DEFAULT_D, DEFAULT_K
from utils.errors import UsageError


class RetrieverMethod(str, Enum):
    """Retriever methods"""
    BM25 = "bm25"
    DPR = "dpr"
    DHR = "dhr"

    @property
    def is_dense(self) -> bool:
        return self is not RetrieverMethod.BM25


class Representation(str, Enum):
    """Passage text used for dense embedding"""
    SECTIONED = "sectioned"
    PLAIN = "plain"


@dataclass(frozen=True)
class RetrievalResult:
    """One ranked hit"""
    passage_id: str
    doc_id: str
    score: float
    rank: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passage_id": self.passage_id,
            "doc_id": self.doc_id,
            "score": self.score,
            "rank": self.rank,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RetrievalResult":
        return cls(
            passage_id=data["passage_id"],
            doc_id=data["doc_id"],
            score=float(data["score"]),
            rank=int(data["rank"]),
        )


def rank_hits(hits: Iterable[Tuple[str, str, float]], k: int) -> List[RetrievalResult]:
    """Order (id, doc_id, score) hits by score descending then id ascending and keep k"""
    ordered = sorted(hits, key=lambda hit: (-hit[2], hit[0]))[:k]
    return [
        RetrievalResult(passage_id=pid, doc_id=doc_id, score=float(score), rank=i)
        for i, (pid, doc_id, score) in enumerate(ordered, start=1)
    ]


@dataclass
class RetrieverConfig:
    """Retriever selection and parameters"""
    method: RetrieverMethod = RetrieverMethod.DHR
    k: int = DEFAULT_K
    d: int = DEFAULT_D
    adapter: Optional[str] = None
    representation: Representation = Representation.SECTIONED

    def __post_init__(self):
        try:
            self.method = RetrieverMethod(self.method)
        except ValueError:
            raise UsageError(f"unknown retriever method {self.method!r}") from None
        try:
            self.representation = Representation(self.representation)
        except ValueError:
            raise UsageError(f"unknown representation {self.representation!r}") from None
        if not isinstance(self.k, int) or self.k < 1:
            raise UsageError(f"retriever.k must be >= 1, got {self.k!r}")
        if not isinstance(self.d, int) or self.d < 1:
            raise UsageError(f"retriever.d must be >= 1, got {self.d!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "k": self.k,
            "d": self.d,
            "adapter": self.adapter,
            "representation": self.representation.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RetrieverConfig":
        return cls(
            method=data.get("method", RetrieverMethod.DHR.value),
            k=data.get("k", DEFAULT_K),
            d=data.get("d", DEFAULT_D),
            adapter=data.get("adapter") or None,
            representation=data.get("representation", Representation.SECTIONED.value),
        )


@dataclass(frozen=True)
class ContextItem:
    """Retrieved content handed to the reader"""
    source_passage_id: str
    doc_id: str
    section_path: Tuple[str, ...]
    content: str
    is_table: bool = False
    table_id: Optional[str] = None


@dataclass
class RunLogEntry:
    """Retrieval run log record for one query"""
    query_id: str
    method: str
    k: int
    d: Optional[int]
    results: List[RetrievalResult] = field(default_factory=list)

    @property
    def retrieved_ids(self) -> List[str]:
        return [r.passage_id for r in self.results]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "query_id": self.query_id,
            "method": self.method,
            "k": self.k,
            "d": self.d,
            "results": [r.to_dict() for r in self.results],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunLogEntry":
        return cls(
            query_id=data["query_id"],
            method=data["method"],
            k=int(data["k"]),
            d=data.get("d"),
            results=[RetrievalResult.from_dict(r) for r in data.get("results", [])],
        )
