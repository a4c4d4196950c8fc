"""
Data models for evaluation reports
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from utils.constants import REPORT_PRECISION


def rounded(value: Any, precision: int = REPORT_PRECISION) -> Any:
    """Round every float in a nested report structure"""
    if isinstance(value, float):
        return round(value, precision)
    if isinstance(value, dict):
        return {k: rounded(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v, precision) for v in value]
    return value


@dataclass(frozen=True)
class RankOutcome:
    """Where the gold passage landed for one query"""
    query_id: str
    gold_passage_id: str
    retrieved_ids: List[str]
    rank: Optional[int] = None

    def hit(self, k: int) -> bool:
        return self.rank is not None and self.rank <= k


@dataclass
class RetrievalScores:
    """Top-K accuracies and MRR over one population of queries"""
    acc_at: Dict[int, float]
    mrr: float
    n: int

    def to_dict(self, mrr_k: int) -> Dict[str, Any]:
        return {
            "acc": {str(k): v for k, v in sorted(self.acc_at.items())},
            f"mrr@{mrr_k}": self.mrr,
            "n": self.n,
        }


@dataclass
class EvalReport:
    """Retrieval evaluation of one run"""
    acc_at: Dict[int, float]
    mrr_at_10: float
    n_queries: int
    mrr_k: int = 10
    per_difficulty: Optional[Dict[str, Optional[RetrievalScores]]] = None
    method: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.method is not None:
            data["method"] = self.method
        data["acc"] = {str(k): v for k, v in sorted(self.acc_at.items())}
        data[f"mrr@{self.mrr_k}"] = self.mrr_at_10
        data["n"] = self.n_queries
        if self.per_difficulty is not None:
            data["per_difficulty"] = {
                name: scores.to_dict(self.mrr_k) if scores is not None else None
                for name, scores in self.per_difficulty.items()
            }
        data.update(self.extra)
        return rounded(data)


@dataclass
class GroundingReport:
    """Contingency of answer correctness against gold-passage retrieval"""
    correct_grounded: int
    correct_ungrounded: int
    incorrect_grounded: int
    incorrect_ungrounded: int
    k: int = 10

    @property
    def total(self) -> int:
        return self.correct_grounded + self.correct_ungrounded + self.incorrect_grounded + self.incorrect_ungrounded

    @property
    def total_correct(self) -> int:
        return self.correct_grounded + self.correct_ungrounded

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "correct_grounded": self.correct_grounded,
            "correct_ungrounded": self.correct_ungrounded,
            "incorrect_grounded": self.incorrect_grounded,
            "incorrect_ungrounded": self.incorrect_ungrounded,
            "total": self.total,
        }


@dataclass
class MCQGrade:
    """Multiple-choice grading; difficulties without items are None"""
    accuracy: float
    per_difficulty: Dict[str, Optional[float]]
    n_items: int
    n_correct: int
    correct: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return rounded({
            "accuracy": self.accuracy,
            "per_difficulty": dict(self.per_difficulty),
            "n_items": self.n_items,
            "n_correct": self.n_correct,
        })


@dataclass
class SimilarityHistogram:
    """Cosine distribution over uniform bins on [-1, 1]"""
    bin_edges: List[float]
    counts: List[int]
    model_label: str
    mean: Optional[float] = None

    @property
    def n_samples(self) -> int:
        return sum(self.counts)

    def to_dict(self) -> Dict[str, Any]:
        return rounded({
            "model_label": self.model_label,
            "bins": len(self.counts),
            "n": self.n_samples,
            "mean": self.mean,
        })
