"""
Top-K accuracy and MRR@K over gold-passage ranks
"""

from collections import Counter
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from evaluation.models import EvalReport, RankOutcome, RetrievalScores
from retrieve.models import RunLogEntry
from utils.constants import MRR_K, REPORT_KS
from utils.errors import DataError, UsageError


def rank_of_gold(retrieved_ids: Sequence[str], gold_passage_id: str) -> Optional[int]:
    """1-based position of the gold passage, None when absent"""
    duplicates = sorted(pid for pid, n in Counter(retrieved_ids).items() if n > 1)
    if duplicates:
        raise DataError(f"retrieved ids contain duplicates: {', '.join(duplicates)}")
    for position, pid in enumerate(retrieved_ids, start=1):
        if pid == gold_passage_id:
            return position
    return None


def outcome_for(query_id: str, retrieved_ids: Sequence[str], gold_passage_id: str) -> RankOutcome:
    ids = list(retrieved_ids)
    return RankOutcome(query_id=query_id, gold_passage_id=gold_passage_id,
                       retrieved_ids=ids, rank=rank_of_gold(ids, gold_passage_id))


def outcomes_from_run_log(entries: Iterable[RunLogEntry], gold: Mapping[str, str]) -> List[RankOutcome]:
    """Pair run-log entries with gold passage ids by query_id"""
    outcomes = []
    for entry in entries:
        if entry.query_id not in gold:
            raise DataError(f"run log query {entry.query_id!r} has no gold passage")
        outcomes.append(outcome_for(entry.query_id, entry.retrieved_ids, gold[entry.query_id]))
    return outcomes


def _check(outcomes: Sequence[RankOutcome], k: int) -> None:
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if not outcomes:
        raise DataError("cannot compute metrics over zero outcomes")


def topk_accuracy(outcomes: Sequence[RankOutcome], k: int) -> float:
    """Fraction of queries with the gold passage in the first k results"""
    _check(outcomes, k)
    return sum(1 for o in outcomes if o.hit(k)) / len(outcomes)


def mrr_at_k(outcomes: Sequence[RankOutcome], k: int) -> float:
    """Mean reciprocal gold rank, 0 for ranks beyond k"""
    _check(outcomes, k)
    return sum(1.0 / o.rank if o.hit(k) else 0.0 for o in outcomes) / len(outcomes)


def retrieval_scores(outcomes: Sequence[RankOutcome], ks: Sequence[int] = REPORT_KS, mrr_k: int = MRR_K) -> RetrievalScores:
    return RetrievalScores(
        acc_at={k: topk_accuracy(outcomes, k) for k in sorted(ks)},
        mrr=mrr_at_k(outcomes, mrr_k),
        n=len(outcomes),
    )


def evaluate_outcomes(
    outcomes: Sequence[RankOutcome],
    ks: Sequence[int] = REPORT_KS,
    mrr_k: int = MRR_K,
    difficulties: Optional[Mapping[str, str]] = None,
    levels: Sequence[str] = (),
    method: Optional[str] = None
) -> EvalReport:
    """
    Build an EvalReport, optionally broken down by query difficulty

    Args:
        outcomes: Per-query gold ranks
        ks: Cutoffs for Top-K accuracy
        mrr_k: Cutoff for MRR
        difficulties: query_id -> difficulty name
        levels: Difficulty names to report, absent ones reported as None
        method: Retriever label stored in the report
    """
    overall = retrieval_scores(outcomes, ks, mrr_k)
    per_difficulty: Optional[Dict[str, Optional[RetrievalScores]]] = None
    if difficulties is not None:
        per_difficulty = {}
        for level in levels or sorted(set(difficulties.values())):
            subset = [o for o in outcomes if difficulties.get(o.query_id) == level]
            per_difficulty[level] = retrieval_scores(subset, ks, mrr_k) if subset else None
    return EvalReport(
        acc_at=overall.acc_at,
        mrr_at_10=overall.mrr,
        n_queries=overall.n,
        mrr_k=mrr_k,
        per_difficulty=per_difficulty,
        method=method,
    )
