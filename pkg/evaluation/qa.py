"""
MCQ grading and grounding analysis
"""

from collections import Counter
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from evaluation.models import GroundingReport, MCQGrade, RankOutcome
from rag.models import Difficulty, MCQItem
from utils.errors import GradingError


def _ids(ids: Iterable[str], limit: int = 10) -> str:
    ids = sorted(ids)
    shown = ", ".join(ids[:limit])
    return shown + (f" (+{len(ids) - limit} more)" if len(ids) > limit else "")


def grade_mcq(
    predictions: Sequence[Tuple[str, Optional[int]]],
    items: Sequence[MCQItem]
) -> MCQGrade:
    """
    Exact-index accuracy, overall and per difficulty

    A prediction of None (unparseable or errored answer) counts as incorrect.
    Difficulties with no items are reported as None.

    Raises:
        GradingError: missing, duplicate or unknown prediction ids
    """
    by_id = {item.item_id: item for item in items}
    counts = Counter(item_id for item_id, _ in predictions)
    duplicates = [i for i, n in counts.items() if n > 1]
    if duplicates:
        raise GradingError(f"duplicate predictions for: {_ids(duplicates)}")
    unknown = set(counts) - set(by_id)
    if unknown:
        raise GradingError(f"predictions for unknown items: {_ids(unknown)}")
    missing = set(by_id) - set(counts)
    if missing:
        raise GradingError(f"missing predictions for: {_ids(missing)}")

    correct = {
        item_id: predicted is not None and predicted == by_id[item_id].answer_index
        for item_id, predicted in predictions
    }
    per_difficulty: Dict[str, Optional[float]] = {}
    for level in Difficulty:
        subset = [i.item_id for i in items if i.difficulty is level]
        per_difficulty[level.value] = (
            sum(1 for i in subset if correct[i]) / len(subset) if subset else None
        )
    n_correct = sum(1 for ok in correct.values() if ok)
    return MCQGrade(
        accuracy=n_correct / len(items) if items else 0.0,
        per_difficulty=per_difficulty,
        n_items=len(items),
        n_correct=n_correct,
        correct=correct,
    )


def grounding_report(
    mcq_results: Sequence[Tuple[str, bool]],
    outcomes: Union[Mapping[str, RankOutcome], Sequence[RankOutcome]],
    k: int = 10
) -> GroundingReport:
    """
    Contingency of (correct, grounded) where grounded means the gold passage
    was retrieved within the first k results

    Raises:
        GradingError: the item ids of results and outcomes differ
    """
    if not isinstance(outcomes, Mapping):
        outcomes = {o.query_id: o for o in outcomes}
    result_ids = [item_id for item_id, _ in mcq_results]
    if set(result_ids) != set(outcomes) or len(result_ids) != len(set(result_ids)):
        only_results = set(result_ids) - set(outcomes)
        only_outcomes = set(outcomes) - set(result_ids)
        raise GradingError(
            "grounding ids differ: "
            f"without outcome [{_ids(only_results)}], without result [{_ids(only_outcomes)}]"
        )

    cells: List[int] = [0, 0, 0, 0]
    for item_id, is_correct in mcq_results:
        grounded = outcomes[item_id].hit(k)
        cells[(0 if is_correct else 2) + (0 if grounded else 1)] += 1
    return GroundingReport(
        correct_grounded=cells[0],
        correct_ungrounded=cells[1],
        incorrect_grounded=cells[2],
        incorrect_ungrounded=cells[3],
        k=k,
    )
