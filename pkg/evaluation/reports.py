"""
Report rendering: JSON artifacts and console tables
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from corpus.models import Corpus, StatsReport
from evaluation.models import EvalReport, GroundingReport, MCQGrade, rounded
from retrieve.models import RetrievalResult
from utils.constants import REPORT_PRECISION
from utils.formatting import ReportFactory


def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a report as indented UTF-8 JSON with floats rounded"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(rounded(data), indent=2, ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text + "\n")
    return path


def format_stats(stats: StatsReport) -> str:
    pairs = [
        ("documents", stats.n_documents),
        ("passages", stats.n_passages),
        ("tables", stats.n_tables),
        ("tables per document", stats.tables_per_document_mean),
        ("mean tokens (text passage)", stats.mean_tokens_text_passage),
        ("mean tokens (table)", stats.mean_tokens_table),
    ]
    pairs.extend((f"passages ({kind})", n) for kind, n in stats.passages_per_kind.items())
    pairs.extend((f"documents ({release or 'no release'})", n) for release, n in stats.per_release_document_counts.items())
    return ReportFactory.key_values(pairs, title="Corpus statistics", precision=2)


def format_eval_report(report: EvalReport, title: Optional[str] = None) -> str:
    headers = ["scope", "n"] + [f"acc@{k}" for k in sorted(report.acc_at)] + [f"mrr@{report.mrr_k}"]
    rows = [["all", report.n_queries] + [report.acc_at[k] for k in sorted(report.acc_at)] + [report.mrr_at_10]]
    for level, scores in (report.per_difficulty or {}).items():
        if scores is None:
            rows.append([level, 0] + [None] * len(report.acc_at) + [None])
        else:
            rows.append([level, scores.n] + [scores.acc_at[k] for k in sorted(scores.acc_at)] + [scores.mrr])
    return ReportFactory.table(headers, rows, title=title or f"Retrieval ({report.method or 'run'})", precision=3)


def format_mcq_grade(grade: MCQGrade, mode: str) -> str:
    rows = [["all", grade.n_items, grade.accuracy]]
    rows.extend([level, None, acc] for level, acc in grade.per_difficulty.items())
    return ReportFactory.table(["scope", "items", "accuracy"], rows, title=f"MCQ accuracy ({mode})", precision=3)


def format_grounding(report: GroundingReport) -> str:
    rows = [
        ["correct", report.correct_grounded, report.correct_ungrounded],
        ["incorrect", report.incorrect_grounded, report.incorrect_ungrounded],
    ]
    return ReportFactory.table(
        ["answer", f"gold in top {report.k}", "gold missing"], rows, title="Grounding"
    )


def format_results(results: Sequence[RetrievalResult], corpus: Corpus, width: int = 60) -> str:
    """Ranked hits with a one-line preview of each passage"""
    rows = []
    for result in results:
        passage = corpus.passage(result.passage_id) if result.passage_id in corpus else None
        preview = " ".join(passage.text.split())[:width] if passage is not None else ""
        kind = passage.kind.value if passage is not None else "?"
        rows.append([result.rank, round(result.score, REPORT_PRECISION), result.passage_id, kind, preview])
    return ReportFactory.table(["rank", "score", "passage_id", "kind", "text"], rows, precision=4)
