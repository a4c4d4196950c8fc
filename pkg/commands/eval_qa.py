"""
eval-qa: retrieval-augmented (or zero-shot) MCQ answering with grounding analysis
"""

import argparse
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    load_retriever,
    load_run_corpus,
    open_llm,
    open_provider,
    require_file,
)
from evaluation.metrics import evaluate_outcomes, outcome_for
from evaluation.qa import grade_mcq, grounding_report
from evaluation.reports import format_eval_report, format_grounding, format_mcq_grade
from rag.io import read_mcq_items, write_jsonl
from rag.models import AnswerStatus, Difficulty
from rag.reader import answer_mcq_items
from retrieve.runlog import write_run_log
from utils.constants import MRR_K
from utils.errors import DataError, ReferentialIntegrityError

NAME = "eval-qa"
HELP = "Answer MCQ items with the reader and grade them"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("mcq", help="MCQ items JSONL")
    parser.add_argument("--zero-shot", action="store_true", default=None, help="Answer with an empty context")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    config = app.config
    corpus = load_run_corpus(app)
    items = read_mcq_items(require_file(Path(args.mcq), "MCQ items"))
    if not items:
        raise DataError(f"{args.mcq} contains no MCQ items")
    dangling = [i.item_id for i in items if i.gold_passage_id and i.gold_passage_id not in corpus]
    if dangling:
        raise ReferentialIntegrityError(f"gold passages not in the corpus for items: {', '.join(dangling[:5])}")

    zero_shot = config.evaluation.zero_shot if args.zero_shot is None else args.zero_shot
    mode = "zero_shot" if zero_shot else "rag"
    k = config.retriever.k
    app.logger.stage("answer", f"{len(items)} items, mode {mode}, method {config.retriever.method.value}, k {k}")

    async with open_provider(app) as provider, open_llm(app) as llm:
        retriever = None if zero_shot else load_retriever(app, provider)
        answers = await answer_mcq_items(
            items, retriever, corpus, llm, k,
            context_tokens=config.evaluation.context_tokens,
            zero_shot=zero_shot,
            diagnostics=app.diagnostics,
        )

    grade = grade_mcq([(a.item_id, a.predicted_index) for a in answers], items)
    report: Dict[str, Any] = {
        "mode": mode,
        "method": None if zero_shot else config.retriever.method.value,
        "k": None if zero_shot else k,
        **grade.to_dict(),
        "status": dict(sorted(Counter(a.status.value for a in answers).items())),
    }
    sections: List[str] = [format_mcq_grade(grade, mode)]

    if not zero_shot:
        by_id = {a.item_id: a for a in answers}
        gold_items = [i for i in items if i.gold_passage_id]
        outcomes = [
            outcome_for(i.item_id, by_id[i.item_id].entry.retrieved_ids, i.gold_passage_id)
            for i in gold_items
        ]
        if outcomes:
            grounding = grounding_report([(i.item_id, grade.correct[i.item_id]) for i in gold_items], outcomes, k)
            retrieval = evaluate_outcomes(
                outcomes,
                ks=[x for x in config.evaluation.ks if x <= k] or [k],
                mrr_k=min(MRR_K, k),
                difficulties={i.item_id: i.difficulty.value for i in gold_items},
                levels=[d.value for d in Difficulty],
                method=config.retriever.method.value,
            )
            report["grounding"] = grounding.to_dict()
            report["retrieval"] = retrieval.to_dict()
            sections.extend([format_grounding(grounding), format_eval_report(retrieval)])
        app.logger.artifact(write_run_log([a.entry for a in answers], app.out_dir / "run_log.jsonl"))

    app.logger.artifact(write_jsonl((a.to_dict() for a in answers), app.out_dir / "answers.jsonl"))
    app.write_report(report, "qa_report.json")
    app.write_diagnostics()

    failed = sum(1 for a in answers if a.status is not AnswerStatus.OK)
    if failed:
        app.logger.warning(f"{failed} of {len(answers)} items were unparseable or errored (graded incorrect)")
    app.output("\n\n".join(sections))
    return 0
