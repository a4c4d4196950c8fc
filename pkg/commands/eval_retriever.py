"""
eval-retriever: Top-K accuracy and MRR of a retriever over a QA split
"""

import argparse
from pathlib import Path

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    check_pairs_resolve,
    load_retriever,
    load_run_corpus,
    open_provider,
    require_file,
    select_split,
)
from evaluation.metrics import evaluate_outcomes, outcomes_from_run_log
from evaluation.reports import format_eval_report
from evaluation.similarity import similarity_distribution, write_histogram_csv
from rag.io import read_qa_pairs
from retrieve.representations import representation_for
from retrieve.runlog import make_entry, read_run_log, write_run_log
from utils.constants import MRR_K
from utils.errors import DataError

NAME = "eval-retriever"
HELP = "Evaluate a retriever on the QA pairs of one split"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("qa_pairs", help="QA pairs JSONL with gold passage ids")
    parser.add_argument("--split", choices=["train", "test", "all"], help="Split to evaluate (default from config)")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    config = app.config
    corpus = load_run_corpus(app)
    split = args.split or config.evaluation.split
    pairs = select_split(read_qa_pairs(require_file(Path(args.qa_pairs), "QA pairs")), split)
    if not pairs:
        raise DataError(f"no QA pairs in split {split!r}")
    check_pairs_resolve(pairs, corpus)

    method = config.retriever.method
    depth = max(max(config.evaluation.ks), MRR_K, config.retriever.k)
    app.logger.stage("retrieve", f"{len(pairs)} {split} questions with {method.value}, depth {depth}")

    async with open_provider(app) as provider:
        retriever = load_retriever(app, provider)
        all_results = await retriever.retrieve_many([p.question for p in pairs], depth)

        histogram = None
        if method.is_dense:
            representation = config.retriever.representation
            histogram = await similarity_distribution(
                [p.question for p in pairs],
                [representation_for(corpus.passage(p.passage_id), representation) for p in pairs],
                provider,
                adapter=retriever.adapter,
                bins=config.evaluation.bins,
                label=method.value + ("-ft" if retriever.adapter is not None else ""),
            )

    entries = [make_entry(p.question_id, config.retriever, results, depth) for p, results in zip(pairs, all_results)]
    run_log = write_run_log(entries, app.out_dir / "run_log.jsonl")
    app.logger.artifact(run_log)
    outcomes = outcomes_from_run_log(read_run_log(run_log), {p.question_id: p.passage_id for p in pairs})
    report = evaluate_outcomes(outcomes, config.evaluation.ks, MRR_K, method=method.value)
    report.extra["split"] = split
    if histogram is not None:
        report.extra["similarity"] = histogram.to_dict()
        app.logger.artifact(write_histogram_csv(histogram, app.out_dir / "similarity.csv"))

    app.write_report(report.to_dict(), "retriever_report.json")
    app.output(format_eval_report(report))
    return 0
