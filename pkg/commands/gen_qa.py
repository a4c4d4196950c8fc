"""
gen-qa: synthetic QA pairs over selected documents
"""

import argparse

from commands.common import App, add_common_options, load_run_corpus, open_llm
from rag.generation import generate_dataset, generation_candidates, qa_stats
from rag.io import write_qa_pairs
from utils.formatting import ReportFactory

NAME = "gen-qa"
HELP = "Generate, filter and split synthetic QA pairs"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("corpus", nargs="?", help="Corpus JSONL (default: corpus_path from config)")
    parser.add_argument("--document", action="append", dest="documents", help="Restrict to a document (repeatable)")
    add_common_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    config = app.config
    corpus = load_run_corpus(app, args.corpus)
    passages = generation_candidates(corpus, args.documents or config.generation.documents)
    app.logger.stage("generate", f"{len(passages)} passages, up to {config.generation.max_questions} questions each")

    async with open_llm(app) as llm:
        pairs = await generate_dataset(
            passages, corpus, llm,
            max_q=config.generation.max_questions,
            test_fraction=config.generation.test_fraction,
            seed=config.seed,
            diagnostics=app.diagnostics,
        )

    app.logger.artifact(write_qa_pairs(pairs, app.out_dir / "qa_pairs.jsonl"))
    stats = qa_stats(pairs, corpus)
    app.write_report(stats.to_dict(), "qa_stats.json")
    app.write_diagnostics()

    rows = [("pairs", stats.n_pairs)]
    rows.extend((f"split {name}", n) for name, n in stats.per_split.items())
    rows.extend([("mean question tokens", stats.mean_question_tokens), ("mean answer tokens", stats.mean_answer_tokens)])
    rows.extend((f"first word '{word}' (%)", share) for word, share in stats.first_word_share.items())
    app.output(ReportFactory.key_values(rows, title="Generated QA pairs", precision=2))
    return 0
