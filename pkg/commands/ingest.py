"""
ingest: raw passages and paragraphs to a validated corpus JSONL
"""

import argparse
from pathlib import Path

from commands.common import App, add_common_options, open_llm, open_provider, require_file
from corpus.builder import build_corpus, sentence_similarity
from corpus.loader import emit_corpus, read_jsonl
from corpus.stats import corpus_stats
from evaluation.reports import format_stats

NAME = "ingest"
HELP = "Split, aggregate and summarize raw records into a corpus file"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("input", help="Raw corpus JSONL (documents, passages, paragraphs, tables)")
    parser.add_argument("output", help="Corpus JSONL to write")
    add_common_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    settings = app.config.ingest
    records = read_jsonl(require_file(Path(args.input), "input"))
    app.logger.stage("read", f"{len(records)} records from {args.input}")

    similarity = None
    if settings.similarity == "embedding":
        async with open_provider(app) as provider:
            similarity = await sentence_similarity(records, provider, settings.token_limit)

    async with open_llm(app) as llm:
        corpus = await build_corpus(
            records,
            llm,
            token_limit=settings.token_limit,
            min_tokens=settings.min_tokens,
            similarity=similarity,
            diagnostics=app.diagnostics,
        )

    app.logger.artifact(emit_corpus(corpus, args.output))
    stats = corpus_stats(corpus)
    app.write_report(stats.to_dict(), "corpus_stats.json")
    app.write_diagnostics()
    app.output(format_stats(stats))
    return 0
