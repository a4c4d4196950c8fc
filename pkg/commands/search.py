"""
search: one-shot retrieval for a question
"""

import argparse

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    load_retriever,
    load_run_corpus,
    open_provider,
)
from evaluation.reports import format_results

NAME = "search"
HELP = "Retrieve the top-k passages for a question"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("question", help="Question text")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    corpus = load_run_corpus(app)
    async with open_provider(app) as provider:
        retriever = load_retriever(app, provider)
        results = await retriever.retrieve(args.question)
    app.output(format_results(results, corpus))
    return 0
