"""
ask: answer one ad-hoc multiple-choice question
"""

import argparse

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    load_retriever,
    load_run_corpus,
    open_llm,
    open_provider,
)
from evaluation.reports import format_results
from rag.models import AnswerStatus, Difficulty, MCQItem
from rag.reader import answer_mcq
from utils.constants import OPTION_LETTERS
from utils.errors import DataError, UsageError
from utils.formatting import ReportFactory

NAME = "ask"
HELP = "Retrieve context for a question and pick one of its options"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("question", help="Question text")
    parser.add_argument("--option", action="append", dest="options", default=[], help="Answer option (2 to 5)")
    parser.add_argument("--zero-shot", action="store_true", help="Answer with an empty context")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    try:
        item = MCQItem(
            item_id="ask",
            difficulty=Difficulty.INTERMEDIATE,
            question=args.question,
            options=tuple(args.options),
            answer_index=0,
        )
    except DataError as e:
        raise UsageError(str(e)) from None

    corpus = load_run_corpus(app)
    async with open_provider(app) as provider, open_llm(app) as llm:
        retriever = None if args.zero_shot else load_retriever(app, provider)
        answer = await answer_mcq(
            item, retriever, corpus, llm, app.config.retriever.k,
            context_tokens=app.config.evaluation.context_tokens,
            zero_shot=args.zero_shot,
            diagnostics=app.diagnostics,
        )

    if answer.entry.results:
        app.output(format_results(answer.entry.results, corpus))
        app.output("")
    if answer.status is AnswerStatus.OK:
        index = answer.predicted_index
        app.output(ReportFactory.success("Answer", f"{OPTION_LETTERS[index]}. {item.options[index]}"))
    else:
        app.output(ReportFactory.warning("No answer", f"reader output was {answer.status.value}: {answer.raw_text!r}"))
    return 0
