"""
train-adapter: fine-tune a linear query/passage adapter with in-batch negatives
"""

import argparse
from pathlib import Path

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    check_pairs_resolve,
    load_run_corpus,
    open_provider,
    require_file,
    select_split,
)
from rag.io import read_qa_pairs
from train.adapter import save_adapter
from train.trainer import TrainingPair, train_adapter, write_loss_history
from utils.formatting import ReportFactory

NAME = "train-adapter"
HELP = "Train an adapter on QA pairs and save it with its loss history"

ADAPTER_FILE = "adapter.tadp"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("qa_pairs", help="QA pairs JSONL")
    parser.add_argument("--split", choices=["train", "test", "all"], default="train", help="Split to train on")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    config = app.config
    corpus = load_run_corpus(app)
    pairs = select_split(read_qa_pairs(require_file(Path(args.qa_pairs), "QA pairs")), args.split)
    check_pairs_resolve(pairs, corpus)
    training = [TrainingPair(p.question_id, p.question, p.passage_id) for p in pairs]

    app.logger.stage("train", f"{len(training)} pairs, {config.train.epochs} epochs, lr {config.train.learning_rate}")
    async with open_provider(app) as provider:
        adapter, history = await train_adapter(
            training, corpus, provider, config.train, config.retriever.representation
        )

    adapter_path = save_adapter(adapter, app.out_dir / ADAPTER_FILE)
    app.logger.artifact(adapter_path)
    app.logger.artifact(write_loss_history(history, app.out_dir / "loss_history.csv"))
    app.write_report(
        {
            "pairs": len(training),
            "train": config.train.to_dict(),
            "representation": config.retriever.representation.value,
            "dim": [adapter.rows, adapter.cols],
            "fingerprint": adapter.fingerprint,
            "loss_first": history[0],
            "loss_last": history[-1],
        },
        "train_report.json",
    )
    app.output(ReportFactory.key_values(
        [
            ("pairs", len(training)),
            ("epochs", len(history)),
            ("first epoch loss", history[0]),
            ("last epoch loss", history[-1]),
            ("adapter", str(adapter_path)),
        ],
        title="Adapter training",
        precision=4,
    ))
    return 0
