"""
index: sparse, passage-level and document-level indexes for a corpus
"""

import argparse

from commands.common import (
    App,
    add_common_options,
    add_retriever_options,
    index_path,
    load_run_adapter,
    load_run_corpus,
    open_provider,
)
from index.dense import IndexLevel, build_vector_index
from index.sparse import build_sparse_index
from index.storage import save_index
from retrieve.models import Representation
from retrieve.representations import document_items, passage_items

NAME = "index"
HELP = "Build the BM25 and dense indexes"


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("corpus", nargs="?", help="Corpus JSONL (default: corpus_path from config)")
    add_common_options(parser)
    add_retriever_options(parser)
    return parser


async def run(app: App, args: argparse.Namespace) -> int:
    corpus = load_run_corpus(app, args.corpus)

    sparse = build_sparse_index(corpus.passages)
    app.logger.artifact(save_index(sparse, index_path(app, "sparse")))

    async with open_provider(app) as provider:
        adapter = load_run_adapter(app, provider)
        if adapter is not None:
            app.logger.stage("adapter", f"projecting through {app.config.retriever.adapter} ({adapter.rows}x{adapter.cols})")
        builds = [
            ("passages", passage_items(corpus, Representation.SECTIONED), IndexLevel.PASSAGE),
            ("passages_plain", passage_items(corpus, Representation.PLAIN), IndexLevel.PASSAGE),
            ("documents", document_items(corpus), IndexLevel.DOCUMENT),
        ]
        for key, items, level in builds:
            index = await build_vector_index(items, provider, level, adapter=adapter)
            app.logger.artifact(save_index(index, index_path(app, key)))

    app.output(f"Indexed {len(corpus.passages)} passages and {len(corpus.documents)} documents into {app.config.index_dir}")
    return 0
