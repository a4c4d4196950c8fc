"""
Shared command plumbing: run context, option wiring and resource loading
"""

import argparse
import logging
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import AsyncIterator, List, Optional, Sequence, Tuple

from corpus.loader import load_corpus
from corpus.models import Corpus
from evaluation.reports import write_json
from index.dense import VectorIndex
from index.embeddings import EmbeddingProvider, create_provider
from index.storage import load_sparse_index, load_vector_index
from rag.llm import LLMClient, create_llm_client
from rag.models import QAPair
from retrieve.models import Representation, RetrieverMethod
from retrieve.retrievers import Retriever
from train.adapter import AdapterMatrix, load_adapter
from utils.config import RunConfig
from utils.constants import INDEX_FILES
from utils.diagnostics import DiagnosticLog
from utils.errors import DimensionMismatchError, ReferentialIntegrityError, UsageError
from utils.logger import RunLogger

logger = logging.getLogger(__name__)

# Short flag -> dotted config key
SHORT_OPTIONS = {
    "method": "retriever.method",
    "k": "retriever.k",
    "d": "retriever.d",
    "adapter": "retriever.adapter",
    "representation": "retriever.representation",
    "seed": "seed",
    "out": "out_dir",
}


@dataclass
class App:
    """Everything a command needs for one run"""
    config: RunConfig
    logger: RunLogger
    diagnostics: DiagnosticLog = field(default_factory=DiagnosticLog)

    @property
    def out_dir(self) -> Path:
        path = self.config.out_dir
        path.mkdir(parents=True, exist_ok=True)
        return path

    def output(self, text: str) -> None:
        """Reports go to stdout; logs go to stderr and the log file"""
        print(text)

    def write_report(self, data: dict, name: str) -> Path:
        path = write_json(data, self.out_dir / name)
        self.logger.artifact(path)
        return path

    def write_diagnostics(self) -> Optional[Path]:
        if not len(self.diagnostics):
            return None
        return self.write_report(
            {"counts": self.diagnostics.counts(), "records": [r.to_dict() for r in self.diagnostics.records]},
            "diagnostics.json",
        )


def add_common_options(parser: argparse.ArgumentParser) -> None:
    """Options every sub-command accepts"""
    parser.add_argument("--config", help="Config file (default: $TDPR_CONFIG, then ./config.yaml)")
    parser.add_argument("--out", help="Directory for run artifacts")
    parser.add_argument("--seed", type=int, help="Seed for every random choice")


def add_retriever_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=[m.value for m in RetrieverMethod], help="Retriever")
    parser.add_argument("--k", type=int, help="Number of passages to retrieve")
    parser.add_argument("--d", type=int, help="Documents kept by the first hierarchical stage")
    parser.add_argument("--adapter", help="Trained adapter file (TADP1)")
    parser.add_argument(
        "--representation", choices=[r.value for r in Representation],
        help="Passage representation of the dense index"
    )


def short_overrides(args: argparse.Namespace) -> List[Tuple[str, object]]:
    """Overrides given by the short flags that were actually set"""
    return [
        (dotted, getattr(args, name))
        for name, dotted in SHORT_OPTIONS.items()
        if getattr(args, name, None) is not None
    ]


def require_file(path: Path, what: str) -> Path:
    if not Path(path).is_file():
        raise UsageError(f"{what} {str(path)!r} does not exist")
    return Path(path)


def load_run_corpus(app: App, path: Optional[str] = None) -> Corpus:
    corpus_path = require_file(Path(path) if path else app.config.corpus_path, "corpus")
    return load_corpus(corpus_path, app.config.ingest.token_limit)


@asynccontextmanager
async def open_provider(app: App) -> AsyncIterator[EmbeddingProvider]:
    provider = create_provider(app.config.provider)
    try:
        yield provider
    finally:
        await provider.close()


@asynccontextmanager
async def open_llm(app: App) -> AsyncIterator[LLMClient]:
    llm = create_llm_client(app.config.llm)
    try:
        yield llm
    finally:
        await llm.close()


def load_run_adapter(app: App, provider: EmbeddingProvider) -> Optional[AdapterMatrix]:
    """Configured adapter, checked against the provider dimension"""
    path = app.config.retriever.adapter
    if not path:
        return None
    adapter = load_adapter(require_file(Path(path), "adapter"))
    if provider.dim is not None and adapter.cols != provider.dim:
        raise DimensionMismatchError(
            f"adapter {path} expects dim {adapter.cols} but provider {provider.name} has dim {provider.dim}"
        )
    return adapter


def index_path(app: App, key: str) -> Path:
    return app.config.index_dir / INDEX_FILES[key]


def _check_index_dim(index: VectorIndex, provider: EmbeddingProvider, adapter: Optional[AdapterMatrix], path: Path) -> None:
    expected = adapter.rows if adapter is not None else provider.dim
    if expected is not None and len(index) and index.dim != expected:
        raise DimensionMismatchError(f"index {path} has dim {index.dim}, queries will have dim {expected}")


def load_retriever(app: App, provider: Optional[EmbeddingProvider]) -> Retriever:
    """Retriever for the configured method with the indexes it needs"""
    config = app.config.retriever
    if config.method is RetrieverMethod.BM25:
        return Retriever(config, sparse_index=load_sparse_index(index_path(app, "sparse")))

    adapter = load_run_adapter(app, provider)
    key = "passages" if config.representation is Representation.SECTIONED else "passages_plain"
    passage_path = index_path(app, key)
    passage_index = load_vector_index(passage_path)
    _check_index_dim(passage_index, provider, adapter, passage_path)
    doc_index = None
    if config.method is RetrieverMethod.DHR:
        doc_path = index_path(app, "documents")
        doc_index = load_vector_index(doc_path)
        _check_index_dim(doc_index, provider, adapter, doc_path)
    return Retriever(
        config,
        provider=provider,
        passage_index=passage_index,
        doc_index=doc_index,
        adapter=adapter,
    )


def select_split(pairs: Sequence[QAPair], split: str) -> List[QAPair]:
    if split == "all":
        return list(pairs)
    return [p for p in pairs if p.split.value == split]


def check_pairs_resolve(pairs: Sequence[QAPair], corpus: Corpus) -> None:
    dangling = [p.question_id for p in pairs if p.passage_id not in corpus]
    if dangling:
        shown = ", ".join(dangling[:5])
        raise ReferentialIntegrityError(f"{len(dangling)} QA pairs reference passages not in the corpus: {shown}")
