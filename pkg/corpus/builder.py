"""
Ingest pipeline: raw paragraphs and passages into a validated corpus
"""

import asyncio
import logging
from dataclasses import replace
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Set, Tuple, Union

from corpus.loader import Paragraph, parse_records, validate_corpus
from corpus.models import Corpus, Passage, PassageKind, TableRecord
from corpus.splitter import SimilarityFn, VectorSimilarity, aggregate_short, split_paragraph, split_sentences
from corpus.tables import header_cells, summarize_table
from corpus.tokenizer import count_tokens
from utils.constants import MIN_AGGREGATE_TOKENS, TOKEN_LIMIT
from utils.diagnostics import DiagnosticLog
from utils.errors import ReferentialIntegrityError

if TYPE_CHECKING:
    from index.embeddings import EmbeddingProvider
    from rag.llm import LLMClient

logger = logging.getLogger(__name__)


def caption_passage_id(table_id: str) -> str:
    return f"{table_id}#caption"


def summary_passage_id(table_id: str) -> str:
    return f"{table_id}#summary"


async def sentence_similarity(
    records: Iterable[Tuple[int, Dict[str, Any]]],
    provider: "EmbeddingProvider",
    token_limit: int = TOKEN_LIMIT
) -> SimilarityFn:
    """Embed the sentences of every over-limit paragraph and compare them by cosine"""
    from index.embeddings import embed

    sentences: List[str] = []
    for _, data in records:
        text = data.get("text")
        if data.get("type") in ("paragraph", "passage") and isinstance(text, str):
            if data.get("kind", "text") == "text" and count_tokens(text) > token_limit:
                sentences.extend(split_sentences(text))
    unique = sorted(set(sentences))
    vectors = await embed(provider, unique) if unique else []
    logger.info("Embedded %d sentences for split-point similarity", len(unique))
    return VectorSimilarity(dict(zip(unique, vectors)))


class _IdAllocator:
    """Assigns `<doc_id>#pNNNN` ids to raw paragraphs in document order"""

    def __init__(self, taken: Set[str]):
        self.taken = set(taken)
        self.counters: Dict[str, int] = {}

    def paragraph(self, doc_id: str) -> str:
        while True:
            self.counters[doc_id] = self.counters.get(doc_id, 0) + 1
            candidate = f"{doc_id}#p{self.counters[doc_id]:04d}"
            if candidate not in self.taken:
                self.taken.add(candidate)
                return candidate

    def chunk(self, base: str, n: int) -> str:
        candidate = f"{base}.{n}"
        while candidate in self.taken:
            candidate += "_"
        self.taken.add(candidate)
        return candidate


def _split_units(
    units: List[Union[Passage, Paragraph]],
    unit_lines: List[int],
    documents: Dict[str, Any],
    allocator: _IdAllocator,
    token_limit: int,
    similarity: Optional[SimilarityFn],
    diagnostics: DiagnosticLog
) -> List[Passage]:
    passages: List[Passage] = []
    for unit, line_number in zip(units, unit_lines):
        if unit.doc_id not in documents:
            raise ReferentialIntegrityError(f"unknown doc_id {unit.doc_id!r}", line_number)
        if isinstance(unit, Passage) and unit.kind is not PassageKind.TEXT:
            passages.append(unit)
            continue

        base_id = unit.passage_id if isinstance(unit, Passage) else allocator.paragraph(unit.doc_id)
        chunks = split_paragraph(unit.text, token_limit, similarity, diagnostics, subject=base_id)
        if not chunks:
            diagnostics.warn("empty_passage", base_id, f"line {line_number}: no tokens, dropped")
            continue
        if isinstance(unit, Passage) and len(chunks) == 1 and chunks[0] == unit.text:
            passages.append(unit)
            continue
        for n, chunk in enumerate(chunks):
            passages.append(Passage(
                passage_id=base_id if n == 0 else allocator.chunk(base_id, n),
                doc_id=unit.doc_id,
                section_path=unit.section_path,
                kind=PassageKind.TEXT,
                text=chunk,
            ))
    return passages


def _caption_text(table: TableRecord) -> str:
    return table.caption.strip() or ", ".join(header_cells(table.markdown)) or table.table_id


def _attach_table_passages(passages: List[Passage], tables: Dict[str, TableRecord]) -> List[Passage]:
    """Ensure one caption and one summary passage per table, summary right after caption"""
    captioned = {p.table_id for p in passages if p.kind is PassageKind.TABLE_CAPTION}
    summarized = {p.table_id for p in passages if p.kind is PassageKind.TABLE_SUMMARY}

    def summary_for(table: TableRecord) -> Passage:
        return Passage(
            passage_id=summary_passage_id(table.table_id),
            doc_id=table.doc_id,
            section_path=table.section_path,
            kind=PassageKind.TABLE_SUMMARY,
            text=table.summary,
            table_id=table.table_id,
        )

    out: List[Passage] = []
    for passage in passages:
        out.append(passage)
        table = tables.get(passage.table_id) if passage.kind is PassageKind.TABLE_CAPTION else None
        if table is not None and table.table_id not in summarized:
            out.append(summary_for(table))
            summarized.add(table.table_id)

    for table in tables.values():
        if table.table_id in captioned:
            continue
        created = [Passage(
            passage_id=caption_passage_id(table.table_id),
            doc_id=table.doc_id,
            section_path=table.section_path,
            kind=PassageKind.TABLE_CAPTION,
            text=_caption_text(table),
            table_id=table.table_id,
        )]
        if table.table_id not in summarized:
            created.append(summary_for(table))
            summarized.add(table.table_id)
        position = max((i + 1 for i, p in enumerate(out) if p.doc_id == table.doc_id), default=len(out))
        out[position:position] = created
    return out


async def build_corpus(
    records: Iterable[Tuple[int, Dict[str, Any]]],
    llm: "LLMClient",
    token_limit: int = TOKEN_LIMIT,
    min_tokens: int = MIN_AGGREGATE_TOKENS,
    similarity: Optional[SimilarityFn] = None,
    diagnostics: Optional[DiagnosticLog] = None
) -> Corpus:
    """
    Build a corpus from raw ingest records

    Paragraphs are split to the token limit, short text passages of one
    section are aggregated, empty table summaries are generated and every
    table gets caption and summary passages. Running the pipeline on its own
    output reproduces it unchanged.

    Args:
        records: (line_number, object) pairs as returned by read_jsonl
        llm: Client used for table summaries
        token_limit: Maximum tokens per text passage
        min_tokens: Aggregation threshold for short passages
        similarity: Split-point similarity, Jaccard when None
        diagnostics: Collects warning records

    Returns:
        Validated corpus
    """
    diagnostics = diagnostics if diagnostics is not None else DiagnosticLog()
    parsed = parse_records(records, allow_paragraphs=True)
    documents = {d.doc_id: d for d in parsed.documents}

    taken = {identifier for kind, identifier in parsed.lines if kind == "passage"}
    passages = _split_units(
        parsed.units, parsed.unit_lines, documents, _IdAllocator(taken),
        token_limit, similarity, diagnostics
    )

    pending = [t for t in parsed.tables if not t.summary.strip()]
    summaries = await asyncio.gather(*(summarize_table(t, llm, diagnostics) for t in pending))
    generated = {t.table_id: s for t, s in zip(pending, summaries)}
    tables = {
        t.table_id: replace(t, summary=generated[t.table_id]) if t.table_id in generated else t
        for t in parsed.tables
    }
    if generated:
        logger.info("Generated %d table summaries", len(generated))

    passages = _attach_table_passages(passages, tables)
    passages = aggregate_short(passages, min_tokens, token_limit)

    corpus = Corpus(documents=documents, passages=tuple(passages), tables=tables)
    validate_corpus(corpus, parsed.lines, token_limit)
    return corpus
