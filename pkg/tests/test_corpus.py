"""
Tests for corpus loading, validation, ingest and statistics
"""

import json

import pytest

from corpus.builder import build_corpus
from corpus.loader import corpus_lines, emit_corpus, load_corpus, parse_records, read_jsonl, validate_corpus
from corpus.models import Corpus, PassageKind, TableRecord
from corpus.stats import corpus_stats
from corpus.tables import fallback_summary, header_cells, summarize_table
from corpus.tokenizer import count_tokens
from rag.llm import LLMClient, MockLLMClient
from tests.factories import TABLE_MARKDOWN, numbered, raw_records, small_corpus, write_jsonl
from utils.diagnostics import DiagnosticLog
from utils.errors import (
    CorpusValidationError,
    DuplicateIdError,
    LLMError,
    ReferentialIntegrityError,
)


class FailingLLM(LLMClient):
    """Live client whose every call fails"""

    async def generate(self, prompt, max_tokens=256):
        raise LLMError("HTTP 503")


class FixedLLM(LLMClient):
    """Live client that always returns the same summary"""

    def __init__(self, text):
        self.text = text
        self.calls = 0

    async def generate(self, prompt, max_tokens=256):
        self.calls += 1
        return self.text


def test_emitted_corpus_loads_back(tmp_path):
    """A corpus written to JSONL loads back with the same records"""
    corpus = small_corpus()
    path = emit_corpus(corpus, tmp_path / "corpus.jsonl")
    loaded = load_corpus(path)
    assert corpus_lines(loaded) == corpus_lines(corpus)
    assert loaded.passage("TS38.211#p0001").token_count == corpus.passage("TS38.211#p0001").token_count
    assert path.read_bytes().endswith(b"\n")
    assert b"\r\n" not in path.read_bytes()


def test_malformed_json_names_the_line(tmp_path):
    """Broken JSON is reported with its line number"""
    path = tmp_path / "bad.jsonl"
    path.write_text('{"type": "document", "doc_id": "A", "title": "x"}\n{not json\n', encoding="utf-8")
    with pytest.raises(CorpusValidationError) as excinfo:
        read_jsonl(path)
    assert excinfo.value.line_number == 2


def test_duplicate_passage_id_rejected():
    """The second occurrence of a passage id is the offending line"""
    records = [
        {"type": "document", "doc_id": "A", "title": "t"},
        {"type": "passage", "passage_id": "A#p1", "doc_id": "A", "kind": "text", "text": "one"},
        {"type": "passage", "passage_id": "A#p1", "doc_id": "A", "kind": "text", "text": "two"},
    ]
    with pytest.raises(DuplicateIdError) as excinfo:
        parse_records(numbered(records))
    assert excinfo.value.line_number == 3


def test_paragraph_records_only_allowed_for_ingest():
    """Stored corpora contain passages, not raw paragraphs"""
    records = [{"type": "paragraph", "doc_id": "A", "text": "raw"}]
    with pytest.raises(CorpusValidationError):
        parse_records(numbered(records))
    assert len(parse_records(numbered(records), allow_paragraphs=True).units) == 1


def test_passage_with_unknown_document_rejected(tmp_path):
    records = [
        {"type": "document", "doc_id": "A", "title": "t"},
        {"type": "passage", "passage_id": "B#p1", "doc_id": "B", "kind": "text", "text": "orphan"},
    ]
    with pytest.raises(ReferentialIntegrityError) as excinfo:
        load_corpus(write_jsonl(records, tmp_path / "c.jsonl"))
    assert excinfo.value.line_number == 2


def test_table_without_caption_passage_rejected():
    """Every table needs a caption passage"""
    corpus = small_corpus()
    passages = tuple(p for p in corpus.passages if p.kind is not PassageKind.TABLE_CAPTION)
    with pytest.raises(ReferentialIntegrityError):
        validate_corpus(Corpus(documents=corpus.documents, passages=passages, tables=corpus.tables))


def test_table_markdown_must_be_a_table():
    corpus = small_corpus()
    table = corpus.tables["TS38.211#t0001"]
    broken = TableRecord(table.table_id, table.doc_id, table.section_path, table.caption, "not a table")
    with pytest.raises(CorpusValidationError):
        validate_corpus(Corpus(documents=corpus.documents, passages=corpus.passages, tables={table.table_id: broken}))


def test_text_passage_over_limit_rejected():
    corpus = small_corpus()
    with pytest.raises(CorpusValidationError):
        validate_corpus(corpus, token_limit=10)


@pytest.mark.asyncio
async def test_ingest_splits_aggregates_and_attaches_tables():
    """Raw records become bounded passages with caption and summary passages per table"""
    diagnostics = DiagnosticLog()
    corpus = await build_corpus(numbered(raw_records()), MockLLMClient(), token_limit=512, min_tokens=64,
                                diagnostics=diagnostics)

    text = [p for p in corpus.passages if p.kind is PassageKind.TEXT]
    assert all(count_tokens(p.text) <= 512 for p in text)
    assert len([p for p in text if p.doc_id == "TS36.300"]) >= 2
    assert text[0].passage_id == "TS36.300#p0001"

    caption = corpus.passage("TS23.501#t0001#caption")
    summary = corpus.passage("TS23.501#t0001#summary")
    assert caption.text == "Table 4.1-1: Network functions"
    assert summary.kind is PassageKind.TABLE_SUMMARY
    ids = [p.passage_id for p in corpus.passages]
    assert ids.index(summary.passage_id) == ids.index(caption.passage_id) + 1
    assert corpus.tables["TS23.501#t0001"].summary == summary.text
    assert "Function" in summary.text


@pytest.mark.asyncio
async def test_ingest_is_idempotent(tmp_path):
    """Ingesting an ingested corpus reproduces it byte for byte"""
    first = await build_corpus(numbered(raw_records()), MockLLMClient())
    path = emit_corpus(first, tmp_path / "first.jsonl")
    second = await build_corpus(read_jsonl(path), MockLLMClient())
    again = emit_corpus(second, tmp_path / "second.jsonl")
    assert path.read_bytes() == again.read_bytes()


@pytest.mark.asyncio
async def test_ingest_rejects_unknown_document():
    records = [{"type": "paragraph", "doc_id": "missing", "text": "orphan paragraph"}]
    with pytest.raises(ReferentialIntegrityError):
        await build_corpus(numbered(records), MockLLMClient())


@pytest.mark.asyncio
async def test_ingest_drops_empty_paragraphs_with_diagnostic():
    records = [
        {"type": "document", "doc_id": "A", "title": "t"},
        {"type": "paragraph", "doc_id": "A", "text": "   "},
        {"type": "paragraph", "doc_id": "A", "text": "Kept paragraph."},
    ]
    diagnostics = DiagnosticLog()
    corpus = await build_corpus(numbered(records), MockLLMClient(), diagnostics=diagnostics)
    assert len(corpus.passages) == 1
    assert diagnostics.counts() == {"empty_passage": 1}


def test_header_cells_and_fallback_summary():
    """The rule-based summary names the header columns"""
    assert header_cells(TABLE_MARKDOWN) == ["Parameter", "Value", "Unit"]
    table = TableRecord("T#t1", "T", (), "Table 1: Values", TABLE_MARKDOWN)
    summary = fallback_summary(table)
    assert summary.startswith("Table 1: Values")
    assert "Parameter, Value, Unit" in summary


@pytest.mark.asyncio
async def test_summary_uses_live_client_text():
    llm = FixedLLM("  Numerology parameters per band.  ")
    table = TableRecord("T#t1", "T", (), "Table 1", TABLE_MARKDOWN)
    assert await summarize_table(table, llm) == "Numerology parameters per band."
    assert llm.calls == 1


@pytest.mark.asyncio
async def test_summary_falls_back_when_client_fails():
    """A failing client yields the rule-based summary and a diagnostic"""
    diagnostics = DiagnosticLog()
    table = TableRecord("T#t1", "T", (), "Table 1", TABLE_MARKDOWN)
    summary = await summarize_table(table, FailingLLM(), diagnostics)
    assert summary == fallback_summary(table)
    assert diagnostics.subjects("summary_fallback") == ["T#t1"]


def test_corpus_stats_counts():
    """Exact counts and means over the small corpus"""
    stats = corpus_stats(small_corpus()).to_dict()
    assert stats["n_documents"] == 2
    assert stats["n_passages"] == 7
    assert stats["n_tables"] == 1
    assert stats["tables_per_document_mean"] == 0.5
    assert stats["passages_per_kind"] == {"text": 5, "table_caption": 1, "table_summary": 1}
    assert stats["per_release_document_counts"] == {"Rel-16": 1, "Rel-17": 1}
    assert stats["mean_tokens_table"] == count_tokens(TABLE_MARKDOWN)
    json.dumps(stats)


def test_corpus_stats_empty_means_are_none():
    stats = corpus_stats(Corpus.empty())
    assert stats.n_documents == 0
    assert stats.tables_per_document_mean is None
    assert stats.mean_tokens_text_passage is None
    assert stats.mean_tokens_table is None


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
