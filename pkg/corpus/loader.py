"""
Corpus JSONL reading, validation and emission
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from corpus.models import Corpus, DocumentRecord, Passage, PassageKind, TableRecord
from utils.constants import TOKEN_LIMIT
from utils.errors import (
    CorpusValidationError,
    DuplicateIdError,
    ReferentialIntegrityError,
)

logger = logging.getLogger(__name__)

RECORD_TYPES = ("document", "passage", "table", "paragraph")


@dataclass
class Paragraph:
    """Raw ingest paragraph without an id or length bound"""
    doc_id: str
    section_path: Tuple[str, ...]
    text: str


@dataclass
class ParsedRecords:
    """Typed records in input order with their source line numbers"""
    documents: List[DocumentRecord] = field(default_factory=list)
    units: List[Union[Passage, Paragraph]] = field(default_factory=list)
    tables: List[TableRecord] = field(default_factory=list)
    lines: Dict[Tuple[str, str], int] = field(default_factory=dict)
    unit_lines: List[int] = field(default_factory=list)


def read_jsonl(path: Union[str, Path]) -> List[Tuple[int, Dict[str, Any]]]:
    """Read a JSONL file into (line_number, object) pairs, skipping blank lines"""
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusValidationError(f"malformed JSON: {e.msg}", line_number)
            if not isinstance(data, dict):
                raise CorpusValidationError("expected a JSON object", line_number)
            records.append((line_number, data))
    return records


def parse_records(
    records: Iterable[Tuple[int, Dict[str, Any]]],
    allow_paragraphs: bool = False
) -> ParsedRecords:
    """Turn raw JSON objects into typed records, rejecting duplicate ids"""
    parsed = ParsedRecords()
    for line_number, data in records:
        record_type = data.get("type")
        if record_type not in RECORD_TYPES or (record_type == "paragraph" and not allow_paragraphs):
            raise CorpusValidationError(f"unknown record type {record_type!r}", line_number)

        if record_type == "document":
            document = DocumentRecord.from_dict(data, line_number)
            _claim(parsed, "document", document.doc_id, line_number)
            parsed.documents.append(document)
        elif record_type == "table":
            table = TableRecord.from_dict(data, line_number)
            _claim(parsed, "table", table.table_id, line_number)
            parsed.tables.append(table)
        elif record_type == "passage":
            passage = Passage.from_dict(data, line_number)
            _claim(parsed, "passage", passage.passage_id, line_number)
            parsed.units.append(passage)
            parsed.unit_lines.append(line_number)
        else:
            text = data.get("text")
            doc_id = data.get("doc_id")
            if not isinstance(text, str) or not isinstance(doc_id, str):
                raise CorpusValidationError("paragraph needs string 'doc_id' and 'text'", line_number)
            path = data.get("section_path", [])
            if not isinstance(path, list):
                raise CorpusValidationError("field 'section_path' must be a list of strings", line_number)
            parsed.units.append(Paragraph(doc_id=doc_id, section_path=tuple(path), text=text))
            parsed.unit_lines.append(line_number)
    return parsed


def _claim(parsed: ParsedRecords, kind: str, identifier: str, line_number: int) -> None:
    key = (kind, identifier)
    if key in parsed.lines:
        raise DuplicateIdError(
            f"duplicate {kind} id {identifier!r} (first seen on line {parsed.lines[key]})",
            line_number
        )
    parsed.lines[key] = line_number


def validate_corpus(
    corpus: Corpus,
    lines: Optional[Dict[Tuple[str, str], int]] = None,
    token_limit: int = TOKEN_LIMIT
) -> None:
    """
    Check every record invariant of a corpus

    Raises:
        CorpusValidationError (or a subclass) naming the offending id and,
        when known, its source line
    """
    lines = lines or {}
    seen = set()
    for passage in corpus.passages:
        line = lines.get(("passage", passage.passage_id))
        if passage.passage_id in seen:
            raise DuplicateIdError(f"duplicate passage id {passage.passage_id!r}", line)
        seen.add(passage.passage_id)
        if passage.doc_id not in corpus.documents:
            raise ReferentialIntegrityError(
                f"passage {passage.passage_id!r} references unknown doc_id {passage.doc_id!r}", line
            )
        if passage.kind is PassageKind.TEXT:
            if passage.table_id is not None:
                raise CorpusValidationError(f"text passage {passage.passage_id!r} must not carry a table_id", line)
            if passage.token_count > token_limit:
                raise CorpusValidationError(
                    f"text passage {passage.passage_id!r} has {passage.token_count} tokens (limit {token_limit})",
                    line
                )
        else:
            if passage.table_id is None:
                raise CorpusValidationError(
                    f"{passage.kind.value} passage {passage.passage_id!r} requires a table_id", line
                )
            if passage.table_id not in corpus.tables:
                raise ReferentialIntegrityError(
                    f"passage {passage.passage_id!r} references unknown table_id {passage.table_id!r}", line
                )
        if passage.token_count < 1:
            raise CorpusValidationError(f"passage {passage.passage_id!r} has no tokens", line)

    captioned = {p.table_id for p in corpus.passages if p.kind is PassageKind.TABLE_CAPTION}
    for table in corpus.tables.values():
        line = lines.get(("table", table.table_id))
        if table.doc_id not in corpus.documents:
            raise ReferentialIntegrityError(
                f"table {table.table_id!r} references unknown doc_id {table.doc_id!r}", line
            )
        if not table.markdown.strip() or not table.markdown.lstrip().startswith("|"):
            raise CorpusValidationError(f"table {table.table_id!r} markdown must start with '|'", line)
        if table.table_id not in captioned:
            raise ReferentialIntegrityError(f"table {table.table_id!r} has no table_caption passage", line)


def load_corpus(path: Union[str, Path], token_limit: int = TOKEN_LIMIT) -> Corpus:
    """
    Load and validate a corpus JSONL file

    Args:
        path: Corpus file
        token_limit: Maximum tokens of a text passage

    Returns:
        Validated, immutable Corpus
    """
    parsed = parse_records(read_jsonl(path))
    corpus = Corpus(
        documents={d.doc_id: d for d in parsed.documents},
        passages=tuple(parsed.units),
        tables={t.table_id: t for t in parsed.tables},
    )
    validate_corpus(corpus, parsed.lines, token_limit)
    logger.info(
        "Loaded corpus %s: %d documents, %d passages, %d tables",
        path, len(corpus.documents), len(corpus.passages), len(corpus.tables)
    )
    return corpus


def corpus_lines(corpus: Corpus) -> List[str]:
    """Serialized JSONL lines: documents, then passages, then tables"""
    records: List[Dict[str, Any]] = [d.to_dict() for d in corpus.documents.values()]
    records.extend(p.to_dict() for p in corpus.passages)
    records.extend(t.to_dict() for t in corpus.tables.values())
    return [json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in records]


def emit_corpus(corpus: Corpus, path: Union[str, Path]) -> Path:
    """Write a corpus as UTF-8, LF-terminated JSONL"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in corpus_lines(corpus):
            handle.write(line + "\n")
    return path
