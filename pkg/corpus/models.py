"""
Data models for specqa corpora
Defines documents, passages, tables and corpus statistics
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from corpus.tokenizer import count_tokens
from utils.errors import CorpusValidationError


class PassageKind(str, Enum):
    """Kinds of retrievable passages"""
    TEXT = "text"
    TABLE_CAPTION = "table_caption"
    TABLE_SUMMARY = "table_summary"

    @property
    def is_table(self) -> bool:
        return self is not PassageKind.TEXT


def _require(data: Dict[str, Any], key: str, line_number: Optional[int]) -> Any:
    if key not in data:
        raise CorpusValidationError(f"missing field '{key}'", line_number)
    return data[key]


def _string(data: Dict[str, Any], key: str, line_number: Optional[int], default: Optional[str] = None) -> str:
    value = data.get(key, default) if default is not None else _require(data, key, line_number)
    if not isinstance(value, str):
        raise CorpusValidationError(f"field '{key}' must be a string", line_number)
    return value


def _section_path(data: Dict[str, Any], line_number: Optional[int]) -> Tuple[str, ...]:
    path = data.get("section_path", [])
    if not isinstance(path, list) or not all(isinstance(p, str) for p in path):
        raise CorpusValidationError("field 'section_path' must be a list of strings", line_number)
    return tuple(path)


@dataclass(frozen=True)
class SectionTitle:
    """Entry of a document's table of contents"""
    number: str
    title: str
    depth: int

    def to_dict(self) -> Dict[str, Any]:
        return {"number": self.number, "title": self.title, "depth": self.depth}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "SectionTitle":
        depth = data.get("depth", 1)
        if not isinstance(depth, int) or depth < 1:
            raise CorpusValidationError(f"section depth must be an integer >= 1, got {depth!r}", line_number)
        return cls(
            number=str(data.get("number", "")),
            title=_string(data, "title", line_number),
            depth=depth,
        )


@dataclass(frozen=True)
class DocumentRecord:
    """Technical specification document metadata"""
    doc_id: str
    title: str
    abstract: str = ""
    release: str = ""
    section_titles: Tuple[SectionTitle, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        """Convert to corpus JSONL object"""
        return {
            "type": "document",
            "doc_id": self.doc_id,
            "title": self.title,
            "abstract": self.abstract,
            "release": self.release,
            "sections": [s.to_dict() for s in self.section_titles],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "DocumentRecord":
        """Create from corpus JSONL object"""
        doc_id = _string(data, "doc_id", line_number)
        if not doc_id:
            raise CorpusValidationError("empty doc_id", line_number)
        sections = data.get("sections", [])
        if not isinstance(sections, list):
            raise CorpusValidationError("field 'sections' must be a list", line_number)
        return cls(
            doc_id=doc_id,
            title=_string(data, "title", line_number, default=""),
            abstract=_string(data, "abstract", line_number, default=""),
            release=_string(data, "release", line_number, default=""),
            section_titles=tuple(SectionTitle.from_dict(s, line_number) for s in sections),
        )


@dataclass(frozen=True)
class Passage:
    """Unit of retrieval: a text segment or a table caption/summary entry"""
    passage_id: str
    doc_id: str
    section_path: Tuple[str, ...]
    kind: PassageKind
    text: str
    table_id: Optional[str] = None
    token_count: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "section_path", tuple(self.section_path))
        object.__setattr__(self, "kind", PassageKind(self.kind))
        object.__setattr__(self, "token_count", count_tokens(self.text))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to corpus JSONL object (token_count is never written)"""
        return {
            "type": "passage",
            "passage_id": self.passage_id,
            "doc_id": self.doc_id,
            "section_path": list(self.section_path),
            "kind": self.kind.value,
            "text": self.text,
            "table_id": self.table_id,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "Passage":
        """Create from corpus JSONL object"""
        kind_value = data.get("kind", PassageKind.TEXT.value)
        try:
            kind = PassageKind(kind_value)
        except ValueError:
            raise CorpusValidationError(f"unknown passage kind {kind_value!r}", line_number)
        table_id = data.get("table_id")
        if table_id is not None and not isinstance(table_id, str):
            raise CorpusValidationError("field 'table_id' must be a string or null", line_number)
        passage_id = _string(data, "passage_id", line_number)
        if not passage_id:
            raise CorpusValidationError("empty passage_id", line_number)
        return cls(
            passage_id=passage_id,
            doc_id=_string(data, "doc_id", line_number),
            section_path=_section_path(data, line_number),
            kind=kind,
            text=_string(data, "text", line_number),
            table_id=table_id,
        )


@dataclass(frozen=True)
class TableRecord:
    """Full table payload resolved from caption/summary hits"""
    table_id: str
    doc_id: str
    section_path: Tuple[str, ...]
    caption: str
    markdown: str
    summary: str = ""
    token_count: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "section_path", tuple(self.section_path))
        object.__setattr__(self, "token_count", count_tokens(self.markdown))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to corpus JSONL object"""
        return {
            "type": "table",
            "table_id": self.table_id,
            "doc_id": self.doc_id,
            "section_path": list(self.section_path),
            "caption": self.caption,
            "markdown": self.markdown,
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "TableRecord":
        """Create from corpus JSONL object"""
        table_id = _string(data, "table_id", line_number)
        if not table_id:
            raise CorpusValidationError("empty table_id", line_number)
        return cls(
            table_id=table_id,
            doc_id=_string(data, "doc_id", line_number),
            section_path=_section_path(data, line_number),
            caption=_string(data, "caption", line_number, default=""),
            markdown=_string(data, "markdown", line_number),
            summary=_string(data, "summary", line_number, default=""),
        )


@dataclass(frozen=True)
class Corpus:
    """Immutable hybrid corpus of documents, passages and tables"""
    documents: Dict[str, DocumentRecord]
    passages: Tuple[Passage, ...]
    tables: Dict[str, TableRecord]

    def __post_init__(self):
        object.__setattr__(self, "passages", tuple(self.passages))
        object.__setattr__(self, "_by_id", {p.passage_id: p for p in self.passages})

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def passage(self, passage_id: str) -> Passage:
        try:
            return self._by_id[passage_id]
        except KeyError:
            raise KeyError(f"unknown passage_id {passage_id!r}") from None

    def table_for(self, passage: Passage) -> Optional[TableRecord]:
        if passage.table_id is None:
            return None
        return self.tables.get(passage.table_id)

    @classmethod
    def empty(cls) -> "Corpus":
        return cls(documents={}, passages=(), tables={})


@dataclass
class StatsReport:
    """Corpus statistics; means are None over empty populations"""
    n_documents: int
    n_passages: int
    n_tables: int
    tables_per_document_mean: Optional[float]
    mean_tokens_text_passage: Optional[float]
    mean_tokens_table: Optional[float]
    per_release_document_counts: Dict[str, int] = field(default_factory=dict)
    passages_per_kind: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {
            "n_documents": self.n_documents,
            "n_passages": self.n_passages,
            "n_tables": self.n_tables,
            "tables_per_document_mean": self.tables_per_document_mean,
            "mean_tokens_text_passage": self.mean_tokens_text_passage,
            "mean_tokens_table": self.mean_tokens_table,
            "per_release_document_counts": dict(self.per_release_document_counts),
            "passages_per_kind": dict(self.passages_per_kind),
        }
