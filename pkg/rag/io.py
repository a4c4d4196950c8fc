"""
JSONL readers and writers for MCQ items, QA pairs and reader answers
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from corpus.loader import read_jsonl
from rag.models import MCQItem, QAPair
from utils.errors import CorpusValidationError, DataError


def _records(path: Union[str, Path]):
    try:
        return read_jsonl(path)
    except CorpusValidationError as e:
        raise DataError(f"{path}: {e}") from e
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e


def _unique(items: List[Any], key: str, path: Union[str, Path]) -> None:
    seen = set()
    for item in items:
        identifier = getattr(item, key)
        if identifier in seen:
            raise DataError(f"{path}: duplicate {key} {identifier!r}")
        seen.add(identifier)


def read_mcq_items(path: Union[str, Path]) -> List[MCQItem]:
    items = [MCQItem.from_dict(data, line_number) for line_number, data in _records(path)]
    _unique(items, "item_id", path)
    return items


def read_qa_pairs(path: Union[str, Path]) -> List[QAPair]:
    pairs = [QAPair.from_dict(data, line_number) for line_number, data in _records(path)]
    _unique(pairs, "question_id", path)
    return pairs


def write_jsonl(records: Iterable[Dict[str, Any]], path: Union[str, Path]) -> Path:
    """Compact UTF-8 JSON lines with LF endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
    return path


def write_qa_pairs(pairs: Iterable[QAPair], path: Union[str, Path]) -> Path:
    return write_jsonl((p.to_dict() for p in pairs), path)


def write_mcq_items(items: Iterable[MCQItem], path: Union[str, Path]) -> Path:
    return write_jsonl((i.to_dict() for i in items), path)
