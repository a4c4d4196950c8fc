"""
Retrieval run log JSONL
"""

import json
from pathlib import Path
from typing import Iterable, List, Optional, Union

from retrieve.models import RetrievalResult, RunLogEntry, RetrieverConfig, RetrieverMethod
from utils.constants import REPORT_PRECISION
from utils.errors import DataError


def make_entry(query_id: str, config: RetrieverConfig, results: List[RetrievalResult], k: Optional[int] = None) -> RunLogEntry:
    return RunLogEntry(
        query_id=query_id,
        method=config.method.value,
        k=k if k is not None else config.k,
        d=config.d if config.method is RetrieverMethod.DHR else None,
        results=list(results),
    )


def _rounded(entry: RunLogEntry) -> dict:
    data = entry.to_dict()
    for result in data["results"]:
        result["score"] = round(result["score"], REPORT_PRECISION)
    return data


def write_run_log(entries: Iterable[RunLogEntry], path: Union[str, Path]) -> Path:
    """Write entries as compact JSONL with scores rounded for stable bytes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for entry in entries:
            handle.write(json.dumps(_rounded(entry), ensure_ascii=False, separators=(",", ":")) + "\n")
    return path


def read_run_log(path: Union[str, Path]) -> List[RunLogEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                entries.append(RunLogEntry.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise DataError(f"{path}: line {line_number}: bad run log entry ({e})") from e
    return entries
