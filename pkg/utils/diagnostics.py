"""
Diagnostic records with throttled log emission.
"""

import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

logger = logging.getLogger(__name__)


@dataclass
class Diagnostic:
    """One warning record raised while processing data"""
    category: str
    subject: str
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "category": self.category,
            "subject": self.subject,
            "message": self.message,
        }


class DiagnosticLog:
    """Keep every diagnostic; throttle log lines per (category, subject) within a window."""

    def __init__(self, window_seconds: int = 60):
        self.window = window_seconds
        self.records: List[Diagnostic] = []
        self.cache: Dict[Tuple[str, str], float] = {}

    def should_log(self, category: str, subject: str) -> bool:
        key = (category, subject)
        now = time.time()
        last = self.cache.get(key)
        if last is None or now - last > self.window:
            self.cache[key] = now
            return True
        return False

    def warn(self, category: str, subject: str, message: str) -> Diagnostic:
        record = Diagnostic(category=category, subject=subject, message=message)
        self.records.append(record)
        if self.should_log(category, subject):
            logger.warning("[%s] %s: %s", category, subject, message)
        return record

    def subjects(self, category: str) -> List[str]:
        return [r.subject for r in self.records if r.category == category]

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for record in self.records:
            out[record.category] = out.get(record.category, 0) + 1
        return dict(sorted(out.items()))

    def __len__(self) -> int:
        return len(self.records)
