"""
Data models for the generative reader and QA datasets
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from evaluation.models import rounded
from retrieve.models import RunLogEntry
from utils.constants import OPTION_LETTERS
from utils.errors import DataError


class Difficulty(str, Enum):
    """MCQ difficulty levels"""
    EASY = "easy"
    INTERMEDIATE = "intermediate"
    HARD = "hard"


class Split(str, Enum):
    """QA dataset split"""
    TRAIN = "train"
    TEST = "test"


class AnswerStatus(str, Enum):
    """Outcome of asking the reader one MCQ"""
    OK = "ok"
    UNPARSEABLE = "unparseable"
    ERRORED = "errored"


def _where(line_number: Optional[int]) -> str:
    return f"line {line_number}: " if line_number is not None else ""


@dataclass(frozen=True)
class MCQItem:
    """Multiple-choice question with one correct option"""
    item_id: str
    difficulty: Difficulty
    question: str
    options: Tuple[str, ...]
    answer_index: int
    gold_passage_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        try:
            object.__setattr__(self, "difficulty", Difficulty(self.difficulty))
        except ValueError:
            raise DataError(f"item {self.item_id!r}: unknown difficulty {self.difficulty!r}") from None
        if not 2 <= len(self.options) <= len(OPTION_LETTERS):
            raise DataError(f"item {self.item_id!r}: needs 2 to {len(OPTION_LETTERS)} options, got {len(self.options)}")
        if not 0 <= self.answer_index < len(self.options):
            raise DataError(f"item {self.item_id!r}: answer_index {self.answer_index} out of range")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "item_id": self.item_id,
            "difficulty": self.difficulty.value,
            "question": self.question,
            "options": list(self.options),
            "answer_index": self.answer_index,
            "gold_passage_id": self.gold_passage_id,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "MCQItem":
        try:
            return cls(
                item_id=str(data["item_id"]),
                difficulty=data["difficulty"],
                question=str(data["question"]),
                options=tuple(str(o) for o in data["options"]),
                answer_index=int(data["answer_index"]),
                gold_passage_id=data.get("gold_passage_id"),
            )
        except KeyError as e:
            raise DataError(f"{_where(line_number)}MCQ item missing field {e}") from None
        except (TypeError, ValueError) as e:
            raise DataError(f"{_where(line_number)}malformed field: {e}") from None
        except DataError as e:
            raise DataError(f"{_where(line_number)}{e}") from None


@dataclass(frozen=True)
class QAPair:
    """Question/answer pair tied to one source passage"""
    question_id: str
    question: str
    answer: str
    passage_id: str
    split: Split = Split.TRAIN

    def __post_init__(self):
        try:
            object.__setattr__(self, "split", Split(self.split))
        except ValueError:
            raise DataError(f"pair {self.question_id!r}: unknown split {self.split!r}") from None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "question_id": self.question_id,
            "question": self.question,
            "answer": self.answer,
            "passage_id": self.passage_id,
            "split": self.split.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], line_number: Optional[int] = None) -> "QAPair":
        try:
            return cls(
                question_id=str(data["question_id"]),
                question=str(data["question"]),
                answer=str(data.get("answer", "")),
                passage_id=str(data["passage_id"]),
                split=data.get("split", Split.TRAIN.value),
            )
        except KeyError as e:
            raise DataError(f"{_where(line_number)}QA pair missing field {e}") from None
        except (TypeError, ValueError) as e:
            raise DataError(f"{_where(line_number)}malformed field: {e}") from None
        except DataError as e:
            raise DataError(f"{_where(line_number)}{e}") from None


@dataclass
class MCQAnswer:
    """Reader outcome and retrieval log for one MCQ item"""
    item_id: str
    predicted_index: Optional[int]
    status: AnswerStatus
    raw_text: str
    entry: RunLogEntry
    context: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "item_id": self.item_id,
            "predicted_index": self.predicted_index,
            "status": self.status.value,
            "raw_text": self.raw_text,
        }


@dataclass
class QAStats:
    """Descriptive statistics of a generated QA dataset"""
    n_pairs: int
    per_split: Dict[str, int]
    mean_question_tokens: Optional[float]
    mean_answer_tokens: Optional[float]
    first_word_share: Dict[str, float]
    document_share: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return rounded({
            "n_pairs": self.n_pairs,
            "per_split": dict(self.per_split),
            "mean_question_tokens": self.mean_question_tokens,
            "mean_answer_tokens": self.mean_answer_tokens,
            "first_word_share": dict(self.first_word_share),
            "document_share": dict(self.document_share),
        })

