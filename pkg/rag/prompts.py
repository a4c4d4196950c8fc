"""
Prompt templates for the MCQ reader and QA-pair generation
"""

from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

from corpus.models import Passage, TableRecord
from utils.constants import MCQ_DIRECTIVE, OPTION_LETTERS
from utils.errors import UsageError

if TYPE_CHECKING:
    from rag.models import MCQItem

ASSETS_DIR = Path(__file__).parent / "assets"
QA_PROMPT_VERSION = "v1"

MCQ_INSTRUCTION = (
    "Answer the following multiple-choice question about telecommunications "
    "technical specifications. Use the context when it is relevant."
)


@lru_cache(maxsize=None)
def qa_template(version: str = QA_PROMPT_VERSION) -> str:
    path = ASSETS_DIR / f"qa_generation.{version}.txt"
    if not path.exists():
        raise UsageError(f"unknown QA prompt version {version!r}")
    return path.read_text(encoding="utf-8").rstrip("\n")


def option_lines(options: Sequence[str]) -> str:
    if not 2 <= len(options) <= len(OPTION_LETTERS):
        raise UsageError(f"expected 2 to {len(OPTION_LETTERS)} options, got {len(options)}")
    return "\n".join(f"{letter}. {text}" for letter, text in zip(OPTION_LETTERS, options))


def build_mcq_prompt(item: "MCQItem", context: str) -> str:
    """
    Fixed MCQ template: instruction, context block, question, lettered options
    and the answer directive. An empty context gives the zero-shot prompt.
    """
    return (
        f"{MCQ_INSTRUCTION}\n\n"
        f"Context:\n{context}\n\n"
        f"Question: {item.question}\n\n"
        f"Options:\n{option_lines(item.options)}\n\n"
        f"{MCQ_DIRECTIVE}"
    )


def build_qa_prompt(
    passage: Passage,
    max_questions: int,
    table: Optional[TableRecord] = None,
    version: str = QA_PROMPT_VERSION
) -> str:
    """QA-generation prompt; a linked table is appended in Markdown"""
    table_block = ""
    if table is not None:
        table_block = f"\n\nTable {table.table_id} (Markdown):\n{table.markdown.strip()}"
    return qa_template(version).format(
        max_questions=max_questions,
        passage_id=passage.passage_id,
        doc_id=passage.doc_id,
        section=" > ".join(passage.section_path) or "-",
        text=passage.text.strip(),
        table_block=table_block,
    )
