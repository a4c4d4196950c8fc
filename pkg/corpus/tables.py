"""
Table helpers: header parsing and caption/summary generation
"""

import logging
from typing import TYPE_CHECKING, List, Optional

from corpus.models import TableRecord
from utils.constants import SUMMARY_COLUMNS_MARKER
from utils.diagnostics import DiagnosticLog
from utils.errors import LLMError

if TYPE_CHECKING:
    from rag.llm import LLMClient

logger = logging.getLogger(__name__)

SUMMARY_PROMPT = (
    "Summarize the following technical-specification table in one or two sentences. "
    "Name what the rows and columns describe.\n\n"
    "Caption: {caption}\n\n{markdown}\n\nSummary:"
)
SUMMARY_MAX_TOKENS = 128


def header_cells(markdown: str) -> List[str]:
    """Cell texts of the first Markdown table row"""
    first = markdown.strip().splitlines()[0] if markdown.strip() else ""
    cells = [cell.strip() for cell in first.strip().split("|")]
    if cells and cells[0] == "":
        cells = cells[1:]
    if cells and cells[-1] == "":
        cells = cells[:-1]
    return cells


def fallback_summary(table: TableRecord) -> str:
    """Deterministic summary: caption plus the header row's column names"""
    columns = SUMMARY_COLUMNS_MARKER + ", ".join(header_cells(table.markdown))
    caption = table.caption.strip()
    return f"{caption} {columns}" if caption else columns


async def summarize_table(
    table: TableRecord,
    llm: "LLMClient",
    diagnostics: Optional[DiagnosticLog] = None
) -> str:
    """
    Generate a table summary for multi-vector indexing

    Mock clients get the caption/columns rule. A failing live client also
    falls back to that rule and the table is flagged in `diagnostics`.
    """
    if not table.markdown.strip():
        raise ValueError(f"table {table.table_id} has empty markdown")

    if getattr(llm, "is_mock", False):
        return fallback_summary(table)

    prompt = SUMMARY_PROMPT.format(caption=table.caption, markdown=table.markdown)
    try:
        text = (await llm.generate(prompt, SUMMARY_MAX_TOKENS)).strip()
    except LLMError as e:
        text = ""
        reason = str(e)
    else:
        reason = "empty completion"

    if text:
        return text

    if diagnostics is not None:
        diagnostics.warn("summary_fallback", table.table_id, reason)
    else:
        logger.warning("Summary fallback for %s: %s", table.table_id, reason)
    return fallback_summary(table)
