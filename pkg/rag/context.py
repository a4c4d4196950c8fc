"""
Context assembly for the generative reader
"""

import logging
from typing import List, Optional, Sequence

from corpus.tokenizer import count_tokens
from retrieve.models import ContextItem
from utils.constants import MIN_CONTEXT_TOKENS
from utils.diagnostics import DiagnosticLog
from utils.errors import UsageError

logger = logging.getLogger(__name__)

BLOCK_SEPARATOR = "\n\n"


def context_header(item: ContextItem) -> str:
    if item.section_path:
        return f"[[{item.doc_id} § {' > '.join(item.section_path)}]]"
    return f"[[{item.doc_id}]]"


def context_block(item: ContextItem) -> str:
    return f"{context_header(item)}\n{item.content.strip()}"


def assemble_context(
    items: Sequence[ContextItem],
    max_tokens: int,
    diagnostics: Optional[DiagnosticLog] = None
) -> str:
    """
    Concatenate context items in rank order within a token budget

    Items are never cut. Assembly stops at the first item that would exceed
    the budget; a first item that alone exceeds it is kept whole and flagged.
    """
    if max_tokens < MIN_CONTEXT_TOKENS:
        raise UsageError(f"context budget must be >= {MIN_CONTEXT_TOKENS} tokens, got {max_tokens}")

    blocks: List[str] = []
    used = 0
    for item in items:
        block = context_block(item)
        cost = count_tokens(block)
        if used + cost > max_tokens:
            if not blocks:
                blocks.append(block)
                message = f"{cost} tokens exceed the context budget of {max_tokens}; kept whole"
                if diagnostics is not None:
                    diagnostics.warn("oversized_context_item", item.source_passage_id, message)
                else:
                    logger.warning(f"{item.source_passage_id}: {message}")
            break
        blocks.append(block)
        used += cost
    return BLOCK_SEPARATOR.join(blocks)
