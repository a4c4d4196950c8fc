"""
MCQ reader: retrieve, assemble context, prompt the LLM and parse the letter
"""

import asyncio
import logging
import re
from typing import List, Optional, Sequence

from corpus.models import Corpus
from rag.context import assemble_context
from rag.llm import LLMClient
from rag.models import AnswerStatus, MCQAnswer, MCQItem
from rag.prompts import build_mcq_prompt
from retrieve.models import RetrievalResult, RunLogEntry
from retrieve.retrievers import Retriever
from retrieve.runlog import make_entry
from retrieve.tables import resolve_tables
from utils.constants import CONTEXT_TOKENS, LLM_MAX_TOKENS, OPTION_LETTERS
from utils.diagnostics import DiagnosticLog
from utils.errors import LLMError, UnparseableAnswerError, UsageError

logger = logging.getLogger(__name__)

ZERO_SHOT_METHOD = "zero_shot"

_LETTER_PATTERNS = (re.compile(r"\b([A-E])\b"), re.compile(r"\b([a-e])\b"))


def parse_mcq_answer(llm_text: str, n_options: int) -> int:
    """
    First standalone option letter in range, as a 0-based index

    Uppercase letters win; lowercase ones are only read when no uppercase
    letter is in range, so the article "a" does not shadow "C".

    Raises:
        UnparseableAnswerError: no letter within the first n_options
    """
    if not 2 <= n_options <= len(OPTION_LETTERS):
        raise UsageError(f"n_options must be in 2..{len(OPTION_LETTERS)}, got {n_options}")
    for pattern in _LETTER_PATTERNS:
        for match in pattern.finditer(llm_text):
            index = OPTION_LETTERS.index(match.group(1).upper())
            if index < n_options:
                return index
    raise UnparseableAnswerError(llm_text, n_options)


def _entry(item: MCQItem, retriever: Optional[Retriever], results: List[RetrievalResult], k: int) -> RunLogEntry:
    if retriever is None:
        return RunLogEntry(query_id=item.item_id, method=ZERO_SHOT_METHOD, k=k, d=None)
    return make_entry(item.item_id, retriever.config, results, k)


async def _read(
    item: MCQItem,
    results: List[RetrievalResult],
    retriever: Optional[Retriever],
    corpus: Corpus,
    llm: LLMClient,
    k: int,
    context_tokens: int,
    diagnostics: Optional[DiagnosticLog]
) -> MCQAnswer:
    entry = _entry(item, retriever, results, k)
    context = ""
    if results:
        context = assemble_context(resolve_tables(results, corpus), context_tokens, diagnostics)
    prompt = build_mcq_prompt(item, context)

    try:
        text = await llm.generate(prompt, LLM_MAX_TOKENS)
    except LLMError as e:
        if diagnostics is not None:
            diagnostics.warn("llm_error", item.item_id, str(e))
        else:
            logger.error(f"LLM failed for {item.item_id}: {e}")
        return MCQAnswer(item.item_id, None, AnswerStatus.ERRORED, "", entry, context)

    try:
        predicted = parse_mcq_answer(text, len(item.options))
    except UnparseableAnswerError as e:
        if diagnostics is not None:
            diagnostics.warn("unparseable_answer", item.item_id, str(e))
        return MCQAnswer(item.item_id, None, AnswerStatus.UNPARSEABLE, text, entry, context)
    return MCQAnswer(item.item_id, predicted, AnswerStatus.OK, text, entry, context)


async def answer_mcq(
    item: MCQItem,
    retriever: Optional[Retriever],
    corpus: Corpus,
    llm: LLMClient,
    k: int,
    context_tokens: int = CONTEXT_TOKENS,
    zero_shot: bool = False,
    diagnostics: Optional[DiagnosticLog] = None
) -> MCQAnswer:
    """
    Answer one MCQ item with retrieval-augmented context

    With zero_shot (or no retriever) nothing is retrieved and the prompt
    carries an empty context. An LLM failure marks the item errored.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if zero_shot:
        retriever = None
    results = await retriever.retrieve(item.question, k) if retriever is not None else []
    return await _read(item, results, retriever, corpus, llm, k, context_tokens, diagnostics)


async def answer_mcq_items(
    items: Sequence[MCQItem],
    retriever: Optional[Retriever],
    corpus: Corpus,
    llm: LLMClient,
    k: int,
    context_tokens: int = CONTEXT_TOKENS,
    zero_shot: bool = False,
    diagnostics: Optional[DiagnosticLog] = None
) -> List[MCQAnswer]:
    """Answer items concurrently; the client bounds in-flight requests. Sorted by item_id."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if zero_shot:
        retriever = None
    if retriever is not None:
        all_results = await retriever.retrieve_many([item.question for item in items], k)
    else:
        all_results = [[] for _ in items]

    answers = await asyncio.gather(*[
        _read(item, results, retriever, corpus, llm, k, context_tokens, diagnostics)
        for item, results in zip(items, all_results)
    ])
    return sorted(answers, key=lambda a: a.item_id)
