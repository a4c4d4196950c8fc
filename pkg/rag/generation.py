"""
Synthetic QA-pair generation, mechanical filtering and dataset statistics
"""

import asyncio
import logging
import re
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from corpus.models import Corpus, Passage, PassageKind
from corpus.tokenizer import analyze, count_tokens
from rag.llm import LLMClient
from rag.models import QAPair, QAStats, Split
from rag.prompts import QA_PROMPT_VERSION, build_qa_prompt
from utils.constants import (
    FIRST_QUESTION_WORDS,
    LLM_MAX_TOKENS,
    MAX_QUESTION_TOKENS,
    MAX_QUESTIONS_PER_PASSAGE,
    MIN_QUESTION_TOKENS,
    STOPWORDS,
)
from utils.diagnostics import DiagnosticLog
from utils.errors import LLMError, UsageError

logger = logging.getLogger(__name__)

_QUESTION_START = re.compile(r"^\s*Q(\d+)\s*[:.)]", re.MULTILINE)
_QA_BLOCK = re.compile(
    r"^\s*Q(\d+)\s*[:.)]\s*(?P<question>.+?)\s*\n\s*A\1\s*[:.)]\s*(?P<answer>.+?)\s*(?=^\s*Q\d+\s*[:.)]|\Z)",
    re.MULTILINE | re.DOTALL,
)


def _one_line(text: str) -> str:
    return " ".join(text.split())


def parse_qa_blocks(text: str) -> Tuple[List[Tuple[str, str]], int]:
    """
    Numbered `Q<n>: ... / A<n>: ...` blocks from LLM output

    Returns the parsed (question, answer) pairs and the number of question
    headers that did not form a well-formed block.
    """
    pairs: List[Tuple[str, str]] = []
    for match in _QA_BLOCK.finditer(text):
        question = _one_line(match.group("question"))
        answer = _one_line(match.group("answer"))
        if question and answer:
            pairs.append((question, answer))
    headers = len(_QUESTION_START.findall(text))
    return pairs, max(headers - len(pairs), 0)


def generation_candidates(corpus: Corpus, documents: Optional[Sequence[str]] = None) -> List[Passage]:
    """Text and table-caption passages of the selected documents, in corpus order"""
    selected = set(documents) if documents else None
    if selected is not None:
        unknown = sorted(selected - set(corpus.documents))
        if unknown:
            raise UsageError(f"unknown documents for generation: {', '.join(unknown)}")
    return [
        p for p in corpus.passages
        if p.kind in (PassageKind.TEXT, PassageKind.TABLE_CAPTION)
        and (selected is None or p.doc_id in selected)
    ]


async def generate_qa_pairs(
    passage: Passage,
    corpus: Corpus,
    llm: LLMClient,
    max_q: int = MAX_QUESTIONS_PER_PASSAGE,
    diagnostics: Optional[DiagnosticLog] = None,
    version: str = QA_PROMPT_VERSION
) -> List[QAPair]:
    """
    Ask the LLM for 1..max_q questions about one passage

    Pairs get provisional ids `<passage_id>/q<n>`. Malformed blocks are
    skipped and recorded.
    """
    if not 1 <= max_q <= MAX_QUESTIONS_PER_PASSAGE:
        raise UsageError(f"max_q must be in 1..{MAX_QUESTIONS_PER_PASSAGE}, got {max_q}")

    table = corpus.table_for(passage) if passage.kind is PassageKind.TABLE_CAPTION else None
    prompt = build_qa_prompt(passage, max_q, table, version)
    text = await llm.generate(prompt, LLM_MAX_TOKENS)

    parsed, skipped = parse_qa_blocks(text)
    if skipped and diagnostics is not None:
        diagnostics.warn("unparseable_qa_block", passage.passage_id, f"skipped {skipped} malformed block(s)")
    return [
        QAPair(
            question_id=f"{passage.passage_id}/q{n}",
            question=question,
            answer=answer,
            passage_id=passage.passage_id,
        )
        for n, (question, answer) in enumerate(parsed[:max_q], start=1)
    ]


def _source_terms(pair: QAPair, corpus: Corpus) -> set:
    passage = corpus.passage(pair.passage_id)
    text = passage.text
    table = corpus.table_for(passage)
    if table is not None:
        text = f"{text}\n{table.markdown}"
    return {t for t in analyze(text) if t not in STOPWORDS}


def filter_qa_pairs(pairs: Sequence[QAPair], corpus: Corpus) -> List[QAPair]:
    """
    Drop pairs failing the mechanical rules

    Question length outside the token bounds, a case-folded duplicate of an
    earlier question, or an answer sharing no content token with its source.
    Pairs whose passage is not in the corpus are dropped as well.
    """
    kept: List[QAPair] = []
    seen = set()
    for pair in pairs:
        if pair.passage_id not in corpus:
            continue
        n_tokens = count_tokens(pair.question)
        if not MIN_QUESTION_TOKENS <= n_tokens <= MAX_QUESTION_TOKENS:
            continue
        key = pair.question.casefold()
        if key in seen:
            continue
        answer_terms = {t for t in analyze(pair.answer) if t not in STOPWORDS}
        if not answer_terms & _source_terms(pair, corpus):
            continue
        seen.add(key)
        kept.append(pair)
    dropped = len(pairs) - len(kept)
    if dropped:
        logger.info(f"Filtered out {dropped} of {len(pairs)} generated pairs")
    return kept


def assign_splits(pairs: Sequence[QAPair], test_fraction: float, seed: int) -> List[QAPair]:
    """Renumber pairs q0001.. and draw train/test from the seeded generator"""
    if not 0.0 <= test_fraction <= 1.0:
        raise UsageError(f"test_fraction must be in [0, 1], got {test_fraction}")
    draws = np.random.default_rng(seed).random(len(pairs))
    return [
        QAPair(
            question_id=f"q{n:04d}",
            question=pair.question,
            answer=pair.answer,
            passage_id=pair.passage_id,
            split=Split.TEST if draw < test_fraction else Split.TRAIN,
        )
        for n, (pair, draw) in enumerate(zip(pairs, draws), start=1)
    ]


async def generate_dataset(
    passages: Sequence[Passage],
    corpus: Corpus,
    llm: LLMClient,
    max_q: int,
    test_fraction: float,
    seed: int,
    diagnostics: Optional[DiagnosticLog] = None
) -> List[QAPair]:
    """Generate, filter and split pairs for many passages; output order follows the corpus"""

    async def one(passage: Passage) -> List[QAPair]:
        try:
            return await generate_qa_pairs(passage, corpus, llm, max_q, diagnostics)
        except LLMError as e:
            if diagnostics is not None:
                diagnostics.warn("generation_failed", passage.passage_id, str(e))
            return []

    per_passage = await asyncio.gather(*[one(p) for p in passages])
    generated = [pair for pairs in per_passage for pair in pairs]
    return assign_splits(filter_qa_pairs(generated, corpus), test_fraction, seed)


def first_question_word(question: str) -> str:
    terms = analyze(question)
    word = terms[0] if terms else ""
    if word in ("is", "are"):
        return "is/are"
    return word if word in FIRST_QUESTION_WORDS else "others"


def _percent(counts: Counter, total: int) -> Dict[str, float]:
    return {key: 100.0 * n / total for key, n in counts.items()} if total else {}


def qa_stats(pairs: Sequence[QAPair], corpus: Corpus) -> QAStats:
    """Question share per document, mean lengths and first-word distribution (percentages)"""
    n = len(pairs)
    split_counts = Counter(p.split.value for p in pairs)
    words = Counter(first_question_word(p.question) for p in pairs)
    docs = Counter(
        corpus.passage(p.passage_id).doc_id if p.passage_id in corpus else "unknown"
        for p in pairs
    )
    first_word_share = _percent(words, n)
    return QAStats(
        n_pairs=n,
        per_split={s.value: split_counts.get(s.value, 0) for s in Split},
        mean_question_tokens=sum(count_tokens(p.question) for p in pairs) / n if n else None,
        mean_answer_tokens=sum(count_tokens(p.answer) for p in pairs) / n if n else None,
        first_word_share={w: first_word_share.get(w, 0.0) for w in FIRST_QUESTION_WORDS} if n else {},
        document_share=dict(sorted(_percent(docs, n).items())),
    )
