"""
Tests for prompts, context assembly, the MCQ reader, QA generation and the LLM clients
"""

import json

import pytest
from aiohttp import test_utils, web

from index.sparse import build_sparse_index
from rag.context import assemble_context, context_header
from rag.generation import (
    assign_splits,
    filter_qa_pairs,
    first_question_word,
    generate_dataset,
    generate_qa_pairs,
    generation_candidates,
    parse_qa_blocks,
    qa_stats,
)
from rag.io import read_mcq_items, read_qa_pairs, write_mcq_items, write_qa_pairs
from rag.llm import EchoMockLLMClient, HttpLLMClient, LLMClient, MockLLMClient, create_llm_client, prompt_hash
from rag.models import AnswerStatus, MCQItem, QAPair, Split
from rag.prompts import build_mcq_prompt, build_qa_prompt, option_lines
from rag.reader import ZERO_SHOT_METHOD, answer_mcq, answer_mcq_items, parse_mcq_answer
from retrieve.models import ContextItem, RetrieverConfig
from retrieve.retrievers import Retriever
from tests.factories import mcq, small_corpus
from utils.config import LLMConfig
from utils.diagnostics import DiagnosticLog
from utils.errors import DataError, LLMError, UnparseableAnswerError, UsageError

MODULATION_OPTIONS = ("16QAM", "QPSK", "BPSK", "8PSK")


class FailingLLM(LLMClient):
    """Client whose every call fails"""

    async def generate(self, prompt, max_tokens=256):
        raise LLMError("HTTP 500")


def bm25_retriever(corpus, k=3):
    return Retriever(RetrieverConfig(method="bm25", k=k), sparse_index=build_sparse_index(corpus.passages))


def modulation_item(item_id="m1"):
    return MCQItem(item_id=item_id, difficulty="easy",
                   question="Which symbols does the modulation mapper produce from binary digits?",
                   options=MODULATION_OPTIONS, answer_index=1)


def context_item(pid, n_words, section=("4 General",)):
    return ContextItem(source_passage_id=pid, doc_id="D", section_path=section,
                       content=" ".join(f"w{i}" for i in range(n_words)))


def test_parse_mcq_answer():
    """First standalone letter within range, uppercase before lowercase"""
    assert parse_mcq_answer("B", 4) == 1
    assert parse_mcq_answer("answer: c.", 4) == 2
    assert parse_mcq_answer("E is wrong, so (B)", 4) == 1
    assert parse_mcq_answer("I think a good answer is C", 4) == 2
    assert parse_mcq_answer("a or b, but D fits", 4) == 3
    assert parse_mcq_answer("E is out, so a", 4) == 0
    with pytest.raises(UnparseableAnswerError):
        parse_mcq_answer("none of them", 4)
    with pytest.raises(UnparseableAnswerError):
        parse_mcq_answer("E", 4)
    with pytest.raises(UsageError):
        parse_mcq_answer("A", 6)


def test_mcq_prompt_layout():
    """Instruction, context, question, lettered options, directive"""
    item = modulation_item()
    prompt = build_mcq_prompt(item, "ctx")
    assert "Context:\nctx\n\nQuestion: " in prompt
    assert "Options:\nA. 16QAM\nB. QPSK\nC. BPSK\nD. 8PSK\n\n" in prompt
    assert prompt.endswith("Answer with the letter only.")
    with pytest.raises(UsageError):
        option_lines(["only one"])


def test_qa_prompt_includes_linked_table():
    corpus = small_corpus()
    caption = corpus.passage("TS38.211#t0001#caption")
    prompt = build_qa_prompt(caption, 3, corpus.table_for(caption))
    assert "between 1 and 3 questions" in prompt
    assert "Table TS38.211#t0001 (Markdown):\n| Parameter" in prompt
    assert "Section: 4 Numerology" in prompt


def test_context_respects_budget_and_rank_order():
    """Assembly stops at the first item that does not fit"""
    items = [context_item("a", 60), context_item("b", 60), context_item("c", 5)]
    context = assemble_context(items, 128)
    assert context.startswith("[[D § 4 General]]\nw0 w1")
    assert context.count("[[D") == 1
    assert context_header(context_item("x", 1, section=())) == "[[D]]"


def test_oversized_first_item_is_kept_whole():
    diagnostics = DiagnosticLog()
    context = assemble_context([context_item("big", 300), context_item("small", 3)], 128, diagnostics)
    assert "w299" in context
    assert diagnostics.subjects("oversized_context_item") == ["big"]
    with pytest.raises(UsageError):
        assemble_context([], 64)


@pytest.mark.asyncio
async def test_mock_reader_uses_retrieved_context():
    """The mock picks the option found in the retrieved passage; zero-shot falls back to A"""
    corpus = small_corpus()
    item = modulation_item()
    llm = MockLLMClient()

    answer = await answer_mcq(item, bm25_retriever(corpus), corpus, llm, k=3)
    assert answer.status is AnswerStatus.OK
    assert answer.predicted_index == 1
    assert answer.entry.retrieved_ids[0] == "TS38.211#p0002"
    assert "QPSK and 256QAM" in answer.context

    zero = await answer_mcq(item, bm25_retriever(corpus), corpus, llm, k=3, zero_shot=True)
    assert zero.predicted_index == 0
    assert zero.entry.method == ZERO_SHOT_METHOD
    assert zero.entry.results == []
    assert zero.context == ""


@pytest.mark.asyncio
async def test_echo_reader_statuses():
    """Configured answers, unparseable text and LLM failures"""
    corpus = small_corpus()
    item = modulation_item()
    llm = EchoMockLLMClient(default="I cannot tell")
    llm.respond(build_mcq_prompt(item, ""), "The answer is (D)")

    answer = await answer_mcq(item, None, corpus, llm, k=2)
    assert (answer.status, answer.predicted_index) == (AnswerStatus.OK, 3)

    diagnostics = DiagnosticLog()
    unparseable = await answer_mcq(item, bm25_retriever(corpus), corpus, llm, k=2, diagnostics=diagnostics)
    assert unparseable.status is AnswerStatus.UNPARSEABLE
    assert unparseable.predicted_index is None
    assert diagnostics.counts() == {"unparseable_answer": 1}

    errored = await answer_mcq(item, None, corpus, FailingLLM(), k=2, diagnostics=diagnostics)
    assert errored.status is AnswerStatus.ERRORED
    assert diagnostics.counts()["llm_error"] == 1


@pytest.mark.asyncio
async def test_answer_items_sorted_by_id():
    corpus = small_corpus()
    items = [modulation_item("m2"), modulation_item("m1"), modulation_item("m3")]
    answers = await answer_mcq_items(items, bm25_retriever(corpus), corpus, MockLLMClient(), k=2)
    assert [a.item_id for a in answers] == ["m1", "m2", "m3"]
    assert all(a.predicted_index == 1 for a in answers)


def test_parse_qa_blocks_skips_malformed():
    text = "Q1: What is X?\nA1: Y\n\nQ2: broken without an answer\n\nQ3: Where is Z?\nA3: W"
    pairs, skipped = parse_qa_blocks(text)
    assert pairs == [("What is X?", "Y"), ("Where is Z?", "W")]
    assert skipped == 1


@pytest.mark.asyncio
async def test_generate_pairs_with_mock():
    """One question per sentence with provisional ids, capped at max_q"""
    corpus = small_corpus()
    passage = corpus.passage("TS38.211#p0001")
    pairs = await generate_qa_pairs(passage, corpus, MockLLMClient(), max_q=5)
    assert [p.question_id for p in pairs] == ["TS38.211#p0001/q1", "TS38.211#p0001/q2"]
    assert pairs[0].answer.startswith("Multiple OFDM numerologies")
    assert all(p.passage_id == passage.passage_id for p in pairs)

    single = await generate_qa_pairs(passage, corpus, MockLLMClient(), max_q=1)
    assert len(single) == 1
    with pytest.raises(UsageError):
        await generate_qa_pairs(passage, corpus, MockLLMClient(), max_q=6)


@pytest.mark.asyncio
async def test_generate_records_malformed_output():
    corpus = small_corpus()
    passage = corpus.passage("TS38.331#p0001")
    llm = EchoMockLLMClient(default="Q1: What message starts RRC connection establishment?\nA1: RRCSetupRequest\nQ2: dangling")
    diagnostics = DiagnosticLog()
    pairs = await generate_qa_pairs(passage, corpus, llm, 5, diagnostics)
    assert [p.answer for p in pairs] == ["RRCSetupRequest"]
    assert diagnostics.subjects("unparseable_qa_block") == ["TS38.331#p0001"]


def test_filter_rules():
    """Length bounds, duplicates, unsupported answers and dangling passages"""
    corpus = small_corpus()
    pid = "TS38.331#p0002"
    pairs = [
        QAPair("a", "What does measurement reporting transfer to the network?", "measurement results", pid),
        QAPair("b", "Why?", "measurement results", pid),
        QAPair("c", "WHAT does measurement reporting transfer to the network?", "measurement results", pid),
        QAPair("d", "What colour is the network operator logo today?", "banana smoothie", pid),
        QAPair("e", "What does the missing passage describe in detail?", "nothing", "nowhere#p1"),
        QAPair("f", "What is the subcarrier spacing listed in the numerology table?", "30 kHz",
               "TS38.211#t0001#caption"),
    ]
    kept = filter_qa_pairs(pairs, corpus)
    assert [p.question_id for p in kept] == ["a", "f"]


def test_assign_splits_is_seeded():
    corpus = small_corpus()
    pairs = [QAPair(f"x{i}", f"Question number {i} about the terminal?", "terminal", "TS38.331#p0001")
             for i in range(20)]
    first = assign_splits(pairs, 0.3, seed=5)
    assert [p.question_id for p in first] == [f"q{i:04d}" for i in range(1, 21)]
    assert first == assign_splits(pairs, 0.3, seed=5)
    assert all(p.split is Split.TRAIN for p in assign_splits(pairs, 0.0, 1))
    assert all(p.split is Split.TEST for p in assign_splits(pairs, 1.0, 1))
    with pytest.raises(UsageError):
        assign_splits(pairs, 1.5, 1)
    assert qa_stats(first, corpus).document_share == {"TS38.331": 100.0}


@pytest.mark.asyncio
async def test_generate_dataset_end_to_end():
    """Generation over candidates yields filtered, renumbered, split pairs"""
    corpus = small_corpus()
    candidates = generation_candidates(corpus, ["TS38.331"])
    assert [p.passage_id for p in candidates] == ["TS38.331#p0001", "TS38.331#p0002", "TS38.331#p0003"]
    pairs = await generate_dataset(candidates, corpus, MockLLMClient(), 5, 0.5, seed=3)
    assert pairs
    assert pairs[0].question_id == "q0001"
    assert {p.passage_id for p in pairs} <= {p.passage_id for p in candidates}
    assert pairs == await generate_dataset(candidates, corpus, MockLLMClient(), 5, 0.5, seed=3)

    diagnostics = DiagnosticLog()
    assert await generate_dataset(candidates, corpus, FailingLLM(), 5, 0.5, 3, diagnostics) == []
    assert diagnostics.counts() == {"generation_failed": 3}
    with pytest.raises(UsageError):
        generation_candidates(corpus, ["TS99.999"])


def test_qa_stats_first_words():
    corpus = small_corpus()
    pairs = [
        QAPair("q1", "What is the gap?", "gap", "TS38.331#p0003"),
        QAPair("q2", "Is the gap configured?", "yes", "TS38.331#p0003", Split.TEST),
        QAPair("q3", "Name the message.", "RRCSetupRequest", "TS38.331#p0001"),
        QAPair("q4", "How is QPSK produced?", "mapper", "TS38.211#p0002"),
    ]
    stats = qa_stats(pairs, corpus).to_dict()
    assert stats["per_split"] == {"train": 3, "test": 1}
    assert stats["first_word_share"]["what"] == 25.0
    assert stats["first_word_share"]["is/are"] == 25.0
    assert stats["first_word_share"]["others"] == 25.0
    assert stats["document_share"] == {"TS38.211": 25.0, "TS38.331": 75.0}
    assert first_question_word("") == "others"


def test_dataset_files(tmp_path):
    """QA pairs and MCQ items round trip; duplicates and bad rows are data errors"""
    pairs = [QAPair("q0001", "What is X?", "x", "A#p1", Split.TEST)]
    assert read_qa_pairs(write_qa_pairs(pairs, tmp_path / "qa.jsonl")) == pairs
    items = [mcq("m1", "hard", 2, gold="A#p1")]
    assert read_mcq_items(write_mcq_items(items, tmp_path / "mcq.jsonl")) == items

    duplicate = tmp_path / "dup.jsonl"
    duplicate.write_text((json.dumps(pairs[0].to_dict()) + "\n") * 2, encoding="utf-8")
    with pytest.raises(DataError):
        read_qa_pairs(duplicate)

    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({**items[0].to_dict(), "difficulty": "extreme"}) + "\n", encoding="utf-8")
    with pytest.raises(DataError) as excinfo:
        read_mcq_items(bad)
    assert "line 1" in str(excinfo.value)


def test_echo_client_from_file(tmp_path):
    path = tmp_path / "responses.json"
    path.write_text(json.dumps({"responses": {prompt_hash("hi"): "C"}, "default": "A"}), encoding="utf-8")
    client = create_llm_client(LLMConfig(kind="echo", responses_path=str(path)))
    assert isinstance(client, EchoMockLLMClient)
    assert client.responses[prompt_hash("hi")] == "C"
    assert isinstance(create_llm_client(LLMConfig()), MockLLMClient)


@pytest.mark.asyncio
async def test_http_llm_client_protocol():
    """Bearer auth, capped max_tokens and error mapping"""
    seen = []

    async def generate(request):
        body = await request.json()
        seen.append((request.headers.get("Authorization"), body["max_tokens"]))
        if body["prompt"] == "fail":
            return web.Response(status=500, text="boom")
        if body["prompt"] == "empty":
            return web.json_response({"nothing": True})
        return web.json_response({"text": "B"})

    app = web.Application()
    app.router.add_post("/generate", generate)
    server = test_utils.TestServer(app)
    await server.start_server()
    client = HttpLLMClient(str(server.make_url("/")), api_key="secret", max_tokens=64)
    try:
        assert await client.generate("question", max_tokens=256) == "B"
        with pytest.raises(LLMError):
            await client.generate("fail")
        with pytest.raises(LLMError):
            await client.generate("empty")
    finally:
        await client.close()
        await server.close()

    assert seen[0] == ("Bearer secret", 64)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
