"""
End-to-end tests of the command-line workflow
"""

import json

import pytest

from corpus.loader import emit_corpus, load_corpus
from main import run_command
from rag.io import read_qa_pairs, write_mcq_items
from rag.models import MCQItem
from retrieve.runlog import read_run_log
from tests.factories import raw_records, small_corpus, write_jsonl
from utils.constants import INDEX_FILES
from utils.errors import EXIT_DATA_ERROR, EXIT_USAGE_ERROR

MODULATION_QUESTION = "Which symbols does the modulation mapper produce from binary digits?"


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Corpus and config in a temporary directory; no log file"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TDPR_CONFIG", raising=False)
    emit_corpus(small_corpus(), tmp_path / "corpus.jsonl")
    (tmp_path / "config.yaml").write_text(
        "corpus_path: corpus.jsonl\n"
        "index_dir: indexes\n"
        "out_dir: runs\n"
        "provider:\n  dim: 64\n"
        "train:\n  epochs: 3\n  batch_size: 4\n"
        "logging:\n  file: ''\n",
        encoding="utf-8",
    )
    return tmp_path


async def cli(*argv):
    return await run_command(list(argv))


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.mark.asyncio
async def test_ingest_is_idempotent(workspace):
    """Ingesting the same raw records twice gives byte-identical corpora"""
    write_jsonl(raw_records(), workspace / "raw.jsonl")
    assert await cli("ingest", "raw.jsonl", "first.jsonl") == 0
    assert await cli("ingest", "raw.jsonl", "second.jsonl") == 0
    first = (workspace / "first.jsonl").read_bytes()
    assert first == (workspace / "second.jsonl").read_bytes()

    corpus = load_corpus(workspace / "first.jsonl")
    assert set(corpus.documents) == {"TS36.300", "TS23.501"}
    assert "TS23.501#t0001" in corpus.tables
    assert read_json(workspace / "runs" / "corpus_stats.json")


@pytest.mark.asyncio
async def test_generate_index_evaluate(workspace, capsys):
    """gen-qa, index and eval-retriever produce reproducible reports"""
    assert await cli("gen-qa", "--seed", "3") == 0
    pairs = read_qa_pairs(workspace / "runs" / "qa_pairs.jsonl")
    assert pairs and pairs[0].question_id == "q0001"
    assert read_json(workspace / "runs" / "qa_stats.json")["n_pairs"] == len(pairs)

    assert await cli("index") == 0
    assert sorted(p.name for p in (workspace / "indexes").iterdir()) == sorted(INDEX_FILES.values())

    for method in ("bm25", "dpr", "dhr"):
        for run in ("a", "b"):
            code = await cli("eval-retriever", "runs/qa_pairs.jsonl", "--split", "all",
                             "--method", method, "--out", f"eval-{method}-{run}")
            assert code == 0, method
        for artifact in ("retriever_report.json", "run_log.jsonl"):
            first = (workspace / f"eval-{method}-a" / artifact).read_bytes()
            assert first == (workspace / f"eval-{method}-b" / artifact).read_bytes(), (method, artifact)

    report = read_json(workspace / "eval-dhr-a" / "retriever_report.json")
    assert report["method"] == "dhr"
    assert report["n"] == len(pairs)
    entries = read_run_log(workspace / "eval-dhr-a" / "run_log.jsonl")
    assert [e.query_id for e in entries] == [p.question_id for p in pairs]
    assert all(e.d is not None for e in entries)
    assert 0.0 <= report["mrr@10"] <= report["acc"]["10"] <= 1.0
    assert (workspace / "eval-dpr-a" / "similarity.csv").exists()
    assert not (workspace / "eval-bm25-a" / "similarity.csv").exists()
    assert "dhr" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_train_adapter_and_reindex(workspace):
    """A trained adapter is written and usable for indexing and search"""
    assert await cli("gen-qa", "--seed", "1", "--generation.test_fraction=0.0") == 0
    assert await cli("train-adapter", "runs/qa_pairs.jsonl", "--out", "trained") == 0
    adapter = workspace / "trained" / "adapter.tadp"
    assert adapter.read_bytes().startswith(b"TADP1")
    history = (workspace / "trained" / "loss_history.csv").read_text(encoding="utf-8").splitlines()
    assert history[0] == "epoch,mean_batch_loss"
    assert len(history) == 4
    assert read_json(workspace / "trained" / "train_report.json")["dim"] == [64, 64]

    assert await cli("index", "--adapter", str(adapter), "--index_dir=ft") == 0
    assert await cli("search", "modulation mapper", "--method", "dpr", "--adapter", str(adapter),
                     "--index_dir=ft") == 0
    # adapted index without the adapter
    assert await cli("search", "modulation mapper", "--method", "dpr", "--index_dir=ft") == EXIT_DATA_ERROR


@pytest.mark.asyncio
async def test_eval_qa_rag_and_zero_shot(workspace):
    items = [
        MCQItem("m1", "easy", MODULATION_QUESTION, ("16QAM", "QPSK", "BPSK", "8PSK"), 1, "TS38.211#p0002"),
        MCQItem("m2", "hard", "Which message does the terminal send to start RRC connection establishment?",
                ("RRCRelease", "RRCSetupRequest", "Paging"), 1, "TS38.331#p0001"),
    ]
    write_mcq_items(items, workspace / "mcq.jsonl")
    assert await cli("index") == 0

    assert await cli("eval-qa", "mcq.jsonl", "--method", "bm25", "--k", "3", "--out", "rag") == 0
    report = read_json(workspace / "rag" / "qa_report.json")
    assert report["mode"] == "rag"
    assert report["accuracy"] == 1.0
    assert report["grounding"]["correct_grounded"] == 2
    assert report["retrieval"]["acc"]["1"] == 1.0
    answers = (workspace / "rag" / "answers.jsonl").read_text(encoding="utf-8").splitlines()
    assert [json.loads(line)["item_id"] for line in answers] == ["m1", "m2"]

    assert await cli("eval-qa", "mcq.jsonl", "--zero-shot", "--out", "zero") == 0
    zero = read_json(workspace / "zero" / "qa_report.json")
    assert zero["mode"] == "zero_shot"
    assert zero["accuracy"] == 0.0
    assert "grounding" not in zero
    assert not (workspace / "zero" / "run_log.jsonl").exists()


@pytest.mark.asyncio
async def test_index_and_eval_qa_are_byte_deterministic(workspace):
    """Rebuilt indexes and repeated eval-qa runs match byte for byte"""
    assert await cli("index") == 0
    assert await cli("index", "--index_dir=indexes2") == 0
    for name in INDEX_FILES.values():
        assert (workspace / "indexes" / name).read_bytes() == (workspace / "indexes2" / name).read_bytes(), name

    items = [MCQItem("m1", "easy", MODULATION_QUESTION, ("16QAM", "QPSK", "BPSK", "8PSK"), 1, "TS38.211#p0002")]
    write_mcq_items(items, workspace / "mcq.jsonl")
    for run in ("a", "b"):
        assert await cli("eval-qa", "mcq.jsonl", "--method", "dhr", "--k", "3", "--out", f"qa-{run}") == 0
    for artifact in ("qa_report.json", "answers.jsonl", "run_log.jsonl"):
        first = (workspace / "qa-a" / artifact).read_bytes()
        assert first == (workspace / "qa-b" / artifact).read_bytes(), artifact


@pytest.mark.asyncio
async def test_ask_prints_chosen_option(workspace, capsys):
    assert await cli("index") == 0
    code = await cli("ask", MODULATION_QUESTION, "--option", "16QAM", "--option", "QPSK", "--method", "bm25")
    assert code == 0
    out = capsys.readouterr().out
    assert "B. QPSK" in out
    assert "TS38.211#p0002" in out

    assert await cli("ask", MODULATION_QUESTION, "--option", "QPSK") == EXIT_USAGE_ERROR


@pytest.mark.asyncio
async def test_exit_codes(workspace):
    """Usage problems exit 2, bad data exits 1"""
    assert await cli() == EXIT_USAGE_ERROR
    assert await cli("search", "x", "--retriever.bogus=1") == EXIT_USAGE_ERROR
    assert await cli("search", "x", "--config", "missing.yaml") == EXIT_USAGE_ERROR
    assert await cli("search", "x", "--corpus_path=nowhere.jsonl") == EXIT_USAGE_ERROR
    assert await cli("eval-retriever", "missing.jsonl", "--method", "bm25") == EXIT_USAGE_ERROR

    (workspace / "qa.jsonl").write_text("{not json\n", encoding="utf-8")
    assert await cli("index") == 0
    assert await cli("eval-retriever", "qa.jsonl", "--method", "bm25") == EXIT_DATA_ERROR

    (workspace / "dangling.jsonl").write_text(
        json.dumps({"question_id": "q1", "question": "What is it?", "answer": "x",
                    "passage_id": "nowhere#p1", "split": "test"}) + "\n",
        encoding="utf-8",
    )
    assert await cli("eval-retriever", "dangling.jsonl", "--method", "bm25") == EXIT_DATA_ERROR


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
