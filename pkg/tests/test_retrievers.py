"""
Tests for BM25/DPR/DHR retrieval, table resolution and run logs
"""

import numpy as np
import pytest

from index.dense import IndexLevel, build_vector_index
from index.embeddings import HashEmbedder
from index.sparse import build_sparse_index
from retrieve.models import RetrievalResult, RetrieverConfig, RetrieverMethod, Representation
from retrieve.representations import (
    document_items,
    document_representation,
    passage_items,
    passage_representation,
    plain_representation,
)
from retrieve.retrievers import Retriever, dhr_retrieve, dhr_search, dpr_retrieve, dpr_search, embed_query
from retrieve.runlog import make_entry, read_run_log, write_run_log
from retrieve.tables import resolve_tables
from tests.factories import small_corpus, topic_corpus
from train.adapter import AdapterMatrix
from utils.errors import DataError, UsageError


async def dense_indexes(corpus, provider, adapter=None):
    passages = await build_vector_index(passage_items(corpus), provider, adapter=adapter)
    documents = await build_vector_index(document_items(corpus), provider, IndexLevel.DOCUMENT, adapter=adapter)
    return passages, documents


def hit(passage_id, rank, doc_id="TS38.211"):
    return RetrievalResult(passage_id=passage_id, doc_id=doc_id, score=1.0 / rank, rank=rank)


def test_passage_representations():
    """Sectioned text prefixes the section path with separator tokens"""
    passage = small_corpus().passage("TS38.211#p0002")
    assert passage_representation(passage) == "5 Modulation mapper [SEP] " + passage.text
    assert plain_representation(passage) == passage.text
    doc = small_corpus().documents["TS38.331"]
    assert document_representation(doc).split(" [SEP] ") == [
        doc.title, doc.abstract, "Connection establishment", "Measurement reporting"
    ]


def test_retriever_config_validation():
    assert RetrieverConfig.from_dict({"method": "dpr", "k": 3}).method is RetrieverMethod.DPR
    with pytest.raises(UsageError):
        RetrieverConfig(method="colbert")
    with pytest.raises(UsageError):
        RetrieverConfig(k=0)
    with pytest.raises(UsageError):
        RetrieverConfig(d=0)


@pytest.mark.asyncio
async def test_dhr_with_every_document_equals_dpr():
    """Keeping all documents in the first stage reduces DHR to DPR"""
    corpus, pairs = topic_corpus(n_topics=10, per_topic=10)
    provider = HashEmbedder(64)
    passages, documents = await dense_indexes(corpus, provider)
    for pair in pairs:
        query = await embed_query(pair.question, provider)
        assert dhr_search(query, documents, passages, 7, len(corpus.documents)) == dpr_search(query, passages, 7)


def gold_rank(results, passage_id):
    return next((r.rank for r in results if r.passage_id == passage_id), None)


@pytest.mark.asyncio
async def test_dhr_gold_rank_against_dpr():
    """DHR finds the gold passage at DPR's rank or better when its document survives stage one, else not at all"""
    corpus, pairs = topic_corpus(n_topics=8, per_topic=6)
    provider = HashEmbedder(64)
    passages, documents = await dense_indexes(corpus, provider)
    total = len(corpus.passages)
    rng = np.random.default_rng(12)
    for pair in pairs:
        query = await embed_query(pair.question, provider)
        dpr_rank = gold_rank(dpr_search(query, passages, total), pair.passage_id)
        assert dpr_rank is not None
        d = int(rng.integers(1, len(corpus.documents) + 1))
        kept = {r.doc_id for r in dpr_search(query, documents, d)}
        dhr_rank = gold_rank(dhr_search(query, documents, passages, total, d), pair.passage_id)
        if corpus.passage(pair.passage_id).doc_id in kept:
            assert dhr_rank is not None and dhr_rank <= dpr_rank, (pair.question_id, d)
        else:
            assert dhr_rank is None, (pair.question_id, d)


@pytest.mark.asyncio
async def test_dhr_restricts_to_top_documents():
    corpus = small_corpus()
    provider = HashEmbedder(128)
    passages, documents = await dense_indexes(corpus, provider)
    results = await dhr_retrieve("radio resource control measurement reporting", documents, passages,
                                 provider, k=10, d=1)
    assert results
    assert len({r.doc_id for r in results}) == 1
    plain = await dpr_retrieve("radio resource control measurement reporting", passages, provider, k=3)
    assert [r.rank for r in plain] == [1, 2, 3]


@pytest.mark.asyncio
async def test_adapter_must_match_index():
    """An index built with an adapter refuses queries without it, and vice versa"""
    corpus = small_corpus()
    provider = HashEmbedder(32)
    adapter = AdapterMatrix(np.random.default_rng(1).normal(size=(32, 32)))
    adapted, documents = await dense_indexes(corpus, provider, adapter)
    plain, _ = await dense_indexes(corpus, provider)

    with pytest.raises(DataError):
        await dpr_retrieve("numerology", adapted, provider, k=3)
    with pytest.raises(DataError):
        await dpr_retrieve("numerology", plain, provider, k=3, adapter=adapter)
    with pytest.raises(DataError):
        Retriever(RetrieverConfig(method="dhr"), provider=provider, passage_index=plain,
                  doc_index=documents, adapter=adapter)
    assert await dpr_retrieve("numerology", adapted, provider, k=3, adapter=adapter)


def test_retriever_needs_its_indexes():
    with pytest.raises(UsageError):
        Retriever(RetrieverConfig(method="bm25"))
    with pytest.raises(UsageError):
        Retriever(RetrieverConfig(method="dpr"), provider=HashEmbedder(16))


@pytest.mark.asyncio
async def test_retriever_bm25_and_dense_agree_on_obvious_question():
    """All three methods rank the passage that repeats the question terms first"""
    corpus = small_corpus()
    provider = HashEmbedder(256)
    passages, documents = await dense_indexes(corpus, provider)
    question = "modulation mapper binary digits complex-valued modulation symbols"
    retrievers = [
        Retriever(RetrieverConfig(method="bm25", k=3), sparse_index=build_sparse_index(corpus.passages)),
        Retriever(RetrieverConfig(method="dpr", k=3, representation=Representation.SECTIONED),
                  provider=provider, passage_index=passages),
        Retriever(RetrieverConfig(method="dhr", k=3, d=2), provider=provider, passage_index=passages,
                  doc_index=documents),
    ]
    for retriever in retrievers:
        results = await retriever.retrieve(question)
        assert results[0].passage_id == "TS38.211#p0002", retriever.method
        assert len(results) <= 3

    many = await retrievers[1].retrieve_many([question, "measurement gap"], k=2)
    assert len(many) == 2 and all(len(r) == 2 for r in many)
    assert await retrievers[1].retrieve_many([]) == []


def test_table_hits_resolve_to_one_table():
    """Caption and summary hits of one table yield a single Markdown item at the better rank"""
    corpus = small_corpus()
    results = [
        hit("TS38.211#t0001#summary", 1),
        hit("TS38.211#p0001", 2),
        hit("TS38.211#t0001#caption", 3),
    ]
    items = resolve_tables(results, corpus)
    assert [i.source_passage_id for i in items] == ["TS38.211#t0001#summary", "TS38.211#p0001"]
    assert items[0].is_table and items[0].table_id == "TS38.211#t0001"
    assert items[0].content == corpus.tables["TS38.211#t0001"].markdown
    assert not items[1].is_table


def test_unknown_hit_is_data_error():
    with pytest.raises(DataError):
        resolve_tables([hit("nowhere#p1", 1)], small_corpus())


def test_run_log_round_trip_rounds_scores(tmp_path):
    """Scores are written with six decimals and entries read back in order"""
    dhr = RetrieverConfig(method="dhr", k=2, d=4)
    dpr = RetrieverConfig(method="dpr", k=2)
    results = [
        RetrievalResult("A#p1", "A", 0.123456789, 1),
        RetrievalResult("A#p2", "A", 0.1, 2),
    ]
    entries = [make_entry("q0001", dhr, results), make_entry("q0002", dpr, results[:1], k=5)]
    path = write_run_log(entries, tmp_path / "run_log.jsonl")
    loaded = read_run_log(path)

    assert [e.query_id for e in loaded] == ["q0001", "q0002"]
    assert loaded[0].d == 4 and loaded[1].d is None
    assert loaded[1].k == 5
    assert loaded[0].results[0].score == 0.123457
    assert loaded[0].retrieved_ids == ["A#p1", "A#p2"]
    assert '"score":0.123457' in path.read_text(encoding="utf-8")


def test_bad_run_log_line(tmp_path):
    path = tmp_path / "run_log.jsonl"
    path.write_text('{"query_id": "q1"}\n', encoding="utf-8")
    with pytest.raises(DataError):
        read_run_log(path)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
