"""
Corpus statistics
"""

from collections import Counter
from typing import List, Optional

from corpus.models import Corpus, PassageKind, StatsReport


def _mean(values: List[int]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def corpus_stats(corpus: Corpus) -> StatsReport:
    """Exact counts and arithmetic means; means are None over empty populations"""
    n_documents = len(corpus.documents)
    releases = Counter(d.release for d in corpus.documents.values())
    kinds = Counter(p.kind.value for p in corpus.passages)
    return StatsReport(
        n_documents=n_documents,
        n_passages=len(corpus.passages),
        n_tables=len(corpus.tables),
        tables_per_document_mean=len(corpus.tables) / n_documents if n_documents else None,
        mean_tokens_text_passage=_mean(
            [p.token_count for p in corpus.passages if p.kind is PassageKind.TEXT]
        ),
        mean_tokens_table=_mean([t.token_count for t in corpus.tables.values()]),
        per_release_document_counts=dict(sorted(releases.items())),
        passages_per_kind={kind.value: kinds.get(kind.value, 0) for kind in PassageKind},
    )
