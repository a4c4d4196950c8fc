"""
Multi-vector table resolution: caption and summary hits become the full table
"""

from typing import List, Sequence, Set

from corpus.models import Corpus, PassageKind
from retrieve.models import ContextItem, RetrievalResult
from utils.errors import DataError, ReferentialIntegrityError


def resolve_tables(results: Sequence[RetrievalResult], corpus: Corpus) -> List[ContextItem]:
    """
    Map ranked hits to context items

    Text hits keep their text. Caption and summary hits resolve to the linked
    table's Markdown; only the best-ranked hit of each table is kept.
    """
    items: List[ContextItem] = []
    seen_tables: Set[str] = set()
    for result in results:
        if result.passage_id not in corpus:
            raise DataError(f"retrieved passage {result.passage_id!r} is not in the corpus")
        passage = corpus.passage(result.passage_id)
        if passage.kind is PassageKind.TEXT:
            items.append(ContextItem(
                source_passage_id=passage.passage_id,
                doc_id=passage.doc_id,
                section_path=passage.section_path,
                content=passage.text,
            ))
            continue

        table = corpus.table_for(passage)
        if table is None:
            raise ReferentialIntegrityError(
                f"passage {passage.passage_id!r} links to unknown table {passage.table_id!r}"
            )
        if table.table_id in seen_tables:
            continue
        seen_tables.add(table.table_id)
        items.append(ContextItem(
            source_passage_id=passage.passage_id,
            doc_id=passage.doc_id,
            section_path=passage.section_path,
            content=table.markdown,
            is_table=True,
            table_id=table.table_id,
        ))
    return items
