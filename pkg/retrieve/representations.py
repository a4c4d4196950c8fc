"""
Texts embedded for passages and documents
"""

from typing import List, Tuple

from corpus.models import Corpus, DocumentRecord, Passage
from retrieve.models import Representation
from utils.constants import SEP_TOKEN

SEPARATOR = f" {SEP_TOKEN} "


def passage_representation(passage: Passage) -> str:
    """Section titles root to leaf, then the passage text, joined by the reserved token"""
    if not passage.section_path:
        return passage.text
    return SEPARATOR.join(passage.section_path) + SEPARATOR + passage.text


def plain_representation(passage: Passage) -> str:
    return passage.text


def representation_for(passage: Passage, representation: Representation) -> str:
    if Representation(representation) is Representation.PLAIN:
        return plain_representation(passage)
    return passage_representation(passage)


def document_representation(doc: DocumentRecord) -> str:
    """Title, abstract and section titles in document order"""
    parts = [doc.title, doc.abstract] + [section.title for section in doc.section_titles]
    return SEPARATOR.join(parts)


def passage_items(corpus: Corpus, representation: Representation = Representation.SECTIONED) -> List[Tuple[str, str, str]]:
    return [(p.passage_id, p.doc_id, representation_for(p, representation)) for p in corpus.passages]


def document_items(corpus: Corpus) -> List[Tuple[str, str, str]]:
    return [(doc_id, doc_id, document_representation(doc)) for doc_id, doc in corpus.documents.items()]
