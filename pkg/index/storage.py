"""
Versioned binary serialization of sparse and dense indexes

Layout (little-endian):
    magic "TDPR1" | u8 kind (1 sparse, 2 dense) | u8 level | u32 dim | u32 n | str fingerprint
    dense:  n x (str id, str doc_id) | n*dim float32
    sparse: f64 k1 | f64 b | n x (str id, str doc_id, u32 length)
            | u32 n_terms | per term (sorted): str term, u32 n_postings, n_postings x (u32 ordinal, u32 tf)
Strings are a u32 byte length followed by UTF-8 bytes.
"""

import io
import logging
import struct
from pathlib import Path
from typing import BinaryIO, Dict, List, Tuple, Union

import numpy as np

from index.dense import IndexLevel, VectorIndex
from index.sparse import InvertedIndex
from utils.constants import INDEX_MAGIC
from utils.errors import IndexFormatError

logger = logging.getLogger(__name__)

KIND_SPARSE = 1
KIND_DENSE = 2
_LEVELS = {IndexLevel.PASSAGE: 0, IndexLevel.DOCUMENT: 1}
_HEADER = struct.Struct("<BBII")


def _write_str(out: BinaryIO, value: str) -> None:
    data = value.encode("utf-8")
    out.write(struct.pack("<I", len(data)))
    out.write(data)


class _Reader:
    """Cursor over a byte buffer that reports truncation as a format error"""

    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise IndexFormatError(f"{self.source}: truncated at byte {self.offset}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        spec = struct.Struct(fmt)
        return spec.unpack(self.take(spec.size))

    def string(self) -> str:
        (size,) = self.unpack("<I")
        try:
            return self.take(size).decode("utf-8")
        except UnicodeDecodeError as e:
            raise IndexFormatError(f"{self.source}: invalid UTF-8 string: {e}") from e

    def done(self) -> None:
        if self.offset != len(self.data):
            raise IndexFormatError(f"{self.source}: {len(self.data) - self.offset} trailing bytes")


def _header(out: BinaryIO, kind: int, level: int, dim: int, n: int, fingerprint: str) -> None:
    out.write(INDEX_MAGIC)
    out.write(_HEADER.pack(kind, level, dim, n))
    _write_str(out, fingerprint)


def _read_header(reader: _Reader, expected_kind: int) -> Tuple[int, int, int, str]:
    if reader.take(len(INDEX_MAGIC)) != INDEX_MAGIC:
        raise IndexFormatError(f"{reader.source}: not a {INDEX_MAGIC.decode()} index file")
    kind, level, dim, n = reader.unpack(_HEADER.format)
    if kind != expected_kind:
        raise IndexFormatError(f"{reader.source}: index kind {kind}, expected {expected_kind}")
    return level, dim, n, reader.string()


def dump_vector_index(index: VectorIndex) -> bytes:
    out = io.BytesIO()
    _header(out, KIND_DENSE, _LEVELS[index.level], index.dim, len(index), index.fingerprint)
    for entry_id, doc_id in zip(index.ids, index.doc_ids):
        _write_str(out, entry_id)
        _write_str(out, doc_id)
    out.write(index.vectors.astype("<f4").tobytes())
    return out.getvalue()


def parse_vector_index(data: bytes, source: str = "<bytes>") -> VectorIndex:
    reader = _Reader(data, source)
    level_code, dim, n, fingerprint = _read_header(reader, KIND_DENSE)
    levels = {code: level for level, code in _LEVELS.items()}
    if level_code not in levels:
        raise IndexFormatError(f"{source}: unknown index level {level_code}")
    ids, doc_ids = [], []
    for _ in range(n):
        ids.append(reader.string())
        doc_ids.append(reader.string())
    vectors = np.frombuffer(reader.take(4 * n * dim), dtype="<f4").reshape(n, dim)
    reader.done()
    return VectorIndex(ids=ids, doc_ids=doc_ids, vectors=vectors.astype(np.float32),
                       level=levels[level_code], fingerprint=fingerprint)


def dump_sparse_index(index: InvertedIndex) -> bytes:
    out = io.BytesIO()
    _header(out, KIND_SPARSE, 0, 0, index.n_passages, "")
    out.write(struct.pack("<dd", index.k1, index.b))
    ordinals: Dict[str, int] = {}
    for ordinal, (pid, length) in enumerate(index.passage_lengths.items()):
        ordinals[pid] = ordinal
        _write_str(out, pid)
        _write_str(out, index.passage_docs[pid])
        out.write(struct.pack("<I", length))
    out.write(struct.pack("<I", len(index.postings)))
    for term in sorted(index.postings):
        entries = index.postings[term]
        _write_str(out, term)
        out.write(struct.pack("<I", len(entries)))
        for pid, tf in entries:
            out.write(struct.pack("<II", ordinals[pid], tf))
    return out.getvalue()


def parse_sparse_index(data: bytes, source: str = "<bytes>") -> InvertedIndex:
    reader = _Reader(data, source)
    _, _, n, _ = _read_header(reader, KIND_SPARSE)
    k1, b = reader.unpack("<dd")
    pids: List[str] = []
    lengths: Dict[str, int] = {}
    docs: Dict[str, str] = {}
    for _ in range(n):
        pid = reader.string()
        docs[pid] = reader.string()
        (lengths[pid],) = reader.unpack("<I")
        pids.append(pid)
    (n_terms,) = reader.unpack("<I")
    postings: Dict[str, List[Tuple[str, int]]] = {}
    for _ in range(n_terms):
        term = reader.string()
        (count,) = reader.unpack("<I")
        entries = []
        for _ in range(count):
            ordinal, tf = reader.unpack("<II")
            if ordinal >= n:
                raise IndexFormatError(f"{source}: posting ordinal {ordinal} out of range")
            entries.append((pids[ordinal], tf))
        postings[term] = entries
    reader.done()
    return InvertedIndex(postings=postings, passage_lengths=lengths, passage_docs=docs, k1=k1, b=b)


def save_index(index: Union[InvertedIndex, VectorIndex], path: Union[str, Path]) -> Path:
    """Write an index file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dump_sparse_index(index) if isinstance(index, InvertedIndex) else dump_vector_index(index)
    path.write_bytes(payload)
    logger.debug("Saved index %s (%d bytes)", path, len(payload))
    return path


def _read(path: Union[str, Path]) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        raise IndexFormatError(f"index file not found: {path} (run the index command first)") from None


def load_vector_index(path: Union[str, Path]) -> VectorIndex:
    return parse_vector_index(_read(path), str(path))


def load_sparse_index(path: Union[str, Path]) -> InvertedIndex:
    return parse_sparse_index(_read(path), str(path))
