"""
Embedding providers and batched, normalized embedding
"""

import abc
import asyncio
import functools
import logging
from typing import TYPE_CHECKING, List, Optional, Sequence

import aiohttp
import numpy as np

from corpus.tokenizer import analyze
from utils.constants import EMBED_BATCH_SIZE, EMBED_MAX_IN_FLIGHT, SEP_TOKEN
from utils.errors import DimensionMismatchError, EmbeddingError, UsageError

if TYPE_CHECKING:
    from utils.config import ProviderConfig

logger = logging.getLogger(__name__)

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
_MASK_64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash"""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK_64
    return h


@functools.lru_cache(maxsize=1 << 16)
def _token_hashes(token: str):
    data = token.encode("utf-8")
    return fnv1a_64(data), fnv1a_64(b"sign:" + data)


def unit_vector(dim: int, axis: int = 0) -> np.ndarray:
    v = np.zeros(dim, dtype=np.float64)
    v[axis] = 1.0
    return v


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Unit-norm copy; a zero vector maps to e0"""
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        return unit_vector(v.shape[0])
    return v / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two unit vectors (their dot product)"""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare vectors of dim {a.shape[0]} and {b.shape[0]}")
    return float(np.dot(a, b))


class EmbeddingProvider(abc.ABC):
    """Interface every embedding provider implements"""

    dim: Optional[int]
    batch_size: int = EMBED_BATCH_SIZE
    max_retries: int = 2

    @property
    def name(self) -> str:
        return type(self).__name__

    @abc.abstractmethod
    async def embed_batch(self, texts: List[str]) -> List[List[float]]:
        """Return one vector per input text"""

    async def close(self) -> None:
        """Release network resources"""


class HashEmbedder(EmbeddingProvider):
    """Deterministic offline provider: signed feature hashing of tokens"""

    def __init__(self, dim: int = 256):
        if dim < 8:
            raise UsageError(f"hash embedder dim must be >= 8, got {dim}")
        self.dim = dim

    @property
    def name(self) -> str:
        return f"hash (dim={self.dim})"

    def embed_text(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in analyze(text.replace(SEP_TOKEN, " ")):
            bucket_hash, sign_hash = _token_hashes(token)
            vector[bucket_hash % self.dim] += 1.0 if sign_hash >> 63 == 0 else -1.0
        return l2_normalize(vector)

    async def embed_batch(self, texts: List[str]) -> List[List[float]]:
        return [self.embed_text(t).tolist() for t in texts]


def hash_embedder(text: str, dim: int) -> np.ndarray:
    return HashEmbedder(dim).embed_text(text)


class HttpEmbeddingProvider(EmbeddingProvider):
    """Client for the `POST /embed` JSON protocol"""

    def __init__(
        self,
        endpoint: str,
        dim: Optional[int] = None,
        max_in_flight: int = EMBED_MAX_IN_FLIGHT,
        timeout: float = 30.0,
        session: Optional[aiohttp.ClientSession] = None
    ):
        if not endpoint:
            raise UsageError("provider.endpoint is required for the http provider")
        self.endpoint = endpoint.rstrip("/")
        self.dim = dim
        self.timeout = aiohttp.ClientTimeout(total=timeout)
        self.semaphore = asyncio.Semaphore(max_in_flight)
        self._session = session
        self._owns_session = session is None

    @property
    def name(self) -> str:
        return f"http ({self.endpoint})"

    async def get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(timeout=self.timeout)
            self._owns_session = True
        return self._session

    async def embed_batch(self, texts: List[str]) -> List[List[float]]:
        session = await self.get_session()
        async with self.semaphore:
            try:
                async with session.post(f"{self.endpoint}/embed", json={"texts": texts}) as response:
                    if response.status != 200:
                        detail = (await response.text())[:200]
                        raise EmbeddingError(
                            f"provider returned HTTP {response.status}: {detail}",
                            retriable=response.status >= 500 or response.status == 429
                        )
                    payload = await response.json()
            except (aiohttp.ClientError, asyncio.TimeoutError) as e:
                raise EmbeddingError(f"provider transport failure: {e!r}", retriable=True) from e

        try:
            dim = int(payload["dim"])
            vectors = payload["vectors"]
        except (KeyError, TypeError, ValueError) as e:
            raise EmbeddingError(f"malformed provider response: {e!r}") from e
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise EmbeddingError(f"provider dim changed from {self.dim} to {dim}")
        if len(vectors) != len(texts):
            raise EmbeddingError(f"provider returned {len(vectors)} vectors for {len(texts)} texts")
        return vectors

    async def close(self) -> None:
        if self._owns_session and self._session is not None and not self._session.closed:
            await self._session.close()


async def embed(
    provider: EmbeddingProvider,
    texts: Sequence[str],
    batch_size: Optional[int] = None,
    max_retries: Optional[int] = None
) -> List[np.ndarray]:
    """
    Embed texts in concurrent provider batches

    Args:
        provider: Embedding provider
        texts: Input texts; empty strings are allowed
        batch_size: Texts per provider call (capped at 64), default from the provider
        max_retries: Extra attempts for retriable provider errors, default from the provider

    Returns:
        One unit-norm float64 vector per text, in input order
    """
    texts = list(texts)
    if not texts:
        return []
    batch_size = max(1, min(batch_size or provider.batch_size, EMBED_BATCH_SIZE))
    max_retries = provider.max_retries if max_retries is None else max_retries

    async def run(start: int) -> np.ndarray:
        batch = texts[start:start + batch_size]
        for attempt in range(max_retries + 1):
            try:
                vectors = await provider.embed_batch(batch)
                break
            except EmbeddingError as e:
                if not e.retriable or attempt == max_retries:
                    raise EmbeddingError(
                        f"{provider.name}: batch starting at item {start}: {e}",
                        retriable=e.retriable, start=start
                    ) from e
                logger.warning("Retrying embedding batch at %d after: %s", start, e)
                await asyncio.sleep(0.1 * 2 ** attempt)
        array = np.asarray(vectors, dtype=np.float64)
        if array.ndim != 2 or array.shape[0] != len(batch) or array.shape[1] != provider.dim:
            raise DimensionMismatchError(
                f"{provider.name} returned shape {array.shape}, expected ({len(batch)}, {provider.dim})"
            )
        return array

    batches = await asyncio.gather(*(run(s) for s in range(0, len(texts), batch_size)))
    return [l2_normalize(row) for row in np.vstack(batches)]


def create_provider(config: "ProviderConfig") -> EmbeddingProvider:
    """Embedding provider for the `provider` config section"""
    if config.kind == "http":
        provider: EmbeddingProvider = HttpEmbeddingProvider(
            config.endpoint,
            dim=config.dim,
            max_in_flight=config.max_in_flight,
            timeout=config.timeout,
        )
    else:
        provider = HashEmbedder(config.dim)
    provider.batch_size = config.batch_size
    provider.max_retries = config.max_retries
    return provider
