"""
LLM clients: deterministic mock, echo mock and the HTTP generate protocol
"""

import abc
import asyncio
import hashlib
import json
import logging
import re
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Union

import aiohttp

from corpus.tokenizer import analyze
from utils.constants import LLM_MAX_IN_FLIGHT, LLM_MAX_TOKENS, MCQ_DIRECTIVE, OPTION_LETTERS, STOPWORDS
from utils.errors import LLMError, UsageError

if TYPE_CHECKING:
    from utils.config import LLMConfig

logger = logging.getLogger(__name__)


def prompt_hash(prompt: str) -> str:
    """Key used by the echo mock"""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def content_terms(text: str) -> set:
    return {t for t in analyze(text) if t not in STOPWORDS}


class LLMClient(abc.ABC):
    """Text generation interface"""

    is_mock = False

    @abc.abstractmethod
    async def generate(self, prompt: str, max_tokens: int = LLM_MAX_TOKENS) -> str:
        """Completion text for a prompt"""

    async def close(self) -> None:
        """Release network resources"""


_OPTION_LINE = re.compile(r"^([A-E])\. (.*)$", re.MULTILINE)
_QA_LIMIT = re.compile(r"between 1 and (\d+) question")
_SENTENCE = re.compile(r"(?<=[.?!;])\s+")


class MockLLMClient(LLMClient):
    """
    Offline client whose output is a pure function of the prompt

    MCQ prompts get the letter of the option sharing the most content terms
    with the context (first option on ties). QA-generation prompts get
    numbered Q/A blocks built from the passage sentences.
    """

    is_mock = True

    async def generate(self, prompt: str, max_tokens: int = LLM_MAX_TOKENS) -> str:
        if MCQ_DIRECTIVE in prompt:
            return self.answer_mcq(prompt)
        limit = _QA_LIMIT.search(prompt)
        if limit:
            return self.write_qa(prompt, int(limit.group(1)))
        return ""

    @staticmethod
    def answer_mcq(prompt: str) -> str:
        head, _, options_block = prompt.rpartition("Options:\n")
        context = head.partition("Context:\n")[2].rpartition("\n\nQuestion:")[0]
        context_terms = content_terms(context)
        best_letter, best_score = OPTION_LETTERS[0], -1
        for letter, text in _OPTION_LINE.findall(options_block):
            score = len(content_terms(text) & context_terms)
            if score > best_score:
                best_letter, best_score = letter, score
        return best_letter

    @staticmethod
    def write_qa(prompt: str, max_questions: int) -> str:
        passage = prompt.partition("Passage:\n")[2].partition("\n\n")[0]
        blocks: List[str] = []
        for sentence in _SENTENCE.split(passage.strip()):
            terms = [t for t in analyze(sentence) if t not in STOPWORDS]
            if len(terms) < 2:
                continue
            n = len(blocks) + 1
            subject = " ".join(terms[:6])
            blocks.append(f"Q{n}: What does the specification state about {subject}?\nA{n}: {sentence.strip()}")
            if len(blocks) == max_questions:
                break
        return "\n\n".join(blocks)


class EchoMockLLMClient(LLMClient):
    """Test client returning configured text for known prompt hashes"""

    def __init__(self, responses: Optional[Dict[str, str]] = None, default: str = ""):
        self.responses = dict(responses or {})
        self.default = default
        self.prompts: List[str] = []

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "EchoMockLLMClient":
        """Load a JSON object mapping prompt SHA-256 to completion text"""
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read echo responses {path}: {e}") from e
        return cls(responses=data.get("responses", data), default=data.get("default", ""))

    def respond(self, prompt: str, text: str) -> None:
        self.responses[prompt_hash(prompt)] = text

    async def generate(self, prompt: str, max_tokens: int = LLM_MAX_TOKENS) -> str:
        self.prompts.append(prompt)
        return self.responses.get(prompt_hash(prompt), self.default)


class HttpLLMClient(LLMClient):
    """Client for `POST /generate {"prompt", "max_tokens"} -> {"text"}`"""

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        max_tokens: int = LLM_MAX_TOKENS,
        max_in_flight: int = LLM_MAX_IN_FLIGHT,
        timeout: float = 120.0,
        session: Optional[aiohttp.ClientSession] = None
    ):
        if not endpoint:
            raise UsageError("llm.endpoint is required for the http LLM client")
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.max_tokens = max_tokens
        self.timeout = aiohttp.ClientTimeout(total=timeout)
        self.semaphore = asyncio.Semaphore(max_in_flight)
        self._session = session
        self._owns_session = session is None

    async def get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(timeout=self.timeout)
            self._owns_session = True
        return self._session

    async def generate(self, prompt: str, max_tokens: int = LLM_MAX_TOKENS) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        data = {"prompt": prompt, "max_tokens": min(max_tokens, self.max_tokens)}

        session = await self.get_session()
        async with self.semaphore:
            try:
                async with session.post(f"{self.endpoint}/generate", headers=headers, json=data) as response:
                    if response.status != 200:
                        error_text = (await response.text())[:200]
                        logger.error(f"LLM API error {response.status}: {error_text}")
                        raise LLMError(f"LLM returned HTTP {response.status}: {error_text}")
                    result = await response.json()
            except (aiohttp.ClientError, asyncio.TimeoutError) as e:
                raise LLMError(f"LLM transport failure: {e!r}") from e

        text = result.get("text") if isinstance(result, dict) else None
        if not isinstance(text, str):
            raise LLMError("LLM response has no 'text' field")
        return text

    async def close(self) -> None:
        if self._owns_session and self._session is not None and not self._session.closed:
            await self._session.close()


def create_llm_client(config: "LLMConfig") -> LLMClient:
    """LLM client for the `llm` config section"""
    if config.kind == "http":
        return HttpLLMClient(
            config.endpoint,
            api_key=config.api_key,
            max_tokens=config.max_tokens,
            max_in_flight=config.max_in_flight,
            timeout=config.timeout,
        )
    if config.kind == "echo":
        if config.responses_path:
            return EchoMockLLMClient.from_file(config.responses_path)
        return EchoMockLLMClient()
    return MockLLMClient()
