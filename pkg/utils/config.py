"""
Run configuration: YAML loading, defaults, command-line overrides and validation
"""

import copy
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml

from retrieve.models import RetrieverConfig
from train.trainer import TrainConfig
from utils.constants import (
    CONFIG_ENV_VAR,
    CONTEXT_TOKENS,
    DEFAULT_CONFIG_PATH,
    DEFAULT_D,
    DEFAULT_K,
    EMBED_BATCH_SIZE,
    EMBED_MAX_IN_FLIGHT,
    HISTOGRAM_BINS,
    LLM_MAX_IN_FLIGHT,
    LLM_MAX_TOKENS,
    MAX_QUESTIONS_PER_PASSAGE,
    MIN_AGGREGATE_TOKENS,
    MIN_CONTEXT_TOKENS,
    MIN_SPLIT_LIMIT,
    REPORT_KS,
    TOKEN_LIMIT,
    TRAINING,
)
from utils.errors import UsageError

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    "corpus_path": "data/corpus.jsonl",
    "index_dir": "indexes",
    "out_dir": "runs",
    "seed": 0,
    "provider": {
        "kind": "hash",
        "endpoint": "",
        "dim": 256,
        "batch_size": EMBED_BATCH_SIZE,
        "max_in_flight": EMBED_MAX_IN_FLIGHT,
        "timeout": 30.0,
        "max_retries": 2,
    },
    "llm": {
        "kind": "mock",
        "endpoint": "",
        "api_key": "",
        "max_tokens": LLM_MAX_TOKENS,
        "max_in_flight": LLM_MAX_IN_FLIGHT,
        "timeout": 120.0,
        "responses_path": "",
    },
    "ingest": {
        "token_limit": TOKEN_LIMIT,
        "min_tokens": MIN_AGGREGATE_TOKENS,
        "similarity": "jaccard",
    },
    "retriever": {
        "method": "dhr",
        "k": DEFAULT_K,
        "d": DEFAULT_D,
        "adapter": None,
        "representation": "sectioned",
    },
    "train": {
        "learning_rate": TRAINING["learning_rate"],
        "epochs": TRAINING["epochs"],
        "batch_size": TRAINING["batch_size"],
        "scale": TRAINING["scale"],
        "seed": None,
    },
    "evaluation": {
        "split": "test",
        "ks": list(REPORT_KS),
        "bins": HISTOGRAM_BINS,
        "context_tokens": CONTEXT_TOKENS,
        "zero_shot": False,
    },
    "generation": {
        "max_questions": MAX_QUESTIONS_PER_PASSAGE,
        "documents": [],
        "test_fraction": 0.3,
    },
    "logging": {
        "level": "INFO",
        "file": "logs/specqa.log",
        "format": "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s",
        "date_format": "%Y-%m-%d %H:%M:%S",
    },
}


def replace_env_vars(obj: Any) -> Any:
    """Recursively replace "${ENV_VAR}" strings with environment values"""
    if isinstance(obj, dict):
        return {k: replace_env_vars(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [replace_env_vars(item) for item in obj]
    if isinstance(obj, str) and obj.startswith("${") and obj.endswith("}"):
        return os.getenv(obj[2:-1], obj)
    return obj


def load_config(config_path: Union[str, Path] = DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    """Load configuration from a YAML file"""
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise UsageError(f"config file {str(config_path)!r} not found") from None
    except yaml.YAMLError as e:
        raise UsageError(f"error parsing config file {config_path}: {e}") from e
    if not isinstance(config, dict):
        raise UsageError(f"config file {config_path} must contain a mapping")
    return replace_env_vars(config)


def resolve_config_path(explicit: Optional[str] = None) -> Optional[Path]:
    """--config flag, then $TDPR_CONFIG, then ./config.yaml, else None (defaults)"""
    if explicit:
        return Path(explicit)
    from_env = os.getenv(CONFIG_ENV_VAR)
    if from_env:
        return Path(from_env)
    local = Path(DEFAULT_CONFIG_PATH)
    return local if local.exists() else None


def merge_config(base: Dict[str, Any], override: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Deep-merge `override` into a copy of `base`; unknown keys are rejected"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise UsageError(f"unknown config key {dotted!r}")
        if isinstance(base[key], dict):
            if value is None:
                continue
            if not isinstance(value, dict):
                raise UsageError(f"config key {dotted!r} must be a mapping")
            merged[key] = merge_config(base[key], value, prefix=f"{dotted}.")
        else:
            merged[key] = value
    return merged


def parse_overrides(tokens: Sequence[str]) -> List[Tuple[str, Any]]:
    """
    Parse `--section.key value` (or `--section.key=value`) tokens

    Values are read as YAML scalars, so `--retriever.k 5` gives an int and
    `--evaluation.zero_shot true` a bool.
    """
    overrides: List[Tuple[str, Any]] = []
    i = 0
    tokens = list(tokens)
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or len(token) <= 2:
            raise UsageError(f"unexpected argument {token!r}")
        name = token[2:]
        if "=" in name:
            name, raw = name.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise UsageError(f"override {token!r} needs a value")
            raw = tokens[i + 1]
            i += 2
        try:
            value = yaml.safe_load(raw) if raw != "" else ""
        except yaml.YAMLError:
            value = raw
        overrides.append((name.replace("-", "_"), value))
    return overrides


def apply_overrides(data: Dict[str, Any], overrides: Sequence[Tuple[str, Any]]) -> Dict[str, Any]:
    """Apply dotted-key overrides onto a (merged) config mapping"""
    result = copy.deepcopy(data)
    for dotted, value in overrides:
        parts = dotted.split(".")
        node = result
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise UsageError(f"unknown config key {dotted!r}")
            node = node[part]
        if parts[-1] not in node or isinstance(node[parts[-1]], dict):
            raise UsageError(f"unknown config key {dotted!r}")
        node[parts[-1]] = value
    return result


def _choice(section: str, key: str, value: Any, choices: Sequence[str]) -> str:
    if value not in choices:
        raise UsageError(f"{section}.{key} must be one of {', '.join(choices)}, got {value!r}")
    return value


def _int(section: str, key: str, value: Any, minimum: int, maximum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise UsageError(f"{section}.{key} must be an integer, got {value!r}")
    if value < minimum or (maximum is not None and value > maximum):
        bound = f"in {minimum}..{maximum}" if maximum is not None else f">= {minimum}"
        raise UsageError(f"{section}.{key} must be {bound}, got {value}")
    return value


def _setting(value: Any) -> str:
    """String setting; an unresolved ${ENV_VAR} placeholder counts as unset"""
    if value is None:
        return ""
    value = str(value)
    return "" if value.startswith("${") and value.endswith("}") else value


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UsageError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ProviderConfig:
    """Embedding provider settings"""
    kind: str = "hash"
    endpoint: str = ""
    dim: Optional[int] = 256
    batch_size: int = EMBED_BATCH_SIZE
    max_in_flight: int = EMBED_MAX_IN_FLIGHT
    timeout: float = 30.0
    max_retries: int = 2

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProviderConfig":
        kind = _choice("provider", "kind", data["kind"], ("hash", "http"))
        endpoint = _setting(data["endpoint"])
        dim = data["dim"]
        if dim is not None or kind == "hash":
            dim = _int("provider", "dim", dim, 8)
        if kind == "http" and not endpoint:
            raise UsageError("provider.endpoint is required when provider.kind is http")
        return cls(
            kind=kind,
            endpoint=endpoint,
            dim=dim,
            batch_size=_int("provider", "batch_size", data["batch_size"], 1, EMBED_BATCH_SIZE),
            max_in_flight=_int("provider", "max_in_flight", data["max_in_flight"], 1),
            timeout=_number("provider", "timeout", data["timeout"]),
            max_retries=_int("provider", "max_retries", data["max_retries"], 0),
        )


@dataclass(frozen=True)
class LLMConfig:
    """Generative reader client settings"""
    kind: str = "mock"
    endpoint: str = ""
    api_key: str = ""
    max_tokens: int = LLM_MAX_TOKENS
    max_in_flight: int = LLM_MAX_IN_FLIGHT
    timeout: float = 120.0
    responses_path: str = ""

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LLMConfig":
        kind = _choice("llm", "kind", data["kind"], ("mock", "echo", "http"))
        endpoint = _setting(data["endpoint"])
        if kind == "http" and not endpoint:
            raise UsageError("llm.endpoint is required when llm.kind is http")
        return cls(
            kind=kind,
            endpoint=endpoint,
            api_key=_setting(data["api_key"]),
            max_tokens=_int("llm", "max_tokens", data["max_tokens"], 1),
            max_in_flight=_int("llm", "max_in_flight", data["max_in_flight"], 1),
            timeout=_number("llm", "timeout", data["timeout"]),
            responses_path=_setting(data["responses_path"]),
        )


@dataclass(frozen=True)
class IngestConfig:
    """Splitting and aggregation settings"""
    token_limit: int = TOKEN_LIMIT
    min_tokens: int = MIN_AGGREGATE_TOKENS
    similarity: str = "jaccard"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IngestConfig":
        token_limit = _int("ingest", "token_limit", data["token_limit"], MIN_SPLIT_LIMIT)
        min_tokens = _int("ingest", "min_tokens", data["min_tokens"], 0)
        if min_tokens >= token_limit:
            raise UsageError(f"ingest.min_tokens ({min_tokens}) must be below ingest.token_limit ({token_limit})")
        return cls(
            token_limit=token_limit,
            min_tokens=min_tokens,
            similarity=_choice("ingest", "similarity", data["similarity"], ("jaccard", "embedding")),
        )


@dataclass(frozen=True)
class EvaluationConfig:
    """Evaluation settings"""
    split: str = "test"
    ks: Tuple[int, ...] = REPORT_KS
    bins: int = HISTOGRAM_BINS
    context_tokens: int = CONTEXT_TOKENS
    zero_shot: bool = False

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvaluationConfig":
        ks = data["ks"]
        if isinstance(ks, int):
            ks = [ks]
        if not isinstance(ks, (list, tuple)) or not ks:
            raise UsageError(f"evaluation.ks must be a non-empty list, got {ks!r}")
        return cls(
            split=_choice("evaluation", "split", data["split"], ("train", "test", "all")),
            ks=tuple(sorted({_int("evaluation", "ks", k, 1) for k in ks})),
            bins=_int("evaluation", "bins", data["bins"], 2),
            context_tokens=_int("evaluation", "context_tokens", data["context_tokens"], MIN_CONTEXT_TOKENS),
            zero_shot=bool(data["zero_shot"]),
        )


@dataclass(frozen=True)
class GenerationConfig:
    """Synthetic QA generation settings"""
    max_questions: int = MAX_QUESTIONS_PER_PASSAGE
    documents: Tuple[str, ...] = ()
    test_fraction: float = 0.3

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GenerationConfig":
        documents = data["documents"] or []
        if isinstance(documents, str):
            documents = [documents]
        test_fraction = _number("generation", "test_fraction", data["test_fraction"])
        if not 0.0 <= test_fraction <= 1.0:
            raise UsageError(f"generation.test_fraction must be in [0, 1], got {test_fraction}")
        return cls(
            max_questions=_int("generation", "max_questions", data["max_questions"], 1, MAX_QUESTIONS_PER_PASSAGE),
            documents=tuple(str(d) for d in documents),
            test_fraction=test_fraction,
        )


@dataclass
class RunConfig:
    """Validated configuration for one command run"""
    corpus_path: Path
    index_dir: Path
    out_dir: Path
    seed: int
    provider: ProviderConfig
    llm: LLMConfig
    ingest: IngestConfig
    retriever: RetrieverConfig
    train: TrainConfig
    evaluation: EvaluationConfig
    generation: GenerationConfig
    logging: Dict[str, Any] = field(default_factory=dict)
    source: Optional[Path] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Optional[Path] = None) -> "RunConfig":
        """Merge onto defaults and validate; raises UsageError"""
        data = merge_config(DEFAULTS, data)
        seed = _int("config", "seed", data["seed"], 0)
        train = {k: v for k, v in data["train"].items() if v is not None}
        try:
            retriever = RetrieverConfig.from_dict(data["retriever"])
            train_config = TrainConfig.from_dict(train, seed=seed)
        except (TypeError, ValueError) as e:
            raise UsageError(f"invalid retriever/train settings: {e}") from e
        return cls(
            corpus_path=Path(str(data["corpus_path"])),
            index_dir=Path(str(data["index_dir"])),
            out_dir=Path(str(data["out_dir"])),
            seed=seed,
            provider=ProviderConfig.from_dict(data["provider"]),
            llm=LLMConfig.from_dict(data["llm"]),
            ingest=IngestConfig.from_dict(data["ingest"]),
            retriever=retriever,
            train=train_config,
            evaluation=EvaluationConfig.from_dict(data["evaluation"]),
            generation=GenerationConfig.from_dict(data["generation"]),
            logging=dict(data["logging"]),
            source=source,
        )


def build_run_config(
    config_path: Optional[str] = None,
    overrides: Sequence[Tuple[str, Any]] = ()
) -> RunConfig:
    """Resolve, load, merge and override the configuration for a command"""
    path = resolve_config_path(config_path)
    data = load_config(path) if path is not None else {}
    merged = apply_overrides(merge_config(DEFAULTS, data), overrides)
    if path is None:
        logger.debug("No config file found; using built-in defaults")
    return RunConfig.from_dict(merged, source=path)
