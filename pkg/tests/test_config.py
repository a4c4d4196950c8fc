"""
Tests for configuration loading, overrides and validation
"""

from pathlib import Path

import pytest

from retrieve.models import RetrieverMethod
from utils.config import (
    DEFAULTS,
    RunConfig,
    apply_overrides,
    build_run_config,
    load_config,
    merge_config,
    parse_overrides,
    resolve_config_path,
)
from utils.errors import UsageError


def test_load_config_substitutes_environment(tmp_path, monkeypatch):
    """Test ${ENV} placeholders in YAML values"""
    monkeypatch.setenv("SPECQA_LLM_KEY", "sk-test")
    path = tmp_path / "config.yaml"
    path.write_text("llm:\n  api_key: ${SPECQA_LLM_KEY}\n  endpoint: ${SPECQA_UNSET_VAR}\n", encoding="utf-8")
    data = load_config(path)
    assert data["llm"]["api_key"] == "sk-test"
    assert data["llm"]["endpoint"] == "${SPECQA_UNSET_VAR}"

    config = RunConfig.from_dict(data)
    assert config.llm.api_key == "sk-test"
    assert config.llm.endpoint == ""


def test_load_config_errors(tmp_path):
    with pytest.raises(UsageError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("retriever: [unclosed\n", encoding="utf-8")
    with pytest.raises(UsageError):
        load_config(bad)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("just a string\n", encoding="utf-8")
    with pytest.raises(UsageError):
        load_config(scalar)


def test_resolve_config_path_precedence(tmp_path, monkeypatch):
    """Explicit flag, then environment, then ./config.yaml"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TDPR_CONFIG", raising=False)
    assert resolve_config_path() is None

    (tmp_path / "config.yaml").write_text("seed: 1\n", encoding="utf-8")
    assert resolve_config_path() == Path("config.yaml")
    monkeypatch.setenv("TDPR_CONFIG", "other.yaml")
    assert resolve_config_path() == Path("other.yaml")
    assert resolve_config_path("explicit.yaml") == Path("explicit.yaml")


def test_merge_rejects_unknown_keys():
    merged = merge_config(DEFAULTS, {"retriever": {"k": 3}})
    assert merged["retriever"]["k"] == 3
    assert merged["retriever"]["d"] == DEFAULTS["retriever"]["d"]
    with pytest.raises(UsageError):
        merge_config(DEFAULTS, {"retriever": {"colour": "blue"}})
    with pytest.raises(UsageError):
        merge_config(DEFAULTS, {"retriever": 5})


def test_parse_overrides_reads_yaml_scalars():
    overrides = parse_overrides(["--retriever.k", "5", "--evaluation.zero_shot=true", "--logging.file="])
    assert overrides == [("retriever.k", 5), ("evaluation.zero_shot", True), ("logging.file", "")]
    assert parse_overrides(["--retriever.adapter", "null"]) == [("retriever.adapter", None)]
    with pytest.raises(UsageError):
        parse_overrides(["stray"])
    with pytest.raises(UsageError):
        parse_overrides(["--retriever.k"])


def test_apply_overrides_checks_keys():
    data = apply_overrides(DEFAULTS, [("retriever.method", "bm25")])
    assert data["retriever"]["method"] == "bm25"
    assert DEFAULTS["retriever"]["method"] == "dhr"
    with pytest.raises(UsageError):
        apply_overrides(DEFAULTS, [("retriever.nope", 1)])
    with pytest.raises(UsageError):
        apply_overrides(DEFAULTS, [("provider", "hash")])


def test_run_config_defaults(tmp_path, monkeypatch):
    """Built-in defaults apply when no config file exists"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TDPR_CONFIG", raising=False)
    config = build_run_config(overrides=[("seed", 4), ("train.epochs", 2)])
    assert config.source is None
    assert config.retriever.method is RetrieverMethod.DHR
    assert config.provider.kind == "hash"
    assert config.llm.kind == "mock"
    assert config.train.seed == 4
    assert config.train.epochs == 2
    assert config.evaluation.ks == (1, 3, 5, 10)


@pytest.mark.parametrize("override", [
    {"provider": {"kind": "http"}},
    {"llm": {"kind": "http"}},
    {"llm": {"kind": "telepathy"}},
    {"ingest": {"token_limit": 8}},
    {"ingest": {"min_tokens": 600}},
    {"evaluation": {"ks": []}},
    {"evaluation": {"bins": 1}},
    {"evaluation": {"context_tokens": 64}},
    {"generation": {"max_questions": 6}},
    {"generation": {"test_fraction": 1.5}},
    {"retriever": {"k": 0}},
    {"train": {"learning_rate": -1.0}},
    {"seed": -1},
])
def test_run_config_validation(override):
    with pytest.raises(UsageError):
        RunConfig.from_dict(override)


def test_evaluation_ks_are_sorted_and_unique():
    config = RunConfig.from_dict({"evaluation": {"ks": [10, 1, 3, 1]}})
    assert config.evaluation.ks == (1, 3, 10)
    assert RunConfig.from_dict({"evaluation": {"ks": 5}}).evaluation.ks == (5,)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
