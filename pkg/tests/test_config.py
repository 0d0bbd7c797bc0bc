"""Tests for configuration loading and validation."""

from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from triage_mcp.config import BackendConfig, IngestionConfig, ServiceConfig, load_config
from triage_mcp.models.logs import LogLevel


class TestDefaults:
    """Tests for the default configuration."""

    def test_defaults(self) -> None:
        config = load_config(environ={})
        assert config.backend.kind == "mock"
        assert config.backend.params.temperature == 0.1
        assert config.backend.params.top_p == 0.8
        assert config.ingestion.driver_component_names == frozenset({"test_driver"})
        assert config.ingestion.min_level is LogLevel.INFO
        assert config.budget_tokens == 200_000
        assert not config.post_findings

    def test_store_paths(self, tmp_path: Path) -> None:
        config = ServiceConfig(store_dir=tmp_path)
        assert config.findings_dir == tmp_path / "findings"
        assert config.feedback_path == tmp_path / "feedback.jsonl"


class TestLoadConfig:
    """Tests for load_config precedence."""

    def test_file_values(self, tmp_path: Path) -> None:
        path = tmp_path / "triage.env"
        path.write_text(
            "PORT=9100\nTRIAGE_BUDGET_TOKENS=5000\nMIN_LEVEL=warning\n"
            "DRIVER_COMPONENTS=test_driver, harness\nUNKNOWN_KEY=1\n",
            encoding="utf-8",
        )
        config = load_config(path, environ={})
        assert config.port == 9100
        assert config.budget_tokens == 5000
        assert config.ingestion.min_level is LogLevel.WARNING
        assert config.ingestion.driver_component_names == frozenset({"test_driver", "harness"})

    def test_environment_beats_file(self, tmp_path: Path) -> None:
        path = tmp_path / "triage.env"
        path.write_text("PORT=9100\nLLM_MODEL=from-file\n", encoding="utf-8")
        environ = {"TRIAGE_PORT": "9200", "PORT": "1", "OTHER": "x"}
        config = load_config(path, environ=environ)
        assert config.port == 9200
        assert config.backend.model_name == "from-file"

    def test_environment_needs_prefix(self) -> None:
        config = load_config(environ={"BUDGET_TOKENS": "10"})
        assert config.budget_tokens == 200_000

    def test_overrides_win(self) -> None:
        environ = {"TRIAGE_BUDGET_TOKENS": "5000", "TRIAGE_LLM_TIMEOUT": "30"}
        config = load_config(
            environ=environ,
            budget_tokens=7000,
            timeout_seconds=None,
            min_level="ERROR",
            model_name="m2",
        )
        assert config.budget_tokens == 7000
        assert config.backend.timeout_seconds == 30.0
        assert config.backend.model_name == "m2"
        assert config.ingestion.min_level is LogLevel.ERROR

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.env", environ={})

    def test_replay_backend_from_environment(self, tmp_path: Path) -> None:
        environ = {"TRIAGE_BACKEND": "replay", "TRIAGE_REPLAY_DIR": str(tmp_path)}
        config = load_config(environ=environ)
        assert config.backend.kind == "replay"
        assert config.backend.replay_dir == tmp_path


class TestValidation:
    """Tests for configuration validation errors."""

    def test_posting_needs_webhook(self) -> None:
        with pytest.raises(ValidationError, match="webhook_url"):
            ServiceConfig(post_findings=True)

    def test_posting_with_webhook(self) -> None:
        config = ServiceConfig(post_findings=True, webhook_url="http://hooks.test/x")
        assert config.post_findings

    @pytest.mark.parametrize(
        "kwargs",
        [
            pytest.param({"kind": "http"}, id="http-without-url"),
            pytest.param({"kind": "replay"}, id="replay-without-dir"),
            pytest.param({"kind": "carrier-pigeon"}, id="unknown-kind"),
            pytest.param({"temperature": 3.0}, id="temperature"),
            pytest.param({"max_retries": -1}, id="retries"),
        ],
    )
    def test_invalid_backend(self, kwargs: dict) -> None:
        with pytest.raises(ValidationError):
            BackendConfig(**kwargs)

    def test_empty_driver_names(self) -> None:
        with pytest.raises(ValidationError):
            IngestionConfig(driver_component_names=" , ")

    def test_unknown_level_name(self) -> None:
        with pytest.raises(ValidationError, match="unknown log level"):
            IngestionConfig(min_level="chatty")

    def test_bad_environment_value(self) -> None:
        with pytest.raises(ValidationError):
            load_config(environ={"TRIAGE_PORT": "not-a-port"})

    @pytest.mark.parametrize(
        "scheme",
        [
            pytest.param("log://{bundle}/{path}", id="unknown-name"),
            pytest.param("log://{0}", id="positional"),
            pytest.param("log://{bundle", id="unbalanced"),
        ],
    )
    def test_bad_link_scheme(self, scheme: str) -> None:
        with pytest.raises(ValidationError, match="link_scheme"):
            ServiceConfig(link_scheme=scheme)

    def test_custom_link_scheme(self) -> None:
        scheme = "https://logs.test/{bundle}?f={file}&l={line}"
        assert ServiceConfig(link_scheme=scheme).link_scheme == scheme
