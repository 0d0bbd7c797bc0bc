"""
Triage MCP - Configuration

Settings for ingestion, the completion backend and the HTTP service.

Values come from (lowest to highest precedence):
- model defaults
- an optional key-value config file (``KEY=value`` lines, read with python-dotenv)
- ``TRIAGE_*`` environment variables
"""

import logging
import os
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .models.backend import DEFAULT_MODEL_NAME, LlmParams
from .models.finding import DEFAULT_LINK_SCHEME
from .models.logs import LogLevel

logger = logging.getLogger(__name__)

ENV_PREFIX = "TRIAGE_"
DEFAULT_MAX_FILE_BYTES = 32 * 1024 * 1024
DEFAULT_BUDGET_TOKENS = 200_000
DEFAULT_API_KEY_ENV = "TRIAGE_LLM_API_KEY"


class IngestionConfig(BaseModel):
    """How a bundle directory is discovered and parsed."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    driver_component_names: frozenset[str] = Field(default=frozenset({"test_driver"}))
    min_level: LogLevel = LogLevel.INFO
    max_file_bytes: int = Field(default=DEFAULT_MAX_FILE_BYTES, gt=0)
    context_file_name: str = "context.json"

    @field_validator("driver_component_names", mode="before")
    @classmethod
    def _split_names(cls, value: Any) -> Any:
        if isinstance(value, str):
            return frozenset(name.strip() for name in value.split(",") if name.strip())
        return value

    @field_validator("driver_component_names")
    @classmethod
    def _names_not_empty(cls, value: frozenset[str]) -> frozenset[str]:
        if not value:
            raise ValueError("driver_component_names must not be empty")
        return value

    @field_validator("min_level", mode="before")
    @classmethod
    def _level_by_name(cls, value: Any) -> Any:
        if isinstance(value, str) and not value.isdigit():
            try:
                return LogLevel[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown log level {value!r}") from None
        return value


class BackendConfig(BaseModel):
    """Which completion backend to use and how to reach it."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    kind: Literal["http", "mock", "replay"] = "mock"
    base_url: Optional[str] = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    model_name: str = DEFAULT_MODEL_NAME
    temperature: float = Field(default=0.1, ge=0.0, le=2.0)
    top_p: float = Field(default=0.8, gt=0.0, le=1.0)
    max_output_tokens: int = Field(default=8192, ge=1)
    timeout_seconds: float = Field(default=120.0, gt=0)
    max_retries: int = Field(default=2, ge=0)
    replay_dir: Optional[Path] = None
    record: bool = False

    @model_validator(mode="after")
    def _check_kind(self) -> "BackendConfig":
        if self.kind == "http" and not self.base_url:
            raise ValueError("the http backend needs base_url")
        if self.kind == "replay" and self.replay_dir is None:
            raise ValueError("the replay backend needs replay_dir")
        return self

    @property
    def params(self) -> LlmParams:
        return LlmParams(
            temperature=self.temperature,
            top_p=self.top_p,
            model_name=self.model_name,
            max_output_tokens=self.max_output_tokens,
        )


class ServiceConfig(BaseModel):
    """Everything the CLI and the HTTP service need."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    host: str = "0.0.0.0"
    port: int = Field(default=8000, ge=0, le=65535)
    webhook_url: Optional[str] = None
    post_findings: bool = False
    backend: BackendConfig = Field(default_factory=BackendConfig)
    ingestion: IngestionConfig = Field(default_factory=IngestionConfig)
    budget_tokens: int = Field(default=DEFAULT_BUDGET_TOKENS, gt=0)
    link_scheme: str = DEFAULT_LINK_SCHEME
    store_dir: Path = Path(".triage")
    template_path: Optional[Path] = None

    @field_validator("link_scheme")
    @classmethod
    def _known_placeholders(cls, value: str) -> str:
        try:
            value.format(bundle="b", file="f", line=0)
        except (KeyError, IndexError, ValueError) as e:
            raise ValueError(
                f"link_scheme may only use {{bundle}}, {{file}} and {{line}}: {e!r}"
            ) from e
        return value

    @model_validator(mode="after")
    def _webhook_when_posting(self) -> "ServiceConfig":
        if self.post_findings and not self.webhook_url:
            raise ValueError("webhook_url is required when post_findings is enabled")
        return self

    @property
    def findings_dir(self) -> Path:
        return self.store_dir / "findings"

    @property
    def feedback_path(self) -> Path:
        return self.store_dir / "feedback.jsonl"


# Flat key -> (section, field). Section None means a top-level ServiceConfig field.
_KEY_MAP: dict[str, tuple[Optional[str], str]] = {
    "HOST": (None, "host"),
    "PORT": (None, "port"),
    "WEBHOOK_URL": (None, "webhook_url"),
    "POST_FINDINGS": (None, "post_findings"),
    "BUDGET_TOKENS": (None, "budget_tokens"),
    "LINK_SCHEME": (None, "link_scheme"),
    "STORE_DIR": (None, "store_dir"),
    "TEMPLATE_PATH": (None, "template_path"),
    "BACKEND": ("backend", "kind"),
    "LLM_BASE_URL": ("backend", "base_url"),
    "LLM_API_KEY_ENV": ("backend", "api_key_env"),
    "LLM_MODEL": ("backend", "model_name"),
    "LLM_TEMPERATURE": ("backend", "temperature"),
    "LLM_TOP_P": ("backend", "top_p"),
    "LLM_MAX_OUTPUT_TOKENS": ("backend", "max_output_tokens"),
    "LLM_TIMEOUT": ("backend", "timeout_seconds"),
    "LLM_MAX_RETRIES": ("backend", "max_retries"),
    "REPLAY_DIR": ("backend", "replay_dir"),
    "RECORD": ("backend", "record"),
    "DRIVER_COMPONENTS": ("ingestion", "driver_component_names"),
    "MIN_LEVEL": ("ingestion", "min_level"),
    "MAX_FILE_BYTES": ("ingestion", "max_file_bytes"),
    "CONTEXT_FILE_NAME": ("ingestion", "context_file_name"),
}


def _apply(values: Mapping[str, Optional[str]], into: dict[str, Any]) -> None:
    for raw_key, value in values.items():
        if value is None:
            continue
        key = raw_key.upper()
        if key.startswith(ENV_PREFIX):
            key = key[len(ENV_PREFIX):]
        target = _KEY_MAP.get(key)
        if target is None:
            continue
        section, name = target
        if section is None:
            into[name] = value
        else:
            into.setdefault(section, {})[name] = value


def load_config(
    path: Optional[Path] = None,
    *,
    environ: Optional[Mapping[str, str]] = None,
    **overrides: Any,
) -> ServiceConfig:
    """
    Build a ServiceConfig from a key-value file, the environment and overrides.

    Unknown keys are ignored. Keys in the file may be written with or without
    the ``TRIAGE_`` prefix; environment variables must carry it. Keyword
    overrides (e.g. from CLI flags) win over both.
    """
    data: dict[str, Any] = {}
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"Config file not found: {path}")
        _apply(dotenv_values(path), data)
        logger.debug("Loaded config file %s", path)

    env = os.environ if environ is None else environ
    _apply({k: v for k, v in env.items() if k.startswith(ENV_PREFIX)}, data)

    for name, value in overrides.items():
        if value is None:
            continue
        if name in BackendConfig.model_fields and name not in ServiceConfig.model_fields:
            data.setdefault("backend", {})[name] = value
        elif name in IngestionConfig.model_fields:
            data.setdefault("ingestion", {})[name] = value
        else:
            data[name] = value

    return ServiceConfig.model_validate(data)
