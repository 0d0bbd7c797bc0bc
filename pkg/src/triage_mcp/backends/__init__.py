"""
Completion backends: HTTP endpoint, deterministic mock, record/replay.
"""

from typing import Optional

from ..config import BackendConfig
from .base import CompletionBackend
from .http import HttpCompletionBackend
from .mock import MockBackend, mock_diagnose
from .replay import ReplayBackend, ReplayStore


def _http_backend(config: BackendConfig) -> HttpCompletionBackend:
    return HttpCompletionBackend(
        base_url=config.base_url,
        api_key_env=config.api_key_env,
        timeout_seconds=config.timeout_seconds,
        max_retries=config.max_retries,
    )


def create_backend(config: BackendConfig) -> CompletionBackend:
    """Instantiate the backend a BackendConfig describes."""
    if config.kind == "http":
        return _http_backend(config)
    if config.kind == "replay":
        inner: Optional[CompletionBackend] = None
        if config.record:
            inner = _http_backend(config) if config.base_url else MockBackend()
        return ReplayBackend(store=ReplayStore(config.replay_dir), inner=inner)
    return MockBackend()


__all__ = [
    "CompletionBackend",
    "HttpCompletionBackend",
    "MockBackend",
    "ReplayBackend",
    "ReplayStore",
    "create_backend",
    "mock_diagnose",
]
