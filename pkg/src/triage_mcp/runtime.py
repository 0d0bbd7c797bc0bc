"""
Triage MCP - Process-wide runtime

Lazily built config, backend and store shared by the MCP tools.
"""

import logging
from typing import Optional

from .backends import CompletionBackend, create_backend
from .config import ServiceConfig, load_config
from .findings import FeedbackStore

logger = logging.getLogger(__name__)

_config: Optional[ServiceConfig] = None
_backend: Optional[CompletionBackend] = None
_store: Optional[FeedbackStore] = None


def get_config() -> ServiceConfig:
    """Get the global config, loading it from the environment on first use."""
    global _config
    if _config is None:
        _config = load_config()
    return _config


def get_backend() -> CompletionBackend:
    global _backend
    if _backend is None:
        _backend = create_backend(get_config().backend)
        logger.info("Using %s completion backend", _backend.name)
    return _backend


def get_store() -> FeedbackStore:
    global _store
    if _store is None:
        _store = FeedbackStore.from_config(get_config())
    return _store


def configure(
    config: Optional[ServiceConfig] = None,
    *,
    backend: Optional[CompletionBackend] = None,
    store: Optional[FeedbackStore] = None,
) -> None:
    """Replace the global runtime; unspecified parts are rebuilt lazily."""
    global _config, _backend, _store
    _config, _backend, _store = config, backend, store
