"""
Record/replay backend for deterministic tests and regression corpora.

Recordings are JSON files named by the SHA-256 of the prompt text, so the
same prompt always maps to the same recording.
"""

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..errors import BackendUnavailable
from ..models.backend import LlmParams, RawResponse
from ..models.prompt import DiagnosisPrompt
from .base import CompletionBackend

logger = logging.getLogger(__name__)


def prompt_key(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


class ReplayStore:
    """Directory of recorded responses keyed by prompt hash."""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self._lock = threading.Lock()

    def path_for(self, prompt_text: str) -> Path:
        return self.directory / f"{prompt_key(prompt_text)}.json"

    def record(self, prompt_text: str, response: RawResponse) -> Path:
        path = self.path_for(prompt_text)
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            path.write_text(response.model_dump_json(indent=2), encoding="utf-8")
        logger.debug("Recorded response %s", path.name)
        return path

    def replay(self, prompt_text: str) -> RawResponse:
        path = self.path_for(prompt_text)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise BackendUnavailable(
                f"no recording for prompt {path.stem[:12]} in {self.directory}", backend="replay"
            ) from e
        return RawResponse.model_validate(data)

    def __contains__(self, prompt_text: str) -> bool:
        return self.path_for(prompt_text).is_file()


@dataclass
class ReplayBackend:
    """
    Serve recorded responses. With ``inner`` set, a miss is forwarded to the
    inner backend and its answer recorded.
    """

    store: ReplayStore
    inner: Optional[CompletionBackend] = field(default=None)
    name: str = "replay"

    async def complete(self, prompt: DiagnosisPrompt, params: LlmParams) -> RawResponse:
        if not prompt.text.strip():
            raise ValueError("prompt must not be empty")
        if self.inner is None or prompt.text in self.store:
            return self.store.replay(prompt.text)
        response = await self.inner.complete(prompt, params)
        self.store.record(prompt.text, response)
        return response
