"""
Triage MCP - HTTP Completion Backend

Client for a generic single-turn completion endpoint.
Features:
- Credential from an environment variable named in config
- Overall deadline per completion (retries included)
- Exponential backoff retries on connection failures and 5xx/429 answers
- Descriptive errors from the common error body shapes

Request body:  {"model", "temperature", "top_p", "max_output_tokens", "prompt"}
Response body: {"text": ..., "usage": {"input_tokens": ..., "output_tokens": ...}}
"""

import asyncio
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import httpx

from ..config import DEFAULT_API_KEY_ENV
from ..errors import BackendError, BackendTimeout, BackendUnavailable, ResponseEmpty
from ..models.backend import LlmParams, RawResponse
from ..models.prompt import DiagnosisPrompt
from ..prompting import estimate_tokens

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 120.0  # seconds
DEFAULT_BACKOFF = 0.5  # seconds, doubled per retry
RETRYABLE_STATUS = {429, 500, 502, 503, 504}


def _token_count(usage: dict[str, Any], key: str, estimate: int) -> int:
    """Reported token count, or the estimate when it is missing or not a count."""
    value = usage.get(key)
    if value is None:
        return estimate
    try:
        count = int(value)
    except (TypeError, ValueError, OverflowError):
        count = -1
    if count < 0 or isinstance(value, bool):
        logger.warning("Ignoring invalid usage.%s %r; using estimate %d", key, value, estimate)
        return estimate
    return count


@dataclass
class HttpCompletionBackend:
    """
    Completion backend speaking JSON over HTTP.

    The API key is taken from the environment variable named by
    ``api_key_env`` unless set explicitly.
    """

    base_url: str
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout_seconds: float = DEFAULT_TIMEOUT
    max_retries: int = 2
    backoff_seconds: float = DEFAULT_BACKOFF
    transport: Optional[httpx.AsyncBaseTransport] = field(default=None, repr=False)
    _api_key: Optional[str] = field(default=None, repr=False)
    name: str = "http"

    def __post_init__(self):
        if not self._api_key:
            self._api_key = os.environ.get(self.api_key_env)

    async def complete(self, prompt: DiagnosisPrompt, params: LlmParams) -> RawResponse:
        """Complete the prompt within timeout_seconds, retrying connection failures."""
        if not prompt.text.strip():
            raise ValueError("prompt must not be empty")
        try:
            return await asyncio.wait_for(
                self._complete_with_retries(prompt, params), timeout=self.timeout_seconds
            )
        except BackendTimeout:
            raise
        except asyncio.TimeoutError as e:
            raise BackendTimeout(
                f"Completion did not finish within {self.timeout_seconds}s (retries included).",
                backend=self.name,
            ) from e

    async def _complete_with_retries(
        self, prompt: DiagnosisPrompt, params: LlmParams
    ) -> RawResponse:
        attempt = 0
        while True:
            try:
                return await self._request(prompt, params)
            except BackendUnavailable as e:
                if attempt >= self.max_retries:
                    raise
                delay = self.backoff_seconds * (2**attempt)
                attempt += 1
                logger.warning(
                    "Completion attempt %d failed (%s); retrying in %.1fs", attempt, e, delay
                )
                await asyncio.sleep(delay)

    async def _request(self, prompt: DiagnosisPrompt, params: LlmParams) -> RawResponse:
        body = {
            "model": params.model_name,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_output_tokens": params.max_output_tokens,
            "prompt": prompt.text,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"} if self._api_key else {}

        started = time.perf_counter()
        client = httpx.AsyncClient(timeout=self.timeout_seconds, transport=self.transport)
        async with client:
            try:
                response = await client.post(self.base_url, json=body, headers=headers)
            except httpx.TimeoutException as e:
                raise BackendTimeout(
                    f"Request to {self.base_url} timed out after {self.timeout_seconds}s.",
                    backend=self.name,
                ) from e
            except httpx.RequestError as e:
                raise BackendUnavailable(
                    f"Failed to connect to completion endpoint: {e}", backend=self.name
                ) from e
        latency = time.perf_counter() - started

        if response.status_code in RETRYABLE_STATUS:
            raise BackendUnavailable(self._parse_error(response), backend=self.name)
        if response.status_code >= 400:
            raise BackendError(self._parse_error(response), backend=self.name)

        try:
            data = response.json()
        except ValueError as e:
            raise BackendError(
                f"Completion endpoint returned non-JSON body: {response.text[:200]}",
                backend=self.name,
            ) from e

        text = data.get("text") if isinstance(data, dict) else None
        if not isinstance(text, str) or not text.strip():
            raise ResponseEmpty("Completion endpoint returned no text.", backend=self.name)

        usage = data.get("usage")
        if not isinstance(usage, dict):
            usage = {}
        return RawResponse(
            text=text,
            input_tokens=_token_count(usage, "input_tokens", prompt.estimated_tokens),
            output_tokens=_token_count(usage, "output_tokens", estimate_tokens(text)),
            latency_seconds=latency,
            backend=self.name,
        )

    def _parse_error(self, response: httpx.Response) -> str:
        """Parse error response and return descriptive message."""
        try:
            data = response.json()

            if isinstance(data, dict):
                if "error" in data:
                    error = data["error"]
                    if isinstance(error, dict):
                        return error.get("message", str(error))
                    return str(error)

                if "message" in data:
                    return data["message"]

                if "detail" in data:
                    return data["detail"]

            return f"HTTP {response.status_code}: {response.text[:200]}"

        except Exception:
            return f"HTTP {response.status_code}: {response.text[:200]}"
