"""
Completion backend interface.

A backend turns a DiagnosisPrompt into a RawResponse. Implementations must
be safe for concurrent ``complete`` calls.
"""

from typing import Protocol, runtime_checkable

from ..models.backend import LlmParams, RawResponse
from ..models.prompt import DiagnosisPrompt


@runtime_checkable
class CompletionBackend(Protocol):
    """Single-turn text completion."""

    name: str

    async def complete(self, prompt: DiagnosisPrompt, params: LlmParams) -> RawResponse:
        """
        Complete the prompt.

        Raises:
            BackendUnavailable: network or process failure, or a replay miss
            BackendTimeout: no answer before the configured deadline
            ResponseEmpty: the answer had no text
        """
        ...
