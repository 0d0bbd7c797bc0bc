"""
Triage MCP - Errors

Exception hierarchy shared by the pipeline, the completion backends and the
service. Operations documented as total never raise these on data; they are
reserved for operational failures (unreadable directories, unreachable
backends, unknown findings).
"""


class TriageError(Exception):
    """Base class for all triage errors."""


class RootDirUnreadable(TriageError, OSError):
    """The bundle directory does not exist or cannot be listed."""


class BudgetTooSmall(TriageError):
    """The prompt cannot fit the token budget even with every log line dropped."""

    def __init__(self, budget_tokens: int, required_tokens: int):
        self.budget_tokens = budget_tokens
        self.required_tokens = required_tokens
        super().__init__(
            f"Token budget of {budget_tokens} is too small: template, context and "
            f"section headers alone need {required_tokens} tokens."
        )


class BackendError(TriageError):
    """Base class for completion backend failures."""

    def __init__(self, message: str, *, backend: str = "unknown"):
        self.backend = backend
        super().__init__(message)


class BackendUnavailable(BackendError, ConnectionError):
    """Network or process failure, or a replay miss."""


class BackendTimeout(BackendError, TimeoutError):
    """The backend did not answer before the configured deadline."""


class ResponseEmpty(BackendError):
    """The backend answered with no completion text."""


class UnknownFinding(TriageError, KeyError):
    """Feedback or lookup referenced a finding id that is not in the store."""

    def __init__(self, finding_id: str):
        self.finding_id = finding_id
        super().__init__(finding_id)

    def __str__(self) -> str:
        return f"Unknown finding: {self.finding_id}"
