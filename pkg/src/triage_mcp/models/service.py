"""
Pydantic models for service-level statistics.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .backend import RawResponse
from .diagnosis import Outcome, ResolvedDiagnosis
from .finding import Finding
from .logs import LogBundle
from .prompt import DiagnosisPrompt


class LatencyStats(BaseModel):
    """Nearest-rank percentiles of pipeline latency, in seconds."""

    model_config = ConfigDict(frozen=True)

    count: int = Field(default=0, ge=0)
    p50: Optional[float] = None
    p90: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self) -> "LatencyStats":
        if self.count and (self.p50 is None or self.p90 is None or self.p50 > self.p90):
            raise ValueError("p50 and p90 must be present and ordered when count > 0")
        return self


class UsageStats(BaseModel):
    """Mean input sizes and token usage per pipeline run."""

    model_config = ConfigDict(frozen=True)

    runs: int = Field(default=0, ge=0)
    mean_log_files: Optional[float] = None
    mean_log_lines: Optional[float] = None
    mean_input_tokens: Optional[float] = None
    mean_output_tokens: Optional[float] = None


class PipelineRun(BaseModel):
    """Everything one end-to-end diagnosis produced."""

    model_config = ConfigDict(frozen=True)

    bundle: LogBundle
    prompt: DiagnosisPrompt
    response: RawResponse
    resolved: ResolvedDiagnosis
    finding: Finding
    latency_seconds: float = Field(default=0.0, ge=0.0)

    @property
    def outcome(self) -> Outcome:
        return self.resolved.outcome

    @property
    def log_files(self) -> int:
        return len(self.bundle.files)

    @property
    def log_lines(self) -> int:
        return self.bundle.line_count

    @property
    def input_tokens(self) -> int:
        return self.response.input_tokens

    @property
    def output_tokens(self) -> int:
        return self.response.output_tokens
