"""
Pydantic models for completion backends.
"""

from pydantic import BaseModel, ConfigDict, Field

DEFAULT_MODEL_NAME = "flash-latest"


class LlmParams(BaseModel):
    """Sampling parameters; low temperature keeps diagnoses mostly deterministic."""

    model_config = ConfigDict(frozen=True, extra="ignore")

    temperature: float = Field(default=0.1, ge=0.0, le=2.0)
    top_p: float = Field(default=0.8, gt=0.0, le=1.0)
    model_name: str = Field(default=DEFAULT_MODEL_NAME, min_length=1)
    max_output_tokens: int = Field(default=8192, ge=1)


class RawResponse(BaseModel):
    """A completion and its accounting."""

    model_config = ConfigDict(frozen=True)

    text: str
    input_tokens: int = Field(default=0, ge=0)
    output_tokens: int = Field(default=0, ge=0)
    latency_seconds: float = Field(default=0.0, ge=0.0)
    backend: str = "unknown"
