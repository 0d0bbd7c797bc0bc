"""
Pydantic input models for the MCP tools.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .evaluation import FAULT_LABELS
from .finding import FeedbackKind


class DiagnoseBundleInput(BaseModel):
    """
    Input for diagnosing a failed test's log directory.

    The directory holds ``<component>.<level>`` log files and an optional
    context.json.
    """

    model_config = ConfigDict(str_strip_whitespace=True, extra="ignore")

    bundle_path: str = Field(..., min_length=1, description="Path to the bundle directory")
    budget_tokens: Optional[int] = Field(
        default=None, ge=1, description="Prompt token budget (default: configured budget)"
    )
    message_only: bool = Field(
        default=False, description="Render log lines without metadata columns to save tokens"
    )
    store: bool = Field(default=True, description="Persist the finding to the findings store")


class BuildPromptInput(BaseModel):
    """Input for building (not sending) the diagnostic prompt of a bundle."""

    model_config = ConfigDict(str_strip_whitespace=True, extra="ignore")

    bundle_path: str = Field(..., min_length=1, description="Path to the bundle directory")
    budget_tokens: Optional[int] = Field(default=None, ge=1, description="Prompt token budget")
    include_text: bool = Field(
        default=False, description="Include the full prompt text (can be very large)"
    )


class GetFindingInput(BaseModel):
    model_config = ConfigDict(str_strip_whitespace=True, extra="ignore")

    finding_id: str = Field(..., min_length=1, description="Finding ID")


class RecordFeedbackInput(BaseModel):
    """Input for recording a click on a finding's feedback buttons."""

    model_config = ConfigDict(str_strip_whitespace=True, extra="ignore")

    finding_id: str = Field(..., min_length=1, description="Finding ID")
    kind: FeedbackKind = Field(..., description="PleaseFix, Helpful or NotHelpful")
    user: str = Field(..., min_length=1, description="User token of the developer")


class RunEvaluationInput(BaseModel):
    """
    Input for running the synthetic evaluation.

    Cases cycle through the selected fault kinds.
    """

    model_config = ConfigDict(str_strip_whitespace=True, extra="ignore")

    cases: int = Field(default=10, ge=0, le=500, description="Number of generated cases")
    seed: int = Field(default=0, description="Corpus seed")
    faults: Optional[
        list[
            Literal[
                "ComponentCrash",
                "StartupTimeout",
                "AssertionFailure",
                "MissingDriverLog",
                "MissingComponentLog",
            ]
        ]
    ] = Field(default=None, description=f"Fault kinds (default: all of {', '.join(FAULT_LABELS)})")
    components: int = Field(default=5, ge=1, le=26, description="SUT components per case")
    max_lines_per_file: int = Field(
        default=500, ge=1, description="Upper bound of generated lines per component file"
    )
