"""
Pydantic models for findings, developer feedback and engagement metrics.
"""

from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .diagnosis import Outcome

DEFAULT_LINK_SCHEME = "log://{bundle}/{file}#L{line}"
NOT_HELPFUL_GUIDELINE = 0.10


class FeedbackKind(str, Enum):
    """The three feedback buttons shown on a finding."""

    PLEASE_FIX = "PleaseFix"
    HELPFUL = "Helpful"
    NOT_HELPFUL = "NotHelpful"


class FindingLink(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    uri: str


class Finding(BaseModel):
    """A rendered diagnosis ready to be posted on a code change."""

    model_config = ConfigDict(frozen=True)

    finding_id: str = Field(..., min_length=1)
    bundle_id: str
    outcome: Outcome
    body_markdown: str
    links: tuple[FindingLink, ...] = ()
    created_at: datetime
    generation_latency_seconds: float = Field(default=0.0, ge=0.0)


class FeedbackEvent(BaseModel):
    """One click on a finding's feedback buttons."""

    model_config = ConfigDict(frozen=True, str_strip_whitespace=True, extra="ignore")

    finding_id: str = Field(..., min_length=1)
    kind: FeedbackKind
    user: str = Field(..., min_length=1)
    at: datetime

    @property
    def dedup_key(self) -> tuple[str, str, FeedbackKind]:
        return (self.finding_id, self.user, self.kind)


class MetricsReport(BaseModel):
    """Engagement metrics over all stored findings and feedback."""

    model_config = ConfigDict(frozen=True)

    findings_total: int = Field(default=0, ge=0)
    findings_with_feedback: int = Field(default=0, ge=0)
    pf: int = Field(default=0, ge=0)
    h: int = Field(default=0, ge=0)
    n: int = Field(default=0, ge=0)
    feedback_rate: Optional[float] = None
    helpfulness_rate: Optional[float] = None
    not_helpful_rate: Optional[float] = None
    guideline_violated: bool = False
    distinct_users: int = Field(default=0, ge=0)
    pf_users: int = Field(default=0, ge=0)
    h_users: int = Field(default=0, ge=0)
    n_users: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _rates_in_range(self) -> "MetricsReport":
        for rate in (self.feedback_rate, self.helpfulness_rate, self.not_helpful_rate):
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise ValueError("rates must lie in [0, 1]")
        return self
