"""
Pydantic models for the synthetic evaluation harness.
"""

from string import ascii_lowercase
from typing import Annotated, ClassVar, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .diagnosis import Outcome


def component_names(count: int) -> list[str]:
    """Names of the generated SUT components: server-a, server-b, ..."""
    return [f"server-{ascii_lowercase[i % 26]}{i // 26 or ''}" for i in range(count)]


class ComponentCrash(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["component_crash"] = "component_crash"
    component: str

    label: ClassVar[str] = "ComponentCrash"


class StartupTimeout(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["startup_timeout"] = "startup_timeout"
    component: str

    label: ClassVar[str] = "StartupTimeout"


class AssertionFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["assertion_failure"] = "assertion_failure"
    message: str = Field(..., min_length=1)

    label: ClassVar[str] = "AssertionFailure"


class MissingDriverLog(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["missing_driver_log"] = "missing_driver_log"

    label: ClassVar[str] = "MissingDriverLog"


class MissingComponentLog(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["missing_component_log"] = "missing_component_log"
    component: str

    label: ClassVar[str] = "MissingComponentLog"


FaultKind = Annotated[
    Union[ComponentCrash, StartupTimeout, AssertionFailure, MissingDriverLog, MissingComponentLog],
    Field(discriminator="kind"),
]

FAULT_LABELS = (
    "ComponentCrash",
    "StartupTimeout",
    "AssertionFailure",
    "MissingDriverLog",
    "MissingComponentLog",
)
MISSING_LOG_LABELS = ("MissingDriverLog", "MissingComponentLog")


class CaseSpec(BaseModel):
    """Parameters of one synthetic failing test."""

    model_config = ConfigDict(frozen=True)

    components: int = Field(default=5, ge=1)
    lines_per_file: tuple[int, int] = Field(default=(200, 2000))
    noise_error_rate: float = Field(default=0.05, ge=0.0, le=1.0)
    fault: FaultKind
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "CaseSpec":
        low, high = self.lines_per_file
        if low < 1 or high < low:
            raise ValueError("lines_per_file must be a range (low, high) with 1 <= low <= high")
        culprit = getattr(self.fault, "component", None)
        if culprit is not None and culprit not in component_names(self.components):
            raise ValueError(f"fault component {culprit!r} is not one of the generated components")
        return self


class GroundTruth(BaseModel):
    """What the injected fault is and where its evidence lives."""

    model_config = ConfigDict(frozen=True)

    fault: FaultKind
    culprit_file: Optional[str] = None
    culprit_line_content: Optional[str] = None
    expect_insufficient: bool = False

    @model_validator(mode="after")
    def _insufficient_iff_missing(self) -> "GroundTruth":
        if self.expect_insufficient != (self.fault.label in MISSING_LOG_LABELS):
            raise ValueError("expect_insufficient must be set exactly for missing-log faults")
        return self


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    accurate: bool
    reason: str


class CaseResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    case_index: int
    fault: str
    seed: int
    outcome: Optional[Outcome] = None
    verdict: Verdict
    latency_seconds: float = 0.0
    link_violations: int = 0


class EvalReport(BaseModel):
    """Accuracy of the pipeline over a generated corpus."""

    model_config = ConfigDict(frozen=True)

    cases: int = Field(default=0, ge=0)
    accurate: int = Field(default=0, ge=0)
    accuracy: Optional[float] = None
    per_fault_breakdown: dict[str, float] = Field(default_factory=dict)
    per_fault_cases: dict[str, int] = Field(default_factory=dict)
    mean_latency_seconds: Optional[float] = None
    link_violations: int = 0
    results: tuple[CaseResult, ...] = ()
