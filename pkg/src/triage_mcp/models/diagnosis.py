"""
Pydantic models for parsed diagnoses.
"""

from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class Outcome(str, Enum):
    """How a diagnosis ended."""

    CONCLUSIVE = "Conclusive"
    INSUFFICIENT_INFORMATION = "InsufficientInformation"
    UNPARSEABLE = "Unparseable"


class CitedLogLine(BaseModel):
    """A log line the model named as relevant to the root cause."""

    model_config = ConfigDict(frozen=True, str_strip_whitespace=True)

    log_file_name: str = Field(..., min_length=1)
    timestamp: Optional[datetime] = None
    callsite: Optional[str] = None
    content: str = Field(..., min_length=1)


class Diagnosis(BaseModel):
    """
    The model response split along its three output headers.

    ``conclusion`` is None exactly when no conclusion header was found.
    ``preamble`` keeps any text before the first header.
    """

    model_config = ConfigDict(frozen=True)

    preamble: Optional[str] = None
    conclusion: Optional[str] = None
    investigation_steps: Optional[str] = None
    cited_lines: tuple[CitedLogLine, ...] = ()
    parse_warnings: tuple[str, ...] = ()


class LineLocation(BaseModel):
    """A concrete (file, line) position inside a bundle."""

    model_config = ConfigDict(frozen=True)

    file_name: str
    line_index: int = Field(..., ge=0)


class CitationResolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    citation: CitedLogLine
    location: Optional[LineLocation] = None

    @property
    def resolved(self) -> bool:
        return self.location is not None


class ResolvedDiagnosis(BaseModel):
    """A diagnosis whose citations were matched against the bundle."""

    model_config = ConfigDict(frozen=True)

    diagnosis: Diagnosis
    resolutions: tuple[CitationResolution, ...] = ()
    outcome: Outcome
