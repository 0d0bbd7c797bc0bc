"""
Pydantic models for prompt assembly: per-file log sections, component
context, the versioned template and the final prompt.
"""

from datetime import datetime
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .logs import IngestionNote, LogLevel

LOGS_MARKER = "<LOGS=>"
CONTEXT_MARKER = "<CONTEXT=>"
CONCLUSION_HEADER = "==Conclusion=="
STEPS_HEADER = "==Investigation Steps=="
CITED_LINES_HEADER = "==Most Relevant Log Lines=="
OUTPUT_HEADERS = (CONCLUSION_HEADER, STEPS_HEADER, CITED_LINES_HEADER)

FILE_HEADER_FORMAT = "== FILE: {file_name} =="
NOTES_HEADER = "== INGESTION NOTES =="
TRUNCATION_MARKER_FORMAT = "[... {count} lines truncated ...]"


class SectionEntry(BaseModel):
    """One rendered line of a section body."""

    model_config = ConfigDict(frozen=True)

    text: str
    line_index: Optional[int] = None
    timestamp: Optional[datetime] = None


class LogSection(BaseModel):
    """
    A prompt section: a header naming the file and the rendered lines.

    The ingestion notes section has no file_name and is never truncated.
    """

    model_config = ConfigDict(frozen=True)

    header: str
    file_name: Optional[str] = None
    component: Optional[str] = None
    level: Optional[LogLevel] = None
    rank: Optional[int] = None
    is_driver: bool = False
    entries: tuple[SectionEntry, ...] = ()
    dropped: int = Field(default=0, ge=0, description="Lines removed by truncation")

    @property
    def is_notes(self) -> bool:
        return self.file_name is None

    @property
    def body_lines(self) -> list[str]:
        lines = [entry.text for entry in self.entries]
        if self.dropped:
            lines.insert(0, TRUNCATION_MARKER_FORMAT.format(count=self.dropped))
        return lines

    @property
    def body(self) -> str:
        return "\n".join(self.body_lines)

    def render(self) -> str:
        return "\n".join([self.header, *self.body_lines])


class SectionedLogs(BaseModel):
    """Ordered prompt sections, driver files first, notes section last."""

    model_config = ConfigDict(frozen=True)

    sections: tuple[LogSection, ...] = ()
    notes: tuple[IngestionNote, ...] = ()

    def render(self) -> str:
        return "\n\n".join(section.render() for section in self.sections)

    @property
    def total_chars(self) -> int:
        return len(self.render())

    @property
    def file_sections(self) -> tuple[LogSection, ...]:
        return tuple(s for s in self.sections if not s.is_notes)

    @property
    def file_names(self) -> list[str]:
        return [s.file_name for s in self.file_sections if s.file_name]

    def section_for(self, file_name: str) -> Optional[LogSection]:
        for section in self.file_sections:
            if section.file_name == file_name:
                return section
        return None


class ContextEntry(BaseModel):
    """Metadata about one SUT component."""

    model_config = ConfigDict(frozen=True, str_strip_whitespace=True)

    component: str = Field(..., min_length=1, description="Component name")
    description: str = Field(default="", description="What the component does")
    command_line: str = Field(default="", description="Arguments the component was started with")


class ComponentContext(BaseModel):
    """Component metadata rendered under the context slot of the prompt."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[ContextEntry, ...] = ()

    @field_validator("entries")
    @classmethod
    def _unique_components(cls, entries: tuple[ContextEntry, ...]) -> tuple[ContextEntry, ...]:
        names = [entry.component for entry in entries]
        if len(set(names)) != len(names):
            raise ValueError("context components must be unique")
        return entries

    def render(self) -> str:
        return "\n\n".join(
            f"component: {entry.component}\n"
            f"description: {entry.description}\n"
            f"args: {entry.command_line}"
            for entry in self.entries
        )


class PromptTemplate(BaseModel):
    """The diagnostic prompt with a logs slot and a context slot."""

    model_config = ConfigDict(frozen=True)

    template_text: str
    version: str = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_markers(self) -> "PromptTemplate":
        for marker in (LOGS_MARKER, CONTEXT_MARKER):
            if self.template_text.count(marker) != 1:
                raise ValueError(f"template must contain {marker} exactly once")
        for header in OUTPUT_HEADERS:
            if self.template_text.count(header) != 1:
                raise ValueError(f"template must contain {header} exactly once")
        if self.template_text.index(LOGS_MARKER) > self.template_text.index(CONTEXT_MARKER):
            raise ValueError(f"{LOGS_MARKER} must precede {CONTEXT_MARKER}")
        return self

    def fill(self, logs: str, context: str) -> str:
        """Insert the rendered logs and context right after their markers."""
        head, _, rest = self.template_text.partition(LOGS_MARKER)
        middle, _, tail = rest.partition(CONTEXT_MARKER)
        return f"{head}{LOGS_MARKER}\n{logs}{middle}{CONTEXT_MARKER}\n{context}{tail}"


class DiagnosisPrompt(BaseModel):
    """The fully assembled prompt with token accounting."""

    model_config = ConfigDict(frozen=True)

    text: str
    estimated_tokens: int = Field(..., ge=0)
    truncated: bool = False
    sections_included: tuple[str, ...] = ()
    budget_tokens: int = Field(..., gt=0)
    template_version: str = ""
    sectioned: SectionedLogs = Field(default_factory=SectionedLogs, repr=False)

    @model_validator(mode="after")
    def _within_budget(self) -> "DiagnosisPrompt":
        if self.estimated_tokens > self.budget_tokens:
            raise ValueError("estimated_tokens exceeds the budget")
        return self
