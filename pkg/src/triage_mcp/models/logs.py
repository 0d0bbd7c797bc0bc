"""
Pydantic models for parsed test logs.

A failing integration test leaves a flat directory of log files behind, one
or more per component, split by level and named ``<component>.<level>``.
These types carry the parsed lines together with their provenance so that
cited lines can later be linked back to the exact file and position.
"""

from datetime import datetime
from enum import Enum, IntEnum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LogLevel(IntEnum):
    """Log level, ordered DEBUG < INFO < WARNING < ERROR < FATAL."""

    DEBUG = 10
    INFO = 20
    WARNING = 30
    ERROR = 40
    FATAL = 50

    @property
    def suffix(self) -> str:
        """File name suffix for this level, e.g. ``error``."""
        return self.name.lower()

    @classmethod
    def from_suffix(cls, suffix: str) -> Optional["LogLevel"]:
        """Level for a lowercase file suffix, or None when unrecognized."""
        if suffix != suffix.lower():
            return None
        return cls.__members__.get(suffix.upper())


class NoteKind(str, Enum):
    """Kinds of degradation recorded while ingesting a bundle."""

    MISSING_DRIVER_LOG = "MissingDriverLog"
    MISSING_COMPONENT_LOG = "MissingComponentLog"
    CORRUPT_FILE = "CorruptFile"
    UNPARSEABLE_LINE = "UnparseableLine"

    @property
    def is_missing_log(self) -> bool:
        return self in (NoteKind.MISSING_DRIVER_LOG, NoteKind.MISSING_COMPONENT_LOG)


class IngestionNote(BaseModel):
    """A degradation observed during ingestion, recorded instead of raised."""

    model_config = ConfigDict(frozen=True)

    kind: NoteKind
    file_name: Optional[str] = Field(default=None, description="File the note refers to")
    detail: str = Field(default="", description="Human readable explanation")

    @model_validator(mode="after")
    def _unparseable_needs_file(self) -> "IngestionNote":
        if self.kind is NoteKind.UNPARSEABLE_LINE and not self.file_name:
            raise ValueError("UnparseableLine notes require a file_name")
        return self

    def describe(self) -> str:
        """One-line rendering used in prompts and findings."""
        where = f" ({self.file_name})" if self.file_name else ""
        return f"{self.kind.value}{where}: {self.detail}"


class LogLine(BaseModel):
    """
    One logical log line.

    ``message`` may span several text lines when continuation lines were
    folded into it; ``raw_text`` keeps the original physical lines joined by
    newlines so the file content can be reconstructed exactly.
    """

    model_config = ConfigDict(frozen=True)

    timestamp: datetime
    datacenter: str
    process: str
    thread: str
    callsite: str
    message: str
    source_file_rank: int = Field(..., ge=0)
    line_index: int = Field(..., ge=0)
    raw_text: str

    @field_validator("message")
    @classmethod
    def _message_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("message must be non-empty after trimming")
        return value

    @property
    def sort_key(self) -> tuple[datetime, int, int]:
        """Merge key: timestamp, then owning file rank, then position."""
        return (self.timestamp, self.source_file_rank, self.line_index)

    @property
    def headline(self) -> str:
        """First text line of the message."""
        return self.message.split("\n", 1)[0]


class LogFile(BaseModel):
    """A parsed log file of one component at one level."""

    model_config = ConfigDict(frozen=True)

    file_name: str
    component: str
    level: LogLevel
    rank: int = Field(..., ge=0, description="Position of the file in bundle ordering")
    lines: tuple[LogLine, ...] = ()
    is_driver: bool = False
    ends_with_newline: bool = False

    @model_validator(mode="after")
    def _check_consistency(self) -> "LogFile":
        if self.file_name != f"{self.component}.{self.level.suffix}":
            raise ValueError(
                f"file_name {self.file_name!r} does not match component {self.component!r} "
                f"and level {self.level.suffix!r}"
            )
        if "." in self.component:
            raise ValueError("component names may not contain dots")
        for position, line in enumerate(self.lines):
            if line.line_index != position:
                raise ValueError(f"line_index {line.line_index} out of order at {position}")
            if line.source_file_rank != self.rank:
                raise ValueError("every line must carry the owning file's rank")
        return self

    def render_text(self) -> str:
        """Reconstruct the retained file content from the physical lines."""
        text = "\n".join(line.raw_text for line in self.lines)
        if self.ends_with_newline and self.lines:
            text += "\n"
        return text


class LogBundle(BaseModel):
    """
    All log files of one failing test execution.

    Files are ordered driver files first, then component files, each group
    in lexicographic file name order.
    """

    model_config = ConfigDict(frozen=True)

    bundle_id: str
    files: tuple[LogFile, ...] = ()
    ingestion_notes: tuple[IngestionNote, ...] = ()

    @model_validator(mode="after")
    def _check_files(self) -> "LogBundle":
        names = [f.file_name for f in self.files]
        if len(set(names)) != len(names):
            raise ValueError("file names must be unique within a bundle")
        ranks = [f.rank for f in self.files]
        if len(set(ranks)) != len(ranks):
            raise ValueError("file ranks must be unique within a bundle")
        expected = sorted(self.files, key=lambda f: (not f.is_driver, f.file_name))
        if [f.file_name for f in expected] != names:
            raise ValueError("files must be ordered drivers first, then by file name")
        return self

    def get_file(self, file_name: str) -> Optional[LogFile]:
        for log_file in self.files:
            if log_file.file_name == file_name:
                return log_file
        return None

    @property
    def components(self) -> set[str]:
        return {f.component for f in self.files}

    @property
    def has_driver(self) -> bool:
        return any(f.is_driver for f in self.files)

    @property
    def line_count(self) -> int:
        return sum(len(f.lines) for f in self.files)
