"""
Triage MCP - Merging

Level filtering, the timestamp-ordered merge of all files of a bundle and
the per-file sections that go into the prompt.
"""

import heapq
from typing import Callable

from pydantic import BaseModel, ConfigDict

from .ingestion import format_timestamp
from .models.logs import LogBundle, LogLevel, LogLine
from .models.prompt import (
    FILE_HEADER_FORMAT,
    NOTES_HEADER,
    LogSection,
    SectionedLogs,
    SectionEntry,
)

LineRenderer = Callable[[LogLine], str]


def render_raw(line: LogLine) -> str:
    """The original physical text of the line, continuations included."""
    return line.raw_text


def render_message(line: LogLine) -> str:
    """Timestamp and message only; drops datacenter, process, thread and callsite."""
    return f"{format_timestamp(line.timestamp)} {line.message}"


class MergedStream(BaseModel):
    """All lines of a bundle in (timestamp, file rank, line index) order."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[tuple[str, LogLine], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)


def filter_by_level(bundle: LogBundle, min_level: LogLevel) -> LogBundle:
    """Keep only files at or above min_level; notes are preserved."""
    kept = tuple(f for f in bundle.files if f.level >= min_level)
    if len(kept) == len(bundle.files):
        return bundle
    return bundle.model_copy(update={"files": kept})


def merge_streams(bundle: LogBundle) -> MergedStream:
    """
    Stable k-way merge of every file's lines.

    Each file is already ordered by line_index but not necessarily by
    timestamp, so each one is sorted by the merge key first; ties on the
    second-resolution timestamps are broken by file rank, then line index.
    """
    streams = [
        sorted(((f.file_name, line) for line in f.lines), key=lambda item: item[1].sort_key)
        for f in bundle.files
    ]
    merged = heapq.merge(*streams, key=lambda item: item[1].sort_key)
    return MergedStream.model_construct(entries=tuple(merged))


def assemble_sections(bundle: LogBundle, render: LineRenderer = render_raw) -> SectionedLogs:
    """
    One section per file in bundle order, then a notes section when the
    bundle carries ingestion notes.
    """
    sections = [
        LogSection(
            header=FILE_HEADER_FORMAT.format(file_name=f.file_name),
            file_name=f.file_name,
            component=f.component,
            level=f.level,
            rank=f.rank,
            is_driver=f.is_driver,
            entries=tuple(
                SectionEntry(
                    text=render(line), line_index=line.line_index, timestamp=line.timestamp
                )
                for line in f.lines
            ),
        )
        for f in bundle.files
    ]
    if bundle.ingestion_notes:
        sections.append(
            LogSection(
                header=NOTES_HEADER,
                entries=tuple(
                    SectionEntry(text=note.describe()) for note in bundle.ingestion_notes
                ),
            )
        )
    return SectionedLogs(sections=tuple(sections), notes=bundle.ingestion_notes)
