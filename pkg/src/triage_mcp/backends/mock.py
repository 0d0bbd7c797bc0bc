"""
Deterministic rule-based stand-in for the model.

It follows the prompt's contract closely enough for hermetic end-to-end
runs: it refuses to conclude when logs are missing, otherwise it follows the
driver's report of which component failed and cites that component's last
error lines in the exact output grammar.
"""

import logging
import time
from datetime import datetime
from typing import Optional, Sequence

from ..ingestion import (
    ParsedLine,
    format_timestamp,
    parse_log_line,
    referenced_failed_components,
)
from ..models.backend import LlmParams, RawResponse
from ..models.diagnosis import CitedLogLine, Diagnosis
from ..models.logs import IngestionNote, LogLevel
from ..models.prompt import DiagnosisPrompt, LogSection, SectionedLogs, SectionEntry
from ..parser import render_diagnosis
from ..prompting import estimate_tokens

logger = logging.getLogger(__name__)

MAX_CITED_LINES = 3
BENIGN_MARKERS = ("recovered", "retry succeeded", "sigint")

_Candidate = tuple[LogSection, SectionEntry]


def _is_benign(text: str) -> bool:
    lowered = text.lower()
    return any(marker in lowered for marker in BENIGN_MARKERS)


def _order(candidate: _Candidate) -> tuple[datetime, int, int]:
    section, entry = candidate
    return (entry.timestamp or datetime.min, section.rank or 0, entry.line_index or 0)


def _cite(section: LogSection, entry: SectionEntry) -> CitedLogLine:
    first_line = entry.text.split("\n", 1)[0]
    parsed = parse_log_line(first_line)
    if isinstance(parsed, ParsedLine):
        return CitedLogLine(
            log_file_name=section.file_name or "",
            timestamp=parsed.timestamp,
            callsite=parsed.callsite,
            content=parsed.message.strip(),
        )
    content = first_line
    if entry.timestamp is not None:
        content = content.removeprefix(format_timestamp(entry.timestamp) + " ")
    return CitedLogLine(
        log_file_name=section.file_name or "",
        timestamp=entry.timestamp,
        content=content.strip(),
    )


def _lines(
    sections: Sequence[LogSection], min_level: Optional[LogLevel] = None
) -> list[_Candidate]:
    found = [
        (section, entry)
        for section in sections
        if min_level is None or (section.level is not None and section.level >= min_level)
        for entry in section.entries
        if not _is_benign(entry.text)
    ]
    return sorted(found, key=_order)


def _insufficient(sectioned: SectionedLogs, missing: list[IngestionNote]) -> Diagnosis:
    scanned = ", ".join(sectioned.file_names) or "none"
    problems = "\n".join(f"   - {note.describe()}" for note in missing)
    steps = (
        f"1. Scanned the log sections: {scanned}.\n"
        f"2. The logs needed to diagnose this failure were not collected:\n{problems}\n"
        "3. I need access to those logs and must not draw any conclusion from the "
        "information I have."
    )
    return Diagnosis(investigation_steps=steps)


def mock_diagnose(
    prompt_sections: SectionedLogs, notes: Sequence[IngestionNote] = ()
) -> RawResponse:
    """Produce a grammar-conforming diagnosis from the prompt sections."""
    started = time.perf_counter()
    missing = [note for note in notes if note.kind.is_missing_log]
    file_sections = prompt_sections.file_sections

    if missing:
        diagnosis = _insufficient(prompt_sections, missing)
    else:
        driver_text = (
            entry.text
            for section in file_sections
            if section.is_driver
            for entry in section.entries
        )
        failed = [
            name
            for name in referenced_failed_components(driver_text)
            if any(s.component == name for s in file_sections)
        ]
        steps = [f"1. Scanned the log sections: {', '.join(prompt_sections.file_names) or 'none'}."]
        if failed:
            component = failed[0]
            own = [s for s in file_sections if s.component == component]
            cited_candidates = _lines(own, LogLevel.ERROR)[-MAX_CITED_LINES:]
            steps.append(f"2. The test driver reports that component {component} failed.")
            if cited_candidates:
                steps.append(f"3. Inspected the error lines of {component}.")
            else:
                cited_candidates = _lines(own)[-1:]
                steps.append(
                    f"3. {component} logged no errors; inspected the last line it logged."
                )
        else:
            cited_candidates = _lines(file_sections, LogLevel.ERROR)[-1:]
            steps.append("2. The test driver does not name a failed component.")
            steps.append("3. Inspected the last error line across all sections.")

        cited = [_cite(section, entry) for section, entry in cited_candidates]
        if not cited:
            diagnosis = Diagnosis(
                investigation_steps="\n".join(steps)
                + "\n4. There is not enough information in the logs to find a root cause."
            )
        else:
            last = cited[-1]
            steps.append("4. Concluded from the cited lines.")
            diagnosis = Diagnosis(
                conclusion=(
                    f"The failure originates in {last.log_file_name}: {last.content}"
                ),
                investigation_steps="\n".join(steps),
                cited_lines=tuple(cited),
            )

    text = render_diagnosis(diagnosis)
    return RawResponse(
        text=text,
        input_tokens=estimate_tokens(prompt_sections.render()),
        output_tokens=estimate_tokens(text),
        latency_seconds=time.perf_counter() - started,
        backend="mock",
    )


class MockBackend:
    """Completion backend that answers with mock_diagnose."""

    name = "mock"

    async def complete(self, prompt: DiagnosisPrompt, params: LlmParams) -> RawResponse:
        if not prompt.text.strip():
            raise ValueError("prompt must not be empty")
        response = mock_diagnose(prompt.sectioned, prompt.sectioned.notes)
        return response.model_copy(update={"input_tokens": prompt.estimated_tokens})
