"""
Triage MCP - Diagnosis Parser

Parses model responses against the output grammar requested by the prompt:

    ==Conclusion==
    <text>

    ==Investigation Steps==
    <text>

    ==Most Relevant Log Lines==
    - log-file-name: server-a.error
    - timestamp: 2025-09-17-16:59:41
    - callsite: file2.py:41
    **content**: Server encountered an error, shutting down

Model output drifts, so headers are matched leniently (markdown heading or
bold decoration, surrounding whitespace) and malformed citation groups are
recorded as warnings instead of failing the parse.
"""

import logging
import re
from typing import Optional, Union

from .ingestion import format_timestamp, parse_timestamp
from .models.backend import RawResponse
from .models.diagnosis import (
    CitationResolution,
    CitedLogLine,
    Diagnosis,
    LineLocation,
    Outcome,
    ResolvedDiagnosis,
)
from .models.logs import LogBundle, LogLine
from .models.prompt import CITED_LINES_HEADER, CONCLUSION_HEADER, STEPS_HEADER

logger = logging.getLogger(__name__)

_HEADER_RE = re.compile(
    r"^\s*(?:#+\s*)?(?:\*\*)?\s*==\s*"
    r"(?P<name>conclusion|investigation steps|most relevant log lines)"
    r"\s*==\s*(?:\*\*)?\s*:?\s*$",
    re.IGNORECASE,
)
_FIELD_RE = re.compile(
    r"^\s*(?:[-*]\s+)?(?:\*\*)?(?P<key>log-file-name|timestamp|callsite|content)(?:\*\*)?"
    r"\s*:(?:\*\*)?\s*(?P<value>.*?)\s*$",
    re.IGNORECASE,
)

_CONCLUSION = "conclusion"
_STEPS = "investigation steps"
_CITED = "most relevant log lines"

INSUFFICIENT_PHRASES = ("need access", "not enough information", "must not draw any conclusion")


def _clean_value(value: str) -> str:
    return value.strip().strip("`").strip()


def _parse_cited_block(lines: list[str], warnings: list[str]) -> list[CitedLogLine]:
    cited: list[CitedLogLine] = []
    group: dict[str, str] = {}

    def finish() -> None:
        if not group:
            return
        name = group.get("log-file-name", "")
        content = group.get("content", "")
        if not name or not content:
            missing = "log-file-name" if not name else "content"
            warnings.append(f"incomplete log line group without {missing}: {group}")
            group.clear()
            return
        timestamp = None
        raw_ts = group.get("timestamp", "")
        if raw_ts:
            timestamp = parse_timestamp(raw_ts)
            if timestamp is None:
                warnings.append(f"unparseable timestamp {raw_ts!r} for {name}")
        cited.append(
            CitedLogLine(
                log_file_name=name,
                timestamp=timestamp,
                callsite=group.get("callsite") or None,
                content=content,
            )
        )
        group.clear()

    for line in lines:
        match = _FIELD_RE.match(line)
        if match is None:
            if line.strip():
                warnings.append(f"unrecognized line in log lines block: {line.strip()[:80]!r}")
            continue
        key = match.group("key").lower()
        value = _clean_value(match.group("value"))
        if key == "log-file-name" and group:
            finish()
        if key in group:
            warnings.append(f"repeated field {key!r} in log line group")
        group[key] = value
    finish()
    return cited


def parse_response(raw: Union[RawResponse, str]) -> Diagnosis:
    """
    Split a response on the three output headers. Never raises.

    Text before the first header is kept as the preamble. A response with no
    recognizable header yields an empty Diagnosis with a warning.
    """
    text = raw.text if isinstance(raw, RawResponse) else raw
    blocks: dict[str, list[str]] = {}
    preamble: list[str] = []
    warnings: list[str] = []
    current: Optional[list[str]] = None

    for line in text.split("\n"):
        match = _HEADER_RE.match(line)
        if match:
            name = match.group("name").lower()
            if name in blocks:
                warnings.append(f"duplicate header {name!r}; sections merged")
            current = blocks.setdefault(name, [])
            continue
        (preamble if current is None else current).append(line)

    if not blocks:
        warnings.append("no headers found")

    def block_text(name: str) -> Optional[str]:
        if name not in blocks:
            return None
        return "\n".join(blocks[name]).strip()

    cited = _parse_cited_block(blocks.get(_CITED, []), warnings)
    preamble_text = "\n".join(preamble).strip()
    return Diagnosis(
        preamble=preamble_text or None,
        conclusion=block_text(_CONCLUSION),
        investigation_steps=block_text(_STEPS),
        cited_lines=tuple(cited),
        parse_warnings=tuple(warnings),
    )


def render_citation(cited: CitedLogLine) -> str:
    timestamp = f" {format_timestamp(cited.timestamp)}" if cited.timestamp else ""
    callsite = f" {cited.callsite}" if cited.callsite else ""
    return (
        f"- log-file-name: {cited.log_file_name}\n"
        f"- timestamp:{timestamp}\n"
        f"- callsite:{callsite}\n"
        f"**content**: {cited.content}"
    )


def render_diagnosis(diagnosis: Diagnosis) -> str:
    """Render a diagnosis back into the output grammar (canonical form)."""
    parts: list[str] = []
    if diagnosis.preamble:
        parts.append(diagnosis.preamble)
    if diagnosis.conclusion is not None:
        parts.append(f"{CONCLUSION_HEADER}\n{diagnosis.conclusion}")
    if diagnosis.investigation_steps is not None:
        parts.append(f"{STEPS_HEADER}\n{diagnosis.investigation_steps}")
    cited = "\n\n".join(render_citation(c) for c in diagnosis.cited_lines)
    parts.append(f"{CITED_LINES_HEADER}\n{cited}")
    return "\n\n".join(parts).rstrip() + "\n"


def normalize_response(text: str) -> str:
    """Strip trailing whitespace per line and at the end, as render_diagnosis does."""
    return "\n".join(line.rstrip() for line in text.split("\n")).rstrip() + "\n"


def classify_outcome(diagnosis: Diagnosis) -> Outcome:
    """Total classification of a parsed diagnosis."""
    if diagnosis.conclusion is not None and diagnosis.cited_lines:
        return Outcome.CONCLUSIVE
    if diagnosis.conclusion is None:
        body = "\n".join(filter(None, [diagnosis.preamble, diagnosis.investigation_steps])).lower()
        if any(phrase in body for phrase in INSUFFICIENT_PHRASES):
            return Outcome.INSUFFICIENT_INFORMATION
    return Outcome.UNPARSEABLE


def line_contains(line: LogLine, content: str) -> bool:
    return content in line.message or content in line.raw_text


def _pick_line(candidates: list[LogLine], cited: CitedLogLine) -> LogLine:
    if cited.timestamp is not None:
        same_time = [c for c in candidates if c.timestamp == cited.timestamp]
        candidates = same_time or candidates
    if cited.callsite:
        same_site = [c for c in candidates if c.callsite == cited.callsite]
        if not same_site:
            same_site = [c for c in candidates if c.callsite.endswith(cited.callsite)]
        candidates = same_site or candidates
    return min(candidates, key=lambda c: c.line_index)


def resolve_citations(diagnosis: Diagnosis, bundle: LogBundle) -> ResolvedDiagnosis:
    """
    Match each citation to a concrete line of the bundle.

    The file must match by exact name and the cited content must be a
    substring of the line. Ties are broken by timestamp, then callsite, then
    the earliest line. Unmatched citations stay unresolved with a warning.
    """
    warnings = list(diagnosis.parse_warnings)
    resolutions: list[CitationResolution] = []
    for cited in diagnosis.cited_lines:
        log_file = bundle.get_file(cited.log_file_name)
        if log_file is None:
            warnings.append(f"cited file {cited.log_file_name!r} is not in the bundle")
            resolutions.append(CitationResolution(citation=cited))
            continue
        candidates = [line for line in log_file.lines if line_contains(line, cited.content)]
        if not candidates:
            warnings.append(
                f"cited content not found in {cited.log_file_name}: {cited.content[:80]!r}"
            )
            resolutions.append(CitationResolution(citation=cited))
            continue
        line = _pick_line(candidates, cited)
        resolutions.append(
            CitationResolution(
                citation=cited,
                location=LineLocation(file_name=log_file.file_name, line_index=line.line_index),
            )
        )

    updated = diagnosis.model_copy(update={"parse_warnings": tuple(warnings)})
    outcome = classify_outcome(updated)
    unresolved = sum(1 for r in resolutions if not r.resolved)
    if unresolved:
        logger.warning("%d of %d citations could not be resolved", unresolved, len(resolutions))
    return ResolvedDiagnosis(diagnosis=updated, resolutions=tuple(resolutions), outcome=outcome)


def citation_is_sound(bundle: LogBundle, resolution: CitationResolution) -> bool:
    """True when the resolved location exists and its line contains the cited content."""
    if resolution.location is None:
        return True
    log_file = bundle.get_file(resolution.location.file_name)
    if log_file is None or resolution.location.line_index >= len(log_file.lines):
        return False
    line = log_file.lines[resolution.location.line_index]
    return line_contains(line, resolution.citation.content)
