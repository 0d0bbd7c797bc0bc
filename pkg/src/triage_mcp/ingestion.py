"""
Triage MCP - Ingestion

Discover, read and parse the log directory a failing test leaves behind.

Line grammar (one physical line):
    2025-09-17-14:12:32 | dc7 | p41 | t-2 | file.py:444 | Server is starting

Lines that do not match the grammar are continuations of the previous line.
Ingestion is total: infrastructure problems (missing driver or component
logs, oversized or undecodable files, stray text) become IngestionNotes on
the bundle instead of exceptions.
"""

import json
import logging
import os
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from .config import IngestionConfig
from .errors import RootDirUnreadable
from .models.logs import IngestionNote, LogBundle, LogFile, LogLevel, LogLine, NoteKind
from .models.prompt import ComponentContext, ContextEntry

logger = logging.getLogger(__name__)

FIELD_DELIMITER = " | "
TIMESTAMP_FORMAT = "%Y-%m-%d-%H:%M:%S"
_TIMESTAMP_RE = re.compile(r"\d{4}-\d{2}-\d{2}-\d{2}:\d{2}:\d{2}")
_FILE_NAME_RE = re.compile(r"(?P<component>[A-Za-z0-9_-]+)\.(?P<suffix>[A-Za-z]+)")
FAILED_COMPONENT_RE = re.compile(r"component ([A-Za-z0-9_-]+) failed", re.IGNORECASE)


@dataclass(frozen=True)
class ParsedLine:
    """A physical line that matched the grammar."""

    timestamp: datetime
    datacenter: str
    process: str
    thread: str
    callsite: str
    message: str


@dataclass(frozen=True)
class ContinuationText:
    """A physical line that did not match the grammar."""

    text: str


def format_timestamp(timestamp: datetime) -> str:
    return timestamp.strftime(TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> Optional[datetime]:
    """Parse ``YYYY-MM-DD-hh:mm:ss``; None when the text is not a valid timestamp."""
    if not _TIMESTAMP_RE.fullmatch(text):
        return None
    try:
        return datetime.strptime(text, TIMESTAMP_FORMAT)
    except ValueError:
        return None


def parse_log_line(text: str) -> Union[ParsedLine, ContinuationText]:
    """
    Parse one physical line. Never raises.

    The message is everything after the fifth delimiter, so messages may
    themselves contain the delimiter. A line whose message is blank cannot
    start a log entry and is treated as a continuation.
    """
    fields = text.split(FIELD_DELIMITER)
    if len(fields) < 6:
        return ContinuationText(text)
    timestamp = parse_timestamp(fields[0])
    if timestamp is None:
        return ContinuationText(text)
    message = FIELD_DELIMITER.join(fields[5:])
    if not message.strip():
        return ContinuationText(text)
    return ParsedLine(
        timestamp=timestamp,
        datacenter=fields[1],
        process=fields[2],
        thread=fields[3],
        callsite=fields[4],
        message=message,
    )


def split_file_name(file_name: str) -> Optional[tuple[str, str]]:
    """Split ``<component>.<suffix>``; None when the name has another shape."""
    match = _FILE_NAME_RE.fullmatch(file_name)
    if not match:
        return None
    return match.group("component"), match.group("suffix")


def _truncate_bytes(data: bytes, max_bytes: int) -> tuple[bytes, bool]:
    """Cut data to at most max_bytes, at the last full line."""
    if len(data) <= max_bytes:
        return data, False
    head = data[:max_bytes]
    cut = head.rfind(b"\n")
    return (head[: cut + 1] if cut >= 0 else b""), True


def _truncation_note(file_name: str, max_bytes: int) -> IngestionNote:
    return IngestionNote(
        kind=NoteKind.CORRUPT_FILE,
        file_name=file_name,
        detail=f"file exceeds {max_bytes} bytes; truncated at the last full line",
    )


def parse_log_file(
    file_name: str,
    content: str,
    rank: int,
    *,
    is_driver: bool = False,
    max_bytes: Optional[int] = None,
) -> tuple[LogFile, list[IngestionNote]]:
    """
    Parse file content into a LogFile.

    Continuation lines are folded into the previous line's message with a
    newline. Continuation lines before the first parsed line have no
    timestamp to merge on; they are dropped and reported in one
    UnparseableLine note.
    """
    split = split_file_name(file_name)
    level = LogLevel.from_suffix(split[1]) if split else None
    if split is None or level is None:
        raise ValueError(f"{file_name!r} is not a <component>.<level> log file name")
    component = split[0]

    notes: list[IngestionNote] = []
    if max_bytes is not None:
        data, truncated = _truncate_bytes(content.encode("utf-8"), max_bytes)
        if truncated:
            content = data.decode("utf-8", errors="ignore")
            notes.append(_truncation_note(file_name, max_bytes))

    physical = content.split("\n") if content else []
    ends_with_newline = content.endswith("\n")
    if ends_with_newline:
        physical.pop()

    lines: list[LogLine] = []
    leading: list[str] = []
    pending: Optional[ParsedLine] = None
    pending_raw: list[str] = []
    pending_message: list[str] = []

    def flush() -> None:
        if pending is None:
            return
        lines.append(
            LogLine(
                timestamp=pending.timestamp,
                datacenter=pending.datacenter,
                process=pending.process,
                thread=pending.thread,
                callsite=pending.callsite,
                message="\n".join(pending_message),
                source_file_rank=rank,
                line_index=len(lines),
                raw_text="\n".join(pending_raw),
            )
        )

    for text in physical:
        parsed = parse_log_line(text)
        if isinstance(parsed, ParsedLine):
            flush()
            pending = parsed
            pending_raw = [text]
            pending_message = [parsed.message]
        elif pending is None:
            leading.append(text)
        else:
            pending_raw.append(text)
            pending_message.append(parsed.text)
    flush()

    if leading:
        notes.append(
            IngestionNote(
                kind=NoteKind.UNPARSEABLE_LINE,
                file_name=file_name,
                detail=f"{len(leading)} line(s) before the first timestamped line dropped; "
                f"first: {leading[0][:120]!r}",
            )
        )

    log_file = LogFile(
        file_name=file_name,
        component=component,
        level=level,
        rank=rank,
        lines=tuple(lines),
        is_driver=is_driver,
        ends_with_newline=ends_with_newline,
    )
    return log_file, notes


def _open_dir(root_dir: Union[str, Path]) -> list[os.DirEntry]:
    root = Path(root_dir)
    if not root.is_dir():
        raise RootDirUnreadable(f"Log directory does not exist or is not a directory: {root}")
    try:
        with os.scandir(root) as it:
            return sorted(it, key=lambda entry: entry.name)
    except OSError as e:
        raise RootDirUnreadable(f"Cannot list log directory {root}: {e}") from e


def _scan(
    root_dir: Union[str, Path], config: IngestionConfig
) -> tuple[list[tuple[str, bool]], list[IngestionNote]]:
    discovered: list[tuple[str, bool]] = []
    notes: list[IngestionNote] = []
    for entry in _open_dir(root_dir):
        try:
            if not entry.is_file():
                continue
        except OSError:
            continue
        if entry.name == config.context_file_name:
            continue
        split = split_file_name(entry.name)
        if split is None:
            continue
        component, suffix = split
        level = LogLevel.from_suffix(suffix)
        if level is None:
            notes.append(
                IngestionNote(
                    kind=NoteKind.CORRUPT_FILE,
                    file_name=entry.name,
                    detail=f"unrecognized level suffix {suffix!r}; file skipped",
                )
            )
            continue
        if level < config.min_level:
            continue
        discovered.append((entry.name, component in config.driver_component_names))
    discovered.sort(key=lambda item: (not item[1], item[0]))
    return discovered, notes


def discover_log_files(
    root_dir: Union[str, Path], config: Optional[IngestionConfig] = None
) -> list[tuple[str, bool]]:
    """
    List ``(file_name, is_driver)`` for every log file at or above min_level.

    Drivers come first, then components, each in lexicographic order.
    """
    discovered, _ = _scan(root_dir, config or IngestionConfig())
    return discovered


def referenced_failed_components(messages: Iterable[str]) -> list[str]:
    """Component names mentioned as ``component <name> failed``, in first-seen order."""
    seen: dict[str, None] = {}
    for message in messages:
        for match in FAILED_COMPONENT_RE.finditer(message):
            seen.setdefault(match.group(1), None)
    return list(seen)


def _read_file(path: Path, max_bytes: int) -> tuple[str, list[IngestionNote]]:
    notes: list[IngestionNote] = []
    with open(path, "rb") as fh:
        data = fh.read(max_bytes + 1)
    data, truncated = _truncate_bytes(data, max_bytes)
    if truncated:
        notes.append(_truncation_note(path.name, max_bytes))
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        text = data.decode("utf-8", errors="replace")
        notes.append(
            IngestionNote(
                kind=NoteKind.CORRUPT_FILE,
                file_name=path.name,
                detail=f"invalid UTF-8 at byte {e.start}; undecodable bytes replaced",
            )
        )
    return text, notes


def load_bundle(
    root_dir: Union[str, Path], config: Optional[IngestionConfig] = None
) -> LogBundle:
    """
    Parse every discovered log file of a bundle directory.

    Raises RootDirUnreadable when the directory cannot be listed; every other
    problem is recorded as an IngestionNote.
    """
    config = config or IngestionConfig()
    root = Path(root_dir)
    discovered, notes = _scan(root, config)

    files: list[LogFile] = []
    for rank, (file_name, is_driver) in enumerate(discovered):
        try:
            text, read_notes = _read_file(root / file_name, config.max_file_bytes)
        except OSError as e:
            notes.append(
                IngestionNote(
                    kind=NoteKind.CORRUPT_FILE,
                    file_name=file_name,
                    detail=f"unreadable: {e}",
                )
            )
            continue
        log_file, parse_notes = parse_log_file(file_name, text, rank, is_driver=is_driver)
        files.append(log_file)
        notes.extend(read_notes)
        notes.extend(parse_notes)

    if not any(is_driver for _, is_driver in discovered):
        notes.append(
            IngestionNote(
                kind=NoteKind.MISSING_DRIVER_LOG,
                detail="no test driver log file found; expected one of "
                + ", ".join(sorted(config.driver_component_names)),
            )
        )

    present = {f.component for f in files} | {
        split[0] for name, _ in discovered if (split := split_file_name(name))
    }
    driver_messages = (line.message for f in files if f.is_driver for line in f.lines)
    for component in referenced_failed_components(driver_messages):
        if component not in present:
            notes.append(
                IngestionNote(
                    kind=NoteKind.MISSING_COMPONENT_LOG,
                    detail=f"the test driver reports component {component} failed, "
                    f"but no {component}.* log file was found",
                )
            )

    bundle = LogBundle(
        bundle_id=root.resolve().name,
        files=tuple(files),
        ingestion_notes=tuple(notes),
    )
    logger.info(
        "Loaded bundle %s: %d files, %d lines, %d notes",
        bundle.bundle_id, len(bundle.files), bundle.line_count, len(notes),
    )
    for note in notes:
        logger.warning("Ingestion note for %s: %s", bundle.bundle_id, note.describe())
    return bundle


def load_context(
    root_dir: Union[str, Path], config: Optional[IngestionConfig] = None
) -> tuple[ComponentContext, list[IngestionNote]]:
    """
    Read optional component metadata from the bundle's context file.

    The file is a JSON list of ``{"component", "description", "command_line"}``
    objects. A missing file yields an empty context; a malformed one yields an
    empty context and a CorruptFile note.
    """
    config = config or IngestionConfig()
    path = Path(root_dir) / config.context_file_name
    if not path.is_file():
        return ComponentContext(), []
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            raise ValueError("expected a JSON list")
        context = ComponentContext(entries=tuple(ContextEntry.model_validate(item) for item in raw))
    except (OSError, ValueError, ValidationError) as e:
        return ComponentContext(), [
            IngestionNote(
                kind=NoteKind.CORRUPT_FILE,
                file_name=path.name,
                detail=f"component context ignored: {e}",
            )
        ]
    return context, []
