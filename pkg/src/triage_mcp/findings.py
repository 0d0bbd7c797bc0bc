"""
Triage MCP - Findings

Renders resolved diagnoses as linked markdown findings, stores findings and
developer feedback, and computes engagement metrics.

Storage layout (all human-readable):
    <findings_dir>/<finding_id>.json   one file per finding
    <feedback_path>                    JSON lines, one feedback event per line
"""

import hashlib
import json
import logging
import threading
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError

from .config import ServiceConfig
from .errors import UnknownFinding
from .models.diagnosis import Outcome, ResolvedDiagnosis
from .models.finding import (
    DEFAULT_LINK_SCHEME,
    NOT_HELPFUL_GUIDELINE,
    FeedbackEvent,
    FeedbackKind,
    Finding,
    FindingLink,
    MetricsReport,
)
from .models.logs import LogBundle

logger = logging.getLogger(__name__)

BANNERS = {
    Outcome.CONCLUSIVE: "**Root cause identified** from the test logs.",
    Outcome.INSUFFICIENT_INFORMATION: "**More information is needed** to diagnose this failure.",
    Outcome.UNPARSEABLE: (
        "**Diagnosis unavailable**: the model response did not follow the expected format."
    ),
}


def _code(text: str) -> str:
    fence = "``" if "`" in text else "`"
    pad = " " if fence == "``" else ""
    return f"{fence}{pad}{text}{pad}{fence}"


def make_finding_id(*parts: str) -> str:
    """Deterministic 16-hex-digit id derived from the given parts."""
    digest = hashlib.sha256("\n".join(parts).encode("utf-8"))
    return digest.hexdigest()[:16]


def render_finding(
    resolved: ResolvedDiagnosis,
    bundle: LogBundle,
    link_scheme: str = DEFAULT_LINK_SCHEME,
    *,
    finding_id: Optional[str] = None,
    now: Optional[datetime] = None,
    latency_seconds: float = 0.0,
) -> Finding:
    """
    Render a resolved diagnosis as a markdown finding.

    The body holds, in order: a one-line outcome banner, the conclusion, and
    the cited lines (each resolved citation linked through link_scheme with
    its ``{bundle}``, ``{file}`` and ``{line}`` placeholders). Insufficient
    information findings quote the bundle's ingestion notes.
    """
    diagnosis = resolved.diagnosis
    parts = [BANNERS[resolved.outcome]]
    links: list[FindingLink] = []

    if diagnosis.conclusion:
        parts.append(diagnosis.conclusion)

    if resolved.outcome == Outcome.INSUFFICIENT_INFORMATION:
        parts.append(
            "The diagnosis is inconclusive: more information is needed to diagnose the root cause."
        )
        if bundle.ingestion_notes:
            quoted = "\n".join(f"> {note.describe()}" for note in bundle.ingestion_notes)
            parts.append(f"Missing or unreadable logs:\n{quoted}")
        else:
            parts.append("No ingestion problems were recorded for this bundle.")

    if resolved.resolutions:
        items: list[str] = []
        for resolution in resolved.resolutions:
            cited = resolution.citation
            if resolution.location is None:
                items.append(f"- {cited.log_file_name} {_code(cited.content)} (unresolved)")
                continue
            location = resolution.location
            text = f"{location.file_name}#L{location.line_index}"
            uri = link_scheme.format(
                bundle=bundle.bundle_id, file=location.file_name, line=location.line_index
            )
            links.append(FindingLink(text=text, uri=uri))
            items.append(f"- [{text}]({uri}) {_code(cited.content)}")
        parts.append("**Most relevant log lines**\n" + "\n".join(items))

    if diagnosis.investigation_steps:
        parts.append(
            "<details><summary>Investigation steps</summary>\n\n"
            f"{diagnosis.investigation_steps}\n\n</details>"
        )
    if resolved.outcome == Outcome.UNPARSEABLE and diagnosis.parse_warnings:
        parts.append(
            "Parse warnings:\n" + "\n".join(f"- {w}" for w in diagnosis.parse_warnings)
        )

    body = "\n\n".join(parts) + "\n"
    return Finding(
        finding_id=finding_id or make_finding_id(bundle.bundle_id, body),
        bundle_id=bundle.bundle_id,
        outcome=resolved.outcome,
        body_markdown=body,
        links=tuple(links),
        created_at=now or datetime.now(timezone.utc),
        generation_latency_seconds=max(latency_seconds, 0.0),
    )


class FeedbackStore:
    """
    Findings and feedback events, in memory and optionally on disk.

    Writes are serialized by a lock; reads return snapshots. Feedback is
    idempotent per (finding, user, kind): a repeated triple is stored once.
    """

    def __init__(
        self,
        findings_dir: Optional[Union[str, Path]] = None,
        feedback_path: Optional[Union[str, Path]] = None,
    ):
        self.findings_dir = Path(findings_dir) if findings_dir else None
        self.feedback_path = Path(feedback_path) if feedback_path else None
        self._lock = threading.Lock()
        self._findings: dict[str, Finding] = {}
        self._events: list[FeedbackEvent] = []
        self._seen: set[tuple[str, str, FeedbackKind]] = set()
        self._load()

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "FeedbackStore":
        return cls(findings_dir=config.findings_dir, feedback_path=config.feedback_path)

    def _load(self) -> None:
        if self.findings_dir and self.findings_dir.is_dir():
            for path in sorted(self.findings_dir.glob("*.json")):
                try:
                    finding = Finding.model_validate_json(path.read_text(encoding="utf-8"))
                except (OSError, ValidationError) as e:
                    logger.warning("Skipping unreadable finding file %s: %s", path, e)
                    continue
                self._findings[finding.finding_id] = finding
        if self.feedback_path and self.feedback_path.is_file():
            for number, line in enumerate(
                self.feedback_path.read_text(encoding="utf-8").splitlines(), start=1
            ):
                if not line.strip():
                    continue
                try:
                    event = FeedbackEvent.model_validate_json(line)
                except ValidationError as e:
                    logger.warning(
                        "Skipping feedback line %d of %s: %s", number, self.feedback_path, e
                    )
                    continue
                if event.dedup_key not in self._seen:
                    self._seen.add(event.dedup_key)
                    self._events.append(event)
        if self._findings or self._events:
            logger.info(
                "Loaded %d findings and %d feedback events", len(self._findings), len(self._events)
            )

    def finding_path(self, finding_id: str) -> Optional[Path]:
        if self.findings_dir is None:
            return None
        return self.findings_dir / f"{finding_id}.json"

    def add_finding(self, finding: Finding) -> Optional[Path]:
        """Store a finding, replacing any finding with the same id. Returns its file path."""
        path = self.finding_path(finding.finding_id)
        with self._lock:
            self._findings[finding.finding_id] = finding
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(finding.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def get_finding(self, finding_id: str) -> Finding:
        with self._lock:
            finding = self._findings.get(finding_id)
        if finding is None:
            raise UnknownFinding(finding_id)
        return finding

    def __contains__(self, finding_id: str) -> bool:
        with self._lock:
            return finding_id in self._findings

    def findings(self) -> list[Finding]:
        with self._lock:
            return list(self._findings.values())

    def events(self) -> list[FeedbackEvent]:
        with self._lock:
            return list(self._events)

    def record_feedback(self, event: FeedbackEvent) -> bool:
        """
        Append a feedback event.

        Returns False when the (finding, user, kind) triple was already
        stored. Raises UnknownFinding when the finding is not in the store.
        """
        with self._lock:
            if event.finding_id not in self._findings:
                raise UnknownFinding(event.finding_id)
            if event.dedup_key in self._seen:
                logger.debug("Ignoring duplicate feedback %s", event.dedup_key)
                return False
            self._seen.add(event.dedup_key)
            self._events.append(event)
            if self.feedback_path is not None:
                self.feedback_path.parent.mkdir(parents=True, exist_ok=True)
                record = {
                    "finding_id": event.finding_id,
                    "kind": event.kind.value,
                    "user": event.user,
                    "at": event.at.isoformat(),
                }
                with open(self.feedback_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record) + "\n")
        logger.info("Recorded %s feedback on %s", event.kind.value, event.finding_id)
        return True

    def snapshot(self) -> tuple[list[Finding], list[FeedbackEvent]]:
        with self._lock:
            return list(self._findings.values()), list(self._events)


def _rate(numerator: int, denominator: int) -> Optional[Fraction]:
    return Fraction(numerator, denominator) if denominator else None


def compute_metrics(store: FeedbackStore) -> MetricsReport:
    """
    Engagement metrics over a consistent snapshot of the store.

    helpfulness = H / (H + N), not-helpful = N / (PF + H + N); the guideline
    is violated only when the not-helpful rate is strictly above 10%.
    """
    findings, events = store.snapshot()
    counts = {kind: 0 for kind in FeedbackKind}
    users: dict[FeedbackKind, set[str]] = {kind: set() for kind in FeedbackKind}
    with_feedback: set[str] = set()
    for event in events:
        counts[event.kind] += 1
        users[event.kind].add(event.user)
        with_feedback.add(event.finding_id)

    pf = counts[FeedbackKind.PLEASE_FIX]
    h = counts[FeedbackKind.HELPFUL]
    n = counts[FeedbackKind.NOT_HELPFUL]
    with_feedback &= {f.finding_id for f in findings}
    feedback_rate = _rate(len(with_feedback), len(findings))
    helpfulness = _rate(h, h + n)
    not_helpful = _rate(n, pf + h + n)

    return MetricsReport(
        findings_total=len(findings),
        findings_with_feedback=len(with_feedback),
        pf=pf,
        h=h,
        n=n,
        feedback_rate=float(feedback_rate) if feedback_rate is not None else None,
        helpfulness_rate=float(helpfulness) if helpfulness is not None else None,
        not_helpful_rate=float(not_helpful) if not_helpful is not None else None,
        guideline_violated=not_helpful is not None
        and not_helpful > Fraction(NOT_HELPFUL_GUIDELINE).limit_denominator(),
        distinct_users=len(set().union(*users.values())),
        pf_users=len(users[FeedbackKind.PLEASE_FIX]),
        h_users=len(users[FeedbackKind.HELPFUL]),
        n_users=len(users[FeedbackKind.NOT_HELPFUL]),
    )


def render_metrics(report: MetricsReport) -> str:
    """Plain-text metrics table for the CLI."""

    def pct(rate: Optional[float]) -> str:
        return "n/a" if rate is None else f"{rate:.2%}"

    lines = [
        f"findings:            {report.findings_total}",
        f"with feedback:       {report.findings_with_feedback} ({pct(report.feedback_rate)})",
        f"please fix:          {report.pf} ({report.pf_users} users)",
        f"helpful:             {report.h} ({report.h_users} users)",
        f"not helpful:         {report.n} ({report.n_users} users)",
        f"distinct users:      {report.distinct_users}",
        f"helpfulness rate:    {pct(report.helpfulness_rate)}",
        f"not-helpful rate:    {pct(report.not_helpful_rate)}",
        "guideline (<=10% not helpful): "
        + ("VIOLATED" if report.guideline_violated else "ok"),
    ]
    return "\n".join(lines) + "\n"
