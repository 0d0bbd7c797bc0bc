"""
Triage MCP - Finding Tools

3 tools for findings, developer feedback and engagement metrics.
"""

import json
from datetime import datetime, timezone

from ..findings import compute_metrics
from ..models.finding import FeedbackEvent
from ..models.tool_inputs import GetFindingInput, RecordFeedbackInput
from ..runtime import get_store


async def get_finding(params: GetFindingInput) -> str:
    """
    Get a stored finding by ID.

    Returns outcome, markdown body and the links to the cited log lines.
    """
    finding = get_store().get_finding(params.finding_id)
    return finding.model_dump_json(indent=2)


async def record_finding_feedback(params: RecordFeedbackInput) -> str:
    """
    Record developer feedback on a finding.

    Kinds:
    - PleaseFix: the reviewer asks the author to act on the finding
    - Helpful: the author found the diagnosis useful
    - NotHelpful: the diagnosis was wrong or useless

    Repeating the same (finding, user, kind) is a no-op.
    """
    event = FeedbackEvent(
        finding_id=params.finding_id,
        kind=params.kind,
        user=params.user,
        at=datetime.now(timezone.utc),
    )
    stored = get_store().record_feedback(event)
    return json.dumps(
        {"finding_id": params.finding_id, "kind": params.kind.value, "stored": stored}, indent=2
    )


async def get_feedback_metrics() -> str:
    """
    Get engagement metrics over all findings.

    Returns counts per feedback kind, feedback rate, helpfulness rate
    H/(H+N), not-helpful rate N/(PF+H+N) and whether the not-helpful rate
    exceeds the 10% guideline.
    """
    return compute_metrics(get_store()).model_dump_json(indent=2)


FINDING_TOOLS = [
    get_finding,
    record_finding_feedback,
    get_feedback_metrics,
]
