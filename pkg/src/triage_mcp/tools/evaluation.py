"""
Triage MCP - Evaluation Tools

1 tool for measuring diagnosis accuracy on synthetic failures.
"""

import json
from typing import Optional

from ..evaluation import build_corpus, render_eval_report, run_eval
from ..models.tool_inputs import RunEvaluationInput
from ..runtime import get_backend, get_config


async def run_evaluation(params: Optional[RunEvaluationInput] = None) -> str:
    """
    Measure diagnosis accuracy on generated failing tests with known root causes.

    Fault kinds: ComponentCrash, StartupTimeout, AssertionFailure,
    MissingDriverLog, MissingComponentLog. Missing-log cases are accurate only
    when the diagnosis declines to conclude.

    Returns overall and per-fault accuracy plus the text report.
    """
    if params is None:
        params = RunEvaluationInput()

    corpus = build_corpus(
        params.cases,
        params.seed,
        params.faults,
        components=params.components,
        lines_per_file=(min(50, params.max_lines_per_file), params.max_lines_per_file),
    )
    report = await run_eval(corpus, get_backend(), config=get_config())
    result = {
        "cases": report.cases,
        "accurate": report.accurate,
        "accuracy": report.accuracy,
        "per_fault_breakdown": report.per_fault_breakdown,
        "link_violations": report.link_violations,
        "report": render_eval_report(report),
    }
    return json.dumps(result, indent=2)


EVALUATION_TOOLS = [
    run_evaluation,
]
