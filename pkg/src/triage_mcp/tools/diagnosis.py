"""
Triage MCP - Diagnosis Tools

2 tools for diagnosing failed integration tests from their log bundles.
"""

import json

from ..merging import render_message, render_raw
from ..models.tool_inputs import BuildPromptInput, DiagnoseBundleInput
from ..pipeline import prepare_prompt, run_pipeline
from ..runtime import get_backend, get_config, get_store


async def diagnose_bundle(params: DiagnoseBundleInput) -> str:
    """
    Diagnose the root cause of a failed integration test from its log directory.

    Ingests and merges all component logs, asks the configured model for a
    diagnosis and renders it as a markdown finding with links to the cited
    log lines.

    Outcomes:
    - Conclusive: root cause identified, with cited log lines
    - InsufficientInformation: logs are missing; the finding says which
    - Unparseable: the model answer did not follow the expected format

    Returns the finding (id, outcome, markdown body, links) plus token usage.
    """
    config = get_config()
    if params.budget_tokens:
        config = config.model_copy(update={"budget_tokens": params.budget_tokens})

    run = await run_pipeline(
        params.bundle_path,
        config,
        backend=get_backend(),
        render=render_message if params.message_only else render_raw,
    )
    if params.store:
        get_store().add_finding(run.finding)

    result = {
        "finding": run.finding.model_dump(mode="json"),
        "prompt": {
            "estimated_tokens": run.prompt.estimated_tokens,
            "truncated": run.prompt.truncated,
            "template_version": run.prompt.template_version,
        },
        "usage": {
            "log_files": run.log_files,
            "log_lines": run.log_lines,
            "input_tokens": run.input_tokens,
            "output_tokens": run.output_tokens,
        },
        "parse_warnings": list(run.resolved.diagnosis.parse_warnings),
    }
    return json.dumps(result, indent=2)


async def build_diagnosis_prompt(params: BuildPromptInput) -> str:
    """
    Build the diagnostic prompt for a log bundle without calling the model.

    Useful to inspect what the model would see: which files were included,
    whether lines were truncated to fit the token budget, and the ingestion
    notes (missing driver or component logs, corrupt files).

    Set include_text=true to return the full prompt text.
    """
    config = get_config()
    if params.budget_tokens:
        config = config.model_copy(update={"budget_tokens": params.budget_tokens})

    bundle, prompt = prepare_prompt(params.bundle_path, config)
    result = {
        "bundle_id": bundle.bundle_id,
        "estimated_tokens": prompt.estimated_tokens,
        "budget_tokens": prompt.budget_tokens,
        "truncated": prompt.truncated,
        "sections_included": list(prompt.sections_included),
        "ingestion_notes": [note.describe() for note in bundle.ingestion_notes],
        "template_version": prompt.template_version,
    }
    if params.include_text:
        result["text"] = prompt.text
    return json.dumps(result, indent=2)


DIAGNOSIS_TOOLS = [
    diagnose_bundle,
    build_diagnosis_prompt,
]
