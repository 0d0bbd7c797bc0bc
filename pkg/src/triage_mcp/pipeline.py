"""
Triage MCP - Pipeline

One end-to-end diagnosis of a bundle directory, shared by the CLI, the HTTP
service, the MCP tools and the evaluation harness:

    ingest -> filter -> section -> prompt -> complete -> parse -> resolve -> render
"""

import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from .backends import CompletionBackend, create_backend
from .config import ServiceConfig
from .findings import render_finding
from .ingestion import load_bundle, load_context
from .merging import LineRenderer, assemble_sections, filter_by_level, render_raw
from .models.prompt import DiagnosisPrompt, PromptTemplate
from .models.service import PipelineRun
from .parser import parse_response, resolve_citations
from .prompting import build_prompt, load_template

logger = logging.getLogger(__name__)


def prepare_prompt(
    root_dir: Union[str, Path],
    config: Optional[ServiceConfig] = None,
    *,
    template: Optional[PromptTemplate] = None,
    render: LineRenderer = render_raw,
):
    """Ingest a bundle and build its prompt. Returns ``(bundle, prompt)``."""
    config = config or ServiceConfig()
    template = template or load_template(config.template_path)

    bundle = load_bundle(root_dir, config.ingestion)
    context, context_notes = load_context(root_dir, config.ingestion)
    if context_notes:
        bundle = bundle.model_copy(
            update={"ingestion_notes": bundle.ingestion_notes + tuple(context_notes)}
        )
    bundle = filter_by_level(bundle, config.ingestion.min_level)

    sectioned = assemble_sections(bundle, render)
    prompt: DiagnosisPrompt = build_prompt(template, sectioned, context, config.budget_tokens)
    return bundle, prompt


async def run_pipeline(
    root_dir: Union[str, Path],
    config: Optional[ServiceConfig] = None,
    *,
    backend: Optional[CompletionBackend] = None,
    template: Optional[PromptTemplate] = None,
    render: LineRenderer = render_raw,
    finding_id: Optional[str] = None,
    now: Optional[datetime] = None,
) -> PipelineRun:
    """
    Diagnose the bundle in root_dir.

    Raises RootDirUnreadable, BudgetTooSmall or a BackendError on
    operational failure; data problems end up in the finding instead.
    """
    config = config or ServiceConfig()
    backend = backend or create_backend(config.backend)
    started = time.perf_counter()

    bundle, prompt = prepare_prompt(root_dir, config, template=template, render=render)
    response = await backend.complete(prompt, config.backend.params)
    diagnosis = parse_response(response)
    resolved = resolve_citations(diagnosis, bundle)

    latency = time.perf_counter() - started
    finding = render_finding(
        resolved,
        bundle,
        config.link_scheme,
        finding_id=finding_id,
        now=now,
        latency_seconds=latency,
    )
    logger.info(
        "Diagnosed %s with %s backend: %s (%d citations, %.2fs)",
        bundle.bundle_id, backend.name, resolved.outcome.value,
        len(resolved.resolutions), latency,
    )
    return PipelineRun(
        bundle=bundle,
        prompt=prompt,
        response=response,
        resolved=resolved,
        finding=finding,
        latency_seconds=latency,
    )
