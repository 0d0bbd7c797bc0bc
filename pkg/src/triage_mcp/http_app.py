"""
Triage MCP - HTTP service

Starlette application mirroring the deployed flow: a failure notification
comes in, the pipeline runs in the background, the finding is stored and
posted to a webhook, and developer feedback comes back in.

Routes:
- GET  /, /health                 : status document
- POST /failures                  : {"bundle_path": ...} -> 202 {"finding_id": ...}
- GET  /findings/{finding_id}     : stored finding (202 while pending)
- POST /findings/{finding_id}/feedback : {"kind", "user"} -> 204
- GET  /metrics                   : feedback metrics, latency and usage stats
"""

import asyncio
import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import httpx
from pydantic import ValidationError
from starlette.applications import Starlette
from starlette.background import BackgroundTask
from starlette.exceptions import HTTPException
from starlette.requests import Request
from starlette.responses import JSONResponse, Response
from starlette.routing import Route

from . import __version__
from .backends import CompletionBackend, create_backend
from .config import ServiceConfig
from .errors import UnknownFinding
from .findings import FeedbackStore, compute_metrics, make_finding_id
from .latency import RunRecorder
from .models.finding import FeedbackEvent, Finding
from .pipeline import run_pipeline

logger = logging.getLogger(__name__)

WEBHOOK_RETRIES = 2
WEBHOOK_BACKOFF = 0.5  # seconds, doubled per retry
MAX_TRACKED_JOBS = 10_000
_CHUNK = 1 << 16

ENDPOINTS = {
    "health": "GET /health",
    "notify_failure": "POST /failures",
    "get_finding": "GET /findings/{finding_id}",
    "feedback": "POST /findings/{finding_id}/feedback",
    "metrics": "GET /metrics",
}


def _error(status: int, error: str, hint: str) -> JSONResponse:
    return JSONResponse({"error": error, "hint": hint}, status_code=status)


def bundle_fingerprint(bundle_path: Path) -> str:
    """
    Idempotency key of a notification: the resolved path plus a hash of the
    directory's regular files (names and bytes).
    """
    digest = hashlib.sha256(str(bundle_path.resolve()).encode("utf-8"))
    for entry in sorted(os.scandir(bundle_path), key=lambda e: e.name):
        if not entry.is_file():
            continue
        digest.update(b"\0" + entry.name.encode("utf-8") + b"\0")
        with open(entry.path, "rb") as fh:
            while chunk := fh.read(_CHUNK):
                digest.update(chunk)
    return digest.hexdigest()


def webhook_payload(finding: Finding) -> dict[str, Any]:
    return {
        "finding_id": finding.finding_id,
        "bundle_id": finding.bundle_id,
        "outcome": finding.outcome.value,
        "body_markdown": finding.body_markdown,
        "links": [link.model_dump() for link in finding.links],
    }


@dataclass
class _Job:
    status: str = "pending"
    error: Optional[str] = None


@dataclass
class TriageService:
    """Shared state of the HTTP service."""

    config: ServiceConfig
    backend: CompletionBackend
    store: FeedbackStore
    recorder: RunRecorder = field(default_factory=RunRecorder)
    webhook_transport: Optional[httpx.AsyncBaseTransport] = None
    webhook_backoff: float = WEBHOOK_BACKOFF
    max_jobs: int = MAX_TRACKED_JOBS
    _jobs: dict[str, _Job] = field(default_factory=dict)
    _keys: dict[str, str] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def claim(self, key: str) -> tuple[str, bool]:
        """Finding id for an idempotency key and whether it is new."""
        with self._lock:
            if key in self._keys:
                return self._keys[key], False
            finding_id = make_finding_id(key)
            self._keys[key] = finding_id
            self._jobs[finding_id] = _Job()
            self._evict_finished()
            return finding_id, True

    def _evict_finished(self) -> None:
        # Oldest first; pending jobs stay until they finish. Caller holds the lock.
        excess = len(self._keys) - self.max_jobs
        if excess <= 0:
            return
        for key, finding_id in list(self._keys.items()):
            if excess <= 0:
                break
            job = self._jobs.get(finding_id)
            if job is not None and job.status == "pending":
                continue
            del self._keys[key]
            self._jobs.pop(finding_id, None)
            excess -= 1

    @property
    def tracked_jobs(self) -> int:
        with self._lock:
            return len(self._jobs)

    def job(self, finding_id: str) -> Optional[_Job]:
        with self._lock:
            return self._jobs.get(finding_id)

    async def process(self, bundle_path: Path, finding_id: str) -> None:
        """Run the pipeline for a claimed notification. Never raises."""
        job = self.job(finding_id) or _Job()
        try:
            with self.recorder.track() as usage:
                run = await run_pipeline(
                    bundle_path, self.config, backend=self.backend, finding_id=finding_id
                )
                usage.update(
                    log_files=run.log_files,
                    log_lines=run.log_lines,
                    input_tokens=run.input_tokens,
                    output_tokens=run.output_tokens,
                )
        except Exception as e:
            job.status, job.error = "failed", f"{type(e).__name__}: {e}"
            logger.error("Pipeline failed for %s (%s): %s", bundle_path, finding_id, e)
            return

        self.store.add_finding(run.finding)
        job.status = "done"
        if self.config.post_findings:
            await self.post_webhook(run.finding)

    async def post_webhook(self, finding: Finding) -> bool:
        """POST the finding, retrying twice. Failures are logged, never raised."""
        payload = webhook_payload(finding)
        async with httpx.AsyncClient(timeout=30.0, transport=self.webhook_transport) as client:
            for attempt in range(WEBHOOK_RETRIES + 1):
                try:
                    response = await client.post(self.config.webhook_url, json=payload)
                    if response.status_code < 400:
                        logger.info("Posted finding %s to webhook", finding.finding_id)
                        return True
                    problem = f"HTTP {response.status_code}"
                except httpx.RequestError as e:
                    problem = str(e) or type(e).__name__
                if attempt < WEBHOOK_RETRIES:
                    delay = self.webhook_backoff * (2**attempt)
                    logger.warning(
                        "Webhook delivery of %s failed (%s); retrying in %.1fs",
                        finding.finding_id, problem, delay,
                    )
                    await asyncio.sleep(delay)
        logger.error(
            "Webhook delivery of %s failed after %d attempts: %s",
            finding.finding_id, WEBHOOK_RETRIES + 1, problem,
        )
        return False


async def _json_body(request: Request) -> Optional[dict[str, Any]]:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    return body if isinstance(body, dict) else None


async def health(request: Request) -> JSONResponse:
    service: TriageService = request.app.state.service
    return JSONResponse(
        {
            "status": "healthy",
            "server": "triage-mcp",
            "version": __version__,
            "backend": service.backend.name,
            "endpoints": ENDPOINTS,
        }
    )


async def notify_failure(request: Request) -> JSONResponse:
    service: TriageService = request.app.state.service
    body = await _json_body(request)
    bundle_path = body.get("bundle_path") if body else None
    if not isinstance(bundle_path, str) or not bundle_path.strip():
        return _error(400, "Malformed body", 'Send JSON like {"bundle_path": "/path/to/logs"}')

    path = Path(bundle_path)
    if not path.is_dir():
        return _error(422, "Unreadable bundle path", f"{bundle_path} is not a readable directory")
    try:
        key = await asyncio.to_thread(bundle_fingerprint, path)
    except OSError as e:
        return _error(422, "Unreadable bundle path", str(e))

    finding_id, is_new = service.claim(key)
    if not is_new:
        logger.info("Duplicate notification for %s; returning %s", bundle_path, finding_id)
        return JSONResponse({"finding_id": finding_id, "duplicate": True}, status_code=202)

    logger.info("Accepted failure notification for %s as %s", bundle_path, finding_id)
    return JSONResponse(
        {"finding_id": finding_id, "duplicate": False},
        status_code=202,
        background=BackgroundTask(service.process, path, finding_id),
    )


async def get_finding(request: Request) -> JSONResponse:
    service: TriageService = request.app.state.service
    finding_id = request.path_params["finding_id"]
    try:
        finding = service.store.get_finding(finding_id)
    except UnknownFinding:
        job = service.job(finding_id)
        if job is None:
            return _error(404, "Unknown finding", f"No finding with id {finding_id}")
        if job.status == "failed":
            return _error(502, "Diagnosis failed", job.error or "see service logs")
        return JSONResponse({"finding_id": finding_id, "status": job.status}, status_code=202)
    return JSONResponse(finding.model_dump(mode="json"))


async def record_feedback(request: Request) -> Response:
    service: TriageService = request.app.state.service
    finding_id = request.path_params["finding_id"]
    if finding_id not in service.store:
        return _error(404, "Unknown finding", f"No finding with id {finding_id}")

    body = await _json_body(request)
    if body is None:
        return _error(400, "Malformed body", 'Send JSON like {"kind": "Helpful", "user": "alice"}')
    try:
        event = FeedbackEvent.model_validate(
            {"at": datetime.now(timezone.utc), **body, "finding_id": finding_id}
        )
    except ValidationError as e:
        detail = e.errors()[0]["msg"]
        return _error(
            400, "Malformed body", f"kind must be PleaseFix, Helpful or NotHelpful ({detail})"
        )
    try:
        service.store.record_feedback(event)
    except UnknownFinding:
        return _error(404, "Unknown finding", f"No finding with id {finding_id}")
    return Response(status_code=204)


async def metrics(request: Request) -> JSONResponse:
    service: TriageService = request.app.state.service
    report = compute_metrics(service.store)
    return JSONResponse(
        {
            **report.model_dump(mode="json"),
            "latency": service.recorder.latency().model_dump(mode="json"),
            "usage": service.recorder.usage().model_dump(mode="json"),
        }
    )


async def _not_found(request: Request, exc: HTTPException) -> JSONResponse:
    if exc.status_code == 405:
        return _error(405, "Method not allowed", f"Endpoints: {', '.join(ENDPOINTS.values())}")
    return _error(404, "Not found", f"Endpoints: {', '.join(ENDPOINTS.values())}")


def create_http_app(
    config: Optional[ServiceConfig] = None,
    *,
    backend: Optional[CompletionBackend] = None,
    store: Optional[FeedbackStore] = None,
    webhook_transport: Optional[httpx.AsyncBaseTransport] = None,
) -> Starlette:
    """Build the service application around one backend and one store."""
    config = config or ServiceConfig()
    service = TriageService(
        config=config,
        backend=backend or create_backend(config.backend),
        store=store or FeedbackStore.from_config(config),
        webhook_transport=webhook_transport,
    )
    app = Starlette(
        routes=[
            Route("/", health, methods=["GET"]),
            Route("/health", health, methods=["GET"]),
            Route("/failures", notify_failure, methods=["POST"]),
            Route("/findings/{finding_id}", get_finding, methods=["GET"]),
            Route("/findings/{finding_id}/feedback", record_feedback, methods=["POST"]),
            Route("/metrics", metrics, methods=["GET"]),
        ],
        exception_handlers={404: _not_found, 405: _not_found},
    )
    app.state.service = service
    return app


def run_http_server(config: Optional[ServiceConfig] = None, **kwargs: Any) -> None:
    """Run the service with uvicorn."""
    import uvicorn

    config = config or ServiceConfig()
    app = create_http_app(config, **kwargs)
    logger.info("Serving on %s:%d with %s backend", config.host, config.port, config.backend.kind)
    uvicorn.run(app, host=config.host, port=config.port)
