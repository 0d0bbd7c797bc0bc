"""
Triage MCP - Evaluation harness

Generates synthetic failing-test bundles with one injected root cause each,
runs the pipeline on them and scores the diagnoses against ground truth.

Scoring is a mechanical approximation of "the conclusion or a cited line
gives accurate context for the root cause": a conclusive diagnosis is
accurate when it cites (or its conclusion quotes) the injected culprit line;
for missing-log faults only an explicit refusal is accurate.
"""

import asyncio
import json
import logging
import random
import tempfile
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .backends import CompletionBackend
from .config import ServiceConfig
from .errors import TriageError
from .ingestion import FIELD_DELIMITER, format_timestamp
from .latency import latency_stats
from .models.diagnosis import Outcome, ResolvedDiagnosis
from .models.evaluation import (
    FAULT_LABELS,
    AssertionFailure,
    CaseResult,
    CaseSpec,
    ComponentCrash,
    EvalReport,
    GroundTruth,
    MissingComponentLog,
    MissingDriverLog,
    StartupTimeout,
    Verdict,
    component_names,
)
from .models.logs import LogLevel
from .parser import citation_is_sound
from .pipeline import run_pipeline

logger = logging.getLogger(__name__)

DRIVER_COMPONENT = "test_driver"
START_TIME = datetime(2025, 9, 17, 14, 0, 0)
MAX_STEP_SECONDS = 3
CONTEXT_FILE_NAME = "context.json"

NOISE_ERRORS = ("retry succeeded", "transient RPC error, recovered")
CRASH_MESSAGE = "Server encountered an error, shutting down"
SIGINT_MESSAGE = "Received SIGINT, test driver exiting"
ASSERTION_MESSAGES = (
    "expected order status SHIPPED but was PENDING",
    "response code 500 != 200 for /api/v1/checkout",
    "inventory count mismatch: want 12, got 11",
    "user profile missing field 'email'",
)
_INFO_MESSAGES = (
    "Handling request id={request}",
    "Cache hit ratio {ratio:.2f}",
    "Heartbeat ok",
    "Flushed {count} records to storage",
    "Connected to {peer}",
)
_STACK_FRAMES = ("  at handler.process(handler.py:88)", "  at server.loop(server.py:212)")


class _FileWriter:
    """Accumulates lines of one log file on its own clock."""

    def __init__(self, component: str, rng: random.Random, process: str):
        self.component = component
        self.rng = rng
        self.process = process
        self.clock = START_TIME
        self.lines: list[str] = []

    def tick(self) -> datetime:
        self.clock += timedelta(seconds=self.rng.randint(0, MAX_STEP_SECONDS))
        return self.clock

    def line(self, timestamp: datetime, message: str, callsite: Optional[str] = None) -> str:
        callsite = callsite or f"{self.component.replace('-', '_')}.py:{self.rng.randint(10, 999)}"
        fields = [
            format_timestamp(timestamp),
            f"dc{self.rng.randint(1, 9)}",
            self.process,
            f"t-{self.rng.randint(1, 8)}",
            callsite,
            message,
        ]
        return FIELD_DELIMITER.join(fields)


def _info_message(rng: random.Random, peers: Sequence[str]) -> str:
    template = rng.choice(_INFO_MESSAGES)
    return template.format(
        request=rng.randint(1000, 99999),
        ratio=rng.random(),
        count=rng.randint(1, 500),
        peer=rng.choice(peers),
    )


def _component_logs(
    component: str,
    spec: CaseSpec,
    rng: random.Random,
    peers: Sequence[str],
    *,
    stop_during_startup: bool = False,
) -> tuple[_FileWriter, list[str]]:
    """Body of a component's .info file plus the benign noise of its .error file."""
    writer = _FileWriter(component, rng, process=f"p{rng.randint(100, 999)}")
    errors: list[str] = []
    writer.lines.append(writer.line(writer.tick(), "Server is starting"))
    writer.lines.append(
        writer.line(writer.tick(), f"Loaded configuration from /etc/{component}.conf")
    )
    if stop_during_startup:
        return writer, errors

    writer.lines.append(writer.line(writer.tick(), "Server is healthy"))
    body = rng.randint(*spec.lines_per_file)
    for _ in range(max(body - 3, 0)):
        timestamp = writer.tick()
        if rng.random() < 0.02:
            writer.lines.append(writer.line(timestamp, "Stack dump follows:"))
            writer.lines.extend(_STACK_FRAMES)
        else:
            writer.lines.append(writer.line(timestamp, _info_message(rng, peers)))
        if rng.random() < spec.noise_error_rate:
            errors.append(writer.line(timestamp, rng.choice(NOISE_ERRORS)))
    return writer, errors


def _write(path: Path, lines: list[str], *, trailing_newline: bool = True) -> None:
    text = "\n".join(lines)
    if lines and trailing_newline:
        text += "\n"
    path.write_text(text, encoding="utf-8")


def generate_bundle(spec: CaseSpec, out_dir: Union[str, Path]) -> GroundTruth:
    """
    Write one failing-test bundle to out_dir and return its ground truth.

    Every component gets ``<name>.info`` and ``<name>.error`` files, the
    driver gets ``test_driver.info`` and ``test_driver.error``, and a
    ``context.json`` describes the components. Output is a pure function of
    the CaseSpec, seed included.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    fault = spec.fault
    names = component_names(spec.components)
    ports = {name: 9000 + index for index, name in enumerate(names)}

    def peers_of(name: str) -> list[str]:
        others = [other for other in names if other != name]
        return [f"{other}:{ports[other]}" for other in others] or ["database:5432"]

    culprit = getattr(fault, "component", None)
    omitted: set[str] = set()
    if isinstance(fault, MissingComponentLog):
        omitted.add(fault.component)
    if isinstance(fault, MissingDriverLog):
        omitted.add(DRIVER_COMPONENT)

    components: dict[str, tuple[_FileWriter, list[str]]] = {}
    for name in names:
        components[name] = _component_logs(
            name,
            spec,
            rng,
            peers_of(name),
            stop_during_startup=isinstance(fault, StartupTimeout) and name == culprit,
        )

    driver = _FileWriter(DRIVER_COMPONENT, rng, process="p1")
    driver_errors: list[str] = []
    driver.lines.append(driver.line(driver.tick(), "Configuring SUT", "test_main.py:21"))
    for name in names:
        driver.lines.append(
            driver.line(driver.tick(), f"Starting component {name}", "sut_launcher.py:57")
        )
    for step in range(1, max(spec.lines_per_file[0] // 10, 1) + 1):
        timestamp = driver.tick()
        driver.lines.append(driver.line(timestamp, f"Running test step {step}", "test_main.py:64"))
        if rng.random() < spec.noise_error_rate:
            driver_errors.append(driver.line(timestamp, rng.choice(NOISE_ERRORS), "rpc.py:310"))

    end = max([driver.clock] + [writer.clock for writer, _ in components.values()])
    truth: GroundTruth

    if isinstance(fault, ComponentCrash):
        writer, errors = components[fault.component]
        errors.append(writer.line(end + timedelta(seconds=1), CRASH_MESSAGE, "server_main.py:41"))
        driver_errors.append(
            driver.line(
                end + timedelta(seconds=2),
                f"Test setup error: component {fault.component} failed (exit status 1)",
                "sut_launcher.py:112",
            )
        )
        truth = GroundTruth(
            fault=fault,
            culprit_file=f"{fault.component}.error",
            culprit_line_content=CRASH_MESSAGE,
        )
    elif isinstance(fault, StartupTimeout):
        writer, _ = components[fault.component]
        waiting = f"Waiting for connection to {peers_of(fault.component)[0]}"
        writer.lines.append(writer.line(writer.tick(), waiting, "server_main.py:77"))
        writer.lines.append(format_timestamp(writer.tick())[:13])
        driver_errors.append(
            driver.line(
                end + timedelta(seconds=60),
                f"component {fault.component} failed to become healthy within 60s",
                "sut_launcher.py:98",
            )
        )
        truth = GroundTruth(
            fault=fault, culprit_file=f"{fault.component}.info", culprit_line_content=waiting
        )
    elif isinstance(fault, AssertionFailure):
        content = f"Assertion failed: {fault.message}"
        driver_errors.append(driver.line(end + timedelta(seconds=1), content, "test_main.py:140"))
        truth = GroundTruth(
            fault=fault,
            culprit_file=f"{DRIVER_COMPONENT}.error",
            culprit_line_content=content,
        )
    elif isinstance(fault, MissingComponentLog):
        driver_errors.append(
            driver.line(
                end + timedelta(seconds=2),
                f"Test setup error: component {fault.component} failed (exit status 1)",
                "sut_launcher.py:112",
            )
        )
        truth = GroundTruth(fault=fault, expect_insufficient=True)
    else:
        truth = GroundTruth(fault=fault, expect_insufficient=True)

    driver.lines.append(driver.line(end + timedelta(seconds=90), SIGINT_MESSAGE, "test_main.py:9"))

    for name, (writer, errors) in components.items():
        if name in omitted:
            continue
        timed_out = isinstance(fault, StartupTimeout) and name == culprit
        _write(out / f"{name}.{LogLevel.INFO.suffix}", writer.lines, trailing_newline=not timed_out)
        _write(out / f"{name}.{LogLevel.ERROR.suffix}", errors)
    if DRIVER_COMPONENT not in omitted:
        _write(out / f"{DRIVER_COMPONENT}.{LogLevel.INFO.suffix}", driver.lines)
        _write(out / f"{DRIVER_COMPONENT}.{LogLevel.ERROR.suffix}", driver_errors)

    context = [
        {
            "component": name,
            "description": f"SUT server {name}, listens on port {ports[name]}",
            "command_line": (
                f"/usr/bin/{name} --port={ports[name]} --peers={','.join(peers_of(name))}"
            ),
        }
        for name in names
    ]
    (out / CONTEXT_FILE_NAME).write_text(json.dumps(context, indent=2) + "\n", encoding="utf-8")

    logger.debug("Generated %s case (seed %d) in %s", fault.label, spec.seed, out)
    return truth


def _overlaps(a: str, b: str) -> bool:
    return a in b or b in a


def score_diagnosis(resolved: ResolvedDiagnosis, truth: GroundTruth) -> Verdict:
    """Deterministic accuracy verdict for one diagnosis."""
    outcome = resolved.outcome
    if truth.expect_insufficient:
        if outcome == Outcome.INSUFFICIENT_INFORMATION:
            return Verdict(accurate=True, reason="declined to conclude without the missing logs")
        return Verdict(
            accurate=False, reason=f"expected insufficient information, got {outcome.value}"
        )

    if outcome == Outcome.UNPARSEABLE:
        return Verdict(accurate=False, reason="unparseable")
    if outcome == Outcome.INSUFFICIENT_INFORMATION:
        return Verdict(accurate=False, reason="insufficient information on a diagnosable failure")

    expected = truth.culprit_line_content or ""
    for resolution in resolved.resolutions:
        if (
            resolution.location is not None
            and resolution.location.file_name == truth.culprit_file
            and _overlaps(resolution.citation.content, expected)
        ):
            return Verdict(accurate=True, reason=f"cited the culprit line in {truth.culprit_file}")
    conclusion = resolved.diagnosis.conclusion or ""
    if expected and expected in conclusion:
        return Verdict(accurate=True, reason="conclusion quotes the culprit line")
    return Verdict(accurate=False, reason=f"culprit line in {truth.culprit_file} not identified")


def build_corpus(
    cases: int,
    seed: int = 0,
    faults: Optional[Iterable[str]] = None,
    *,
    components: int = 5,
    lines_per_file: tuple[int, int] = (200, 2000),
    noise_error_rate: float = 0.05,
) -> list[CaseSpec]:
    """
    A seeded corpus cycling through the requested fault labels.

    Raises ValueError for unknown labels or a negative case count.
    """
    if cases < 0:
        raise ValueError("cases must be >= 0")
    labels = list(faults) if faults else list(FAULT_LABELS)
    unknown = [label for label in labels if label not in FAULT_LABELS]
    if unknown:
        raise ValueError(
            f"Unknown fault kinds: {', '.join(unknown)}. Valid: {', '.join(FAULT_LABELS)}"
        )

    rng = random.Random(seed)
    names = component_names(components)
    corpus: list[CaseSpec] = []
    for index in range(cases):
        label = labels[index % len(labels)]
        if label == "ComponentCrash":
            fault = ComponentCrash(component=rng.choice(names))
        elif label == "StartupTimeout":
            fault = StartupTimeout(component=rng.choice(names))
        elif label == "AssertionFailure":
            fault = AssertionFailure(message=rng.choice(ASSERTION_MESSAGES))
        elif label == "MissingDriverLog":
            fault = MissingDriverLog()
        else:
            fault = MissingComponentLog(component=rng.choice(names))
        corpus.append(
            CaseSpec(
                components=components,
                lines_per_file=lines_per_file,
                noise_error_rate=noise_error_rate,
                fault=fault,
                seed=rng.randrange(2**32),
            )
        )
    return corpus


async def _run_case(
    index: int,
    spec: CaseSpec,
    backend: CompletionBackend,
    config: ServiceConfig,
    work_dir: Path,
) -> CaseResult:
    case_dir = work_dir / f"case-{index:04d}"
    try:
        truth = generate_bundle(spec, case_dir)
        run = await run_pipeline(case_dir, config, backend=backend)
    except Exception as e:
        log = logger.error if isinstance(e, TriageError) else logger.exception
        log("Case %d (%s) failed: %s", index, spec.fault.label, e)
        return CaseResult(
            case_index=index,
            fault=spec.fault.label,
            seed=spec.seed,
            verdict=Verdict(accurate=False, reason=f"{type(e).__name__}: {e}"),
        )
    violations = sum(
        1
        for resolution in run.resolved.resolutions
        if not citation_is_sound(run.bundle, resolution)
    )
    return CaseResult(
        case_index=index,
        fault=spec.fault.label,
        seed=spec.seed,
        outcome=run.outcome,
        verdict=score_diagnosis(run.resolved, truth),
        latency_seconds=run.latency_seconds,
        link_violations=violations,
    )


def summarize(results: Sequence[CaseResult]) -> EvalReport:
    """Aggregate case results; independent of their order."""
    ordered = sorted(results, key=lambda r: r.case_index)
    accurate = sum(1 for r in ordered if r.verdict.accurate)
    per_cases: dict[str, int] = {}
    per_accurate: dict[str, int] = {}
    for label in FAULT_LABELS:
        matching = [r for r in ordered if r.fault == label]
        if matching:
            per_cases[label] = len(matching)
            per_accurate[label] = sum(1 for r in matching if r.verdict.accurate)
    return EvalReport(
        cases=len(ordered),
        accurate=accurate,
        accuracy=accurate / len(ordered) if ordered else None,
        per_fault_breakdown={label: per_accurate[label] / n for label, n in per_cases.items()},
        per_fault_cases=per_cases,
        mean_latency_seconds=(
            sum(r.latency_seconds for r in ordered) / len(ordered) if ordered else None
        ),
        link_violations=sum(r.link_violations for r in ordered),
        results=tuple(ordered),
    )


async def run_eval(
    corpus: Sequence[CaseSpec],
    backend: CompletionBackend,
    *,
    config: Optional[ServiceConfig] = None,
    work_dir: Optional[Union[str, Path]] = None,
    concurrency: int = 4,
) -> EvalReport:
    """
    Generate, diagnose and score every case of the corpus.

    A case whose pipeline fails operationally counts as inaccurate with the
    error as its reason; the run itself never aborts. Bundles are written
    under work_dir, or a temporary directory removed afterwards.
    """
    config = config or ServiceConfig()
    semaphore = asyncio.Semaphore(max(concurrency, 1))

    async def bounded(index: int, spec: CaseSpec, root: Path) -> CaseResult:
        async with semaphore:
            return await _run_case(index, spec, backend, config, root)

    async def run_all(root: Path) -> list[CaseResult]:
        return await asyncio.gather(
            *(bounded(index, spec, root) for index, spec in enumerate(corpus))
        )

    if work_dir is not None:
        results = await run_all(Path(work_dir))
    else:
        with tempfile.TemporaryDirectory(prefix="triage-eval-") as tmp:
            results = await run_all(Path(tmp))

    report = summarize(results)
    logger.info(
        "Evaluated %d cases: %d accurate, %d link violations",
        report.cases, report.accurate, report.link_violations,
    )
    return report


def render_eval_report(report: EvalReport, include_timing: bool = True) -> str:
    """
    Plain-text report. Without timing the text depends only on the corpus
    and the backend's answers.
    """

    def pct(value: Optional[float]) -> str:
        return "n/a" if value is None else f"{value:.2%}"

    lines = [
        "Evaluation report",
        f"cases:            {report.cases}",
        f"accurate:         {report.accurate}",
        f"accuracy:         {pct(report.accuracy)}",
        f"link violations:  {report.link_violations}",
        "",
        f"{'fault':<22}{'cases':>7}{'accuracy':>11}",
    ]
    for label, accuracy in report.per_fault_breakdown.items():
        lines.append(f"{label:<22}{report.per_fault_cases.get(label, 0):>7}{pct(accuracy):>11}")

    failures = [r for r in report.results if not r.verdict.accurate]
    if failures:
        lines.append("")
        lines.append("inaccurate cases:")
        lines.extend(
            f"  #{r.case_index} {r.fault} (seed {r.seed}): {r.verdict.reason}" for r in failures
        )

    if include_timing:
        stats = latency_stats([r.latency_seconds for r in report.results])
        lines.append("")
        if report.mean_latency_seconds is None:
            lines.append("latency:          n/a")
        else:
            lines.append(
                f"latency:          mean {report.mean_latency_seconds:.3f}s, "
                f"p50 {stats.p50:.3f}s, p90 {stats.p90:.3f}s"
            )
    return "\n".join(lines) + "\n"
