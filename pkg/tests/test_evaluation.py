"""Tests for the synthetic bundle generator, scoring and the evaluation run."""

from __future__ import annotations

import time
from pathlib import Path

import httpx
import pytest

from triage_mcp.backends import HttpCompletionBackend, MockBackend, mock_diagnose
from triage_mcp.evaluation import (
    CRASH_MESSAGE,
    NOISE_ERRORS,
    build_corpus,
    generate_bundle,
    render_eval_report,
    run_eval,
    score_diagnosis,
    summarize,
)
from triage_mcp.ingestion import load_bundle
from triage_mcp.models.diagnosis import (
    CitationResolution,
    CitedLogLine,
    Diagnosis,
    LineLocation,
    Outcome,
    ResolvedDiagnosis,
)
from triage_mcp.models.evaluation import (
    FAULT_LABELS,
    AssertionFailure,
    CaseResult,
    CaseSpec,
    ComponentCrash,
    GroundTruth,
    MissingComponentLog,
    MissingDriverLog,
    StartupTimeout,
    Verdict,
)
from triage_mcp.models.logs import NoteKind
from triage_mcp.parser import parse_response
from triage_mcp.pipeline import prepare_prompt

SMALL = {"components": 3, "lines_per_file": (20, 40), "noise_error_rate": 0.1}


def spec(fault, seed: int = 7) -> CaseSpec:
    return CaseSpec(fault=fault, seed=seed, **SMALL)


def files_of(directory: Path) -> dict[str, bytes]:
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


class TestGenerateBundle:
    """Tests for generate_bundle."""

    def test_deterministic(self, tmp_path: Path) -> None:
        case = spec(ComponentCrash(component="server-b"))
        generate_bundle(case, tmp_path / "one")
        generate_bundle(case, tmp_path / "two")
        assert files_of(tmp_path / "one") == files_of(tmp_path / "two")

    def test_crash_ends_culprit_error_file(self, tmp_path: Path) -> None:
        truth = generate_bundle(spec(ComponentCrash(component="server-b")), tmp_path)
        last = (tmp_path / "server-b.error").read_text(encoding="utf-8").splitlines()[-1]
        assert "shutting down" in last
        assert truth.culprit_file == "server-b.error"
        assert truth.culprit_line_content == CRASH_MESSAGE
        driver_errors = (tmp_path / "test_driver.error").read_text(encoding="utf-8")
        assert "component server-b failed" in driver_errors

    def test_startup_timeout_leaves_partial_last_line(self, tmp_path: Path) -> None:
        truth = generate_bundle(spec(StartupTimeout(component="server-a")), tmp_path)
        text = (tmp_path / "server-a.info").read_text(encoding="utf-8")
        assert not text.endswith("\n")
        assert text.splitlines()[-1] == "2025-09-17-14"
        assert truth.culprit_file == "server-a.info"
        assert truth.culprit_line_content.startswith("Waiting for connection to")

    def test_missing_driver_log_has_no_driver_files(self, tmp_path: Path) -> None:
        truth = generate_bundle(spec(MissingDriverLog()), tmp_path)
        assert not list(tmp_path.glob("test_driver.*"))
        assert truth.expect_insufficient
        kinds = [n.kind for n in load_bundle(tmp_path).ingestion_notes]
        assert kinds == [NoteKind.MISSING_DRIVER_LOG]

    def test_missing_component_log(self, tmp_path: Path) -> None:
        generate_bundle(spec(MissingComponentLog(component="server-c")), tmp_path)
        assert not list(tmp_path.glob("server-c.*"))
        kinds = [n.kind for n in load_bundle(tmp_path).ingestion_notes]
        assert kinds == [NoteKind.MISSING_COMPONENT_LOG]

    @pytest.mark.parametrize(
        "fault",
        [
            pytest.param(ComponentCrash(component="server-a"), id="crash"),
            pytest.param(StartupTimeout(component="server-b"), id="timeout"),
            pytest.param(AssertionFailure(message="want 1, got 2"), id="assertion"),
        ],
    )
    def test_generated_logs_follow_grammar(self, tmp_path: Path, fault) -> None:
        """Generated bundles ingest without any notes and reconstruct exactly."""
        generate_bundle(spec(fault, seed=11), tmp_path)
        bundle = load_bundle(tmp_path)
        assert bundle.ingestion_notes == ()
        for log_file in bundle.files:
            on_disk = (tmp_path / log_file.file_name).read_text(encoding="utf-8")
            assert log_file.render_text() == on_disk

    def test_context_file_written(self, tmp_path: Path) -> None:
        generate_bundle(spec(AssertionFailure(message="m")), tmp_path)
        assert (tmp_path / "context.json").is_file()

    def test_invalid_culprit_rejected(self) -> None:
        with pytest.raises(ValueError):
            spec(ComponentCrash(component="server-z"))


def resolved_with(outcome: Outcome, *citations: tuple[str, str], conclusion=None):
    resolutions = tuple(
        CitationResolution(
            citation=CitedLogLine(log_file_name=file_name, content=content),
            location=LineLocation(file_name=file_name, line_index=0),
        )
        for file_name, content in citations
    )
    return ResolvedDiagnosis(
        diagnosis=Diagnosis(conclusion=conclusion),
        resolutions=resolutions,
        outcome=outcome,
    )


class TestScoreDiagnosis:
    """Tests for score_diagnosis."""

    CRASH = GroundTruth(
        fault=ComponentCrash(component="server-a"),
        culprit_file="server-a.error",
        culprit_line_content=CRASH_MESSAGE,
    )
    MISSING = GroundTruth(fault=MissingDriverLog(), expect_insufficient=True)

    def test_cited_culprit_excerpt_is_accurate(self) -> None:
        resolved = resolved_with(
            Outcome.CONCLUSIVE, ("server-a.error", "shutting down"), conclusion="crash"
        )
        assert score_diagnosis(resolved, self.CRASH).accurate

    def test_wrong_file_is_inaccurate(self) -> None:
        resolved = resolved_with(
            Outcome.CONCLUSIVE, ("server-b.error", "shutting down"), conclusion="crash"
        )
        assert not score_diagnosis(resolved, self.CRASH).accurate

    def test_conclusion_quoting_culprit_is_accurate(self) -> None:
        resolved = resolved_with(
            Outcome.CONCLUSIVE,
            ("server-b.info", "heartbeat"),
            conclusion=f"server-a logged '{CRASH_MESSAGE}'",
        )
        assert score_diagnosis(resolved, self.CRASH).accurate

    def test_insufficient_on_missing_logs_is_accurate(self) -> None:
        resolved = resolved_with(Outcome.INSUFFICIENT_INFORMATION)
        assert score_diagnosis(resolved, self.MISSING).accurate

    def test_conclusion_on_missing_logs_is_inaccurate(self) -> None:
        resolved = resolved_with(
            Outcome.CONCLUSIVE, ("server-a.error", "shutting down"), conclusion="crash"
        )
        assert not score_diagnosis(resolved, self.MISSING).accurate

    def test_unparseable_is_inaccurate(self) -> None:
        assert not score_diagnosis(resolved_with(Outcome.UNPARSEABLE), self.CRASH).accurate


class TestBuildCorpus:
    """Tests for build_corpus."""

    def test_cycles_through_faults(self) -> None:
        corpus = build_corpus(10, seed=1, **SMALL)
        assert [case.fault.label for case in corpus] == list(FAULT_LABELS) * 2

    def test_seeded(self) -> None:
        assert build_corpus(5, seed=3) == build_corpus(5, seed=3)
        assert build_corpus(5, seed=3) != build_corpus(5, seed=4)

    def test_fault_subset(self) -> None:
        corpus = build_corpus(3, faults=["StartupTimeout"])
        assert {case.fault.label for case in corpus} == {"StartupTimeout"}

    def test_unknown_fault_rejected(self) -> None:
        with pytest.raises(ValueError, match="Unknown fault kinds: DiskFull"):
            build_corpus(1, faults=["DiskFull"])

    def test_negative_cases_rejected(self) -> None:
        with pytest.raises(ValueError):
            build_corpus(-1)


class TestRunEval:
    """Tests for run_eval and the report."""

    async def test_mock_backend_is_fully_accurate(self, tmp_path: Path) -> None:
        corpus = build_corpus(10, seed=5, **SMALL)
        report = await run_eval(corpus, MockBackend(), work_dir=tmp_path)

        assert report.cases == 10
        assert report.accuracy == 1.0, [r.verdict.reason for r in report.results]
        assert report.per_fault_breakdown == {label: 1.0 for label in FAULT_LABELS}
        assert report.per_fault_cases == {label: 2 for label in FAULT_LABELS}
        assert report.link_violations == 0
        assert {r.outcome for r in report.results if r.fault in ("MissingDriverLog",)} == {
            Outcome.INSUFFICIENT_INFORMATION
        }

    async def test_desk_scale_accuracy(self, tmp_path: Path) -> None:
        """Sixty default-size cases, fifteen per fault group, scored within a minute."""
        faults = [
            "ComponentCrash", "StartupTimeout", "AssertionFailure", "MissingDriverLog",
            "ComponentCrash", "StartupTimeout", "AssertionFailure", "MissingComponentLog",
        ]
        corpus = build_corpus(60, seed=2025, faults=faults)

        started = time.perf_counter()
        report = await run_eval(corpus, MockBackend(), work_dir=tmp_path)
        elapsed = time.perf_counter() - started

        missing = [r for r in report.results if r.fault.startswith("Missing")]
        others = [r for r in report.results if not r.fault.startswith("Missing")]
        assert report.per_fault_cases == {
            "ComponentCrash": 15,
            "StartupTimeout": 15,
            "AssertionFailure": 15,
            "MissingDriverLog": 8,
            "MissingComponentLog": 7,
        }
        assert sum(r.verdict.accurate for r in others) / len(others) >= 0.95
        assert all(r.verdict.accurate for r in missing), [r.verdict.reason for r in missing]
        assert report.link_violations == 0
        assert elapsed < 60.0

    async def test_bad_usage_does_not_abort(self, tmp_path: Path) -> None:
        def handler(request: httpx.Request) -> httpx.Response:
            body = {"text": "no headers", "usage": {"input_tokens": "lots"}}
            return httpx.Response(200, json=body)

        backend = HttpCompletionBackend(
            base_url="http://llm.test/v1/complete",
            transport=httpx.MockTransport(handler),
            backoff_seconds=0.0,
        )
        corpus = build_corpus(2, seed=3, faults=["ComponentCrash"], **SMALL)

        report = await run_eval(corpus, backend, work_dir=tmp_path)

        assert report.cases == 2
        assert {r.outcome for r in report.results} == {Outcome.UNPARSEABLE}

    async def test_backend_exception_scores_inaccurate(self, tmp_path: Path) -> None:
        class Broken:
            name = "broken"

            async def complete(self, prompt, params):
                raise ValueError("cannot convert usage")

        corpus = build_corpus(2, seed=3, **SMALL)

        report = await run_eval(corpus, Broken(), work_dir=tmp_path)

        assert report.cases == 2
        assert report.accuracy == 0.0
        assert all("ValueError" in r.verdict.reason for r in report.results)

    async def test_zero_cases(self) -> None:
        report = await run_eval([], MockBackend())
        assert report.cases == 0
        assert report.accuracy is None
        lines = render_eval_report(report).splitlines()
        assert ["accuracy:", "n/a"] in [line.split() for line in lines]

    async def test_report_without_timing_is_deterministic(self) -> None:
        corpus = build_corpus(5, seed=9, **SMALL)
        first = await run_eval(corpus, MockBackend(), concurrency=1)
        second = await run_eval(corpus, MockBackend(), concurrency=3)
        assert render_eval_report(first, include_timing=False) == render_eval_report(
            second, include_timing=False
        )
        assert "latency" not in render_eval_report(first, include_timing=False)
        assert "latency" in render_eval_report(first)


class TestNoiseErrors:
    """Benign error lines the generator sprinkles into bundles."""

    def test_never_cited_by_mock(self, tmp_path: Path) -> None:
        faults = ["ComponentCrash", "StartupTimeout", "AssertionFailure"]
        corpus = build_corpus(
            15, seed=8, faults=faults, components=3, lines_per_file=(20, 40), noise_error_rate=0.5
        )
        for index, case in enumerate(corpus):
            case_dir = tmp_path / f"case-{index:02d}"
            generate_bundle(case, case_dir)
            _, prompt = prepare_prompt(case_dir)

            diagnosis = parse_response(mock_diagnose(prompt.sectioned, prompt.sectioned.notes))

            assert diagnosis.cited_lines, case
            for cited in diagnosis.cited_lines:
                assert not any(noise in cited.content for noise in NOISE_ERRORS), case

    def test_high_rate_bundles_contain_noise(self, tmp_path: Path) -> None:
        case = CaseSpec(
            fault=ComponentCrash(component="server-a"), seed=1, components=3,
            lines_per_file=(40, 40), noise_error_rate=0.5,
        )
        generate_bundle(case, tmp_path)
        text = "".join(path.read_text(encoding="utf-8") for path in tmp_path.glob("*.error"))
        assert any(noise in text for noise in NOISE_ERRORS)


class TestSummarize:
    """Tests for summarize."""

    def test_order_independent(self) -> None:
        results = [
            CaseResult(
                case_index=index,
                fault=label,
                seed=index,
                verdict=Verdict(accurate=index % 2 == 0, reason="r"),
                latency_seconds=0.1 * index,
            )
            for index, label in enumerate(["ComponentCrash", "ComponentCrash", "StartupTimeout"])
        ]
        forward = summarize(results)
        backward = summarize(list(reversed(results)))
        assert forward == backward
        assert forward.accurate == 2
        assert forward.per_fault_breakdown == {"ComponentCrash": 0.5, "StartupTimeout": 1.0}
