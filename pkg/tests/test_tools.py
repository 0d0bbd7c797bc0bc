"""Tests for the MCP tool functions and category loading."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from triage_mcp.errors import UnknownFinding
from triage_mcp.models.tool_inputs import (
    BuildPromptInput,
    DiagnoseBundleInput,
    GetFindingInput,
    RecordFeedbackInput,
    RunEvaluationInput,
)
from triage_mcp.tools import get_all_tools, get_requested_categories
from triage_mcp.tools.diagnosis import build_diagnosis_prompt, diagnose_bundle
from triage_mcp.tools.evaluation import run_evaluation
from triage_mcp.tools.findings import get_feedback_metrics, get_finding, record_finding_feedback

pytestmark = pytest.mark.usefixtures("triage_runtime")


async def diagnose(bundle_dir: Path) -> dict:
    return json.loads(await diagnose_bundle(DiagnoseBundleInput(bundle_path=str(bundle_dir))))


class TestDiagnosisTools:
    """Tests for diagnose_bundle and build_diagnosis_prompt."""

    async def test_diagnose_and_fetch(self, listing_dir: Path) -> None:
        result = await diagnose(listing_dir)

        finding = result["finding"]
        assert finding["outcome"] == "Conclusive"
        assert result["usage"]["log_files"] == 4

        stored = json.loads(await get_finding(GetFindingInput(finding_id=finding["finding_id"])))
        assert stored["body_markdown"] == finding["body_markdown"]

    async def test_diagnose_without_storing(self, listing_dir: Path) -> None:
        params = DiagnoseBundleInput(bundle_path=str(listing_dir), store=False)
        finding_id = json.loads(await diagnose_bundle(params))["finding"]["finding_id"]
        with pytest.raises(UnknownFinding):
            await get_finding(GetFindingInput(finding_id=finding_id))

    async def test_build_prompt_reports_notes(self, driverless_dir: Path) -> None:
        params = BuildPromptInput(bundle_path=str(driverless_dir), include_text=True)
        result = json.loads(await build_diagnosis_prompt(params))
        assert result["bundle_id"] == "run-43"
        assert any("MissingDriverLog" in note for note in result["ingestion_notes"])
        assert "== FILE: server-a.error ==" in result["text"]

    async def test_build_prompt_omits_text_by_default(self, listing_dir: Path) -> None:
        params = BuildPromptInput(bundle_path=str(listing_dir))
        result = json.loads(await build_diagnosis_prompt(params))
        assert "text" not in result
        assert not result["truncated"]


class TestFindingTools:
    """Tests for the feedback tools."""

    async def test_feedback_updates_metrics(self, listing_dir: Path) -> None:
        result = await diagnose(listing_dir)
        finding_id = result["finding"]["finding_id"]

        params = RecordFeedbackInput(finding_id=finding_id, kind="Helpful", user="alice")
        first = json.loads(await record_finding_feedback(params))
        second = json.loads(await record_finding_feedback(params))

        assert (first["stored"], second["stored"]) == (True, False)
        metrics = json.loads(await get_feedback_metrics())
        assert metrics["h"] == 1
        assert metrics["helpfulness_rate"] == 1.0

    async def test_feedback_on_unknown_finding(self) -> None:
        params = RecordFeedbackInput(finding_id="nope", kind="NotHelpful", user="bob")
        with pytest.raises(UnknownFinding):
            await record_finding_feedback(params)


class TestEvaluationTool:
    """Tests for run_evaluation."""

    async def test_small_run(self) -> None:
        params = RunEvaluationInput(cases=5, seed=5, components=3, max_lines_per_file=40)
        result = json.loads(await run_evaluation(params))
        assert result["cases"] == 5
        assert set(result["per_fault_breakdown"]) == {
            "ComponentCrash",
            "StartupTimeout",
            "AssertionFailure",
            "MissingDriverLog",
            "MissingComponentLog",
        }
        assert "accuracy" in result["report"]

    async def test_zero_cases(self) -> None:
        result = json.loads(await run_evaluation(RunEvaluationInput(cases=0)))
        assert result["accuracy"] is None


class TestCategories:
    """Tests for TOOL_CATEGORIES loading."""

    def test_all_by_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("TOOL_CATEGORIES", raising=False)
        assert len(get_all_tools()) == 6

    def test_subset(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("TOOL_CATEGORIES", "findings, bogus")
        assert get_requested_categories() == ["findings"]
        assert [tool.__name__ for tool in get_all_tools()] == [
            "get_finding",
            "record_finding_feedback",
            "get_feedback_metrics",
        ]

    def test_invalid_only_loads_all(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("TOOL_CATEGORIES", "bogus")
        assert get_requested_categories() == ["diagnosis", "findings", "evaluation"]
