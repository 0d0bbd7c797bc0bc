"""Tests for response parsing, outcome classification and citation resolution."""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

import pytest
from conftest import write_bundle

from triage_mcp.backends import mock_diagnose
from triage_mcp.evaluation import build_corpus, generate_bundle
from triage_mcp.ingestion import load_bundle
from triage_mcp.models.backend import RawResponse
from triage_mcp.models.diagnosis import CitedLogLine, Diagnosis, Outcome
from triage_mcp.parser import (
    citation_is_sound,
    classify_outcome,
    normalize_response,
    parse_response,
    render_diagnosis,
    resolve_citations,
)
from triage_mcp.pipeline import prepare_prompt

RESPONSE = """\
Some thinking out loud first.

## ==Conclusion==
server-a crashed while starting.

**==Investigation Steps==**
1. Read the driver log.
2. Read server-a.error.

==Most Relevant Log Lines==
- log-file-name: server-a.error
- timestamp: 2025-09-17-16:59:41
- callsite: file2.py:41
**content**: shutting down

- log-file-name: test_driver.error
- timestamp:
- callsite: sut_launcher.py:112
**content**: component server-a failed
"""


class TestParseResponse:
    """Tests for parse_response."""

    def test_decorated_headers_and_two_groups(self) -> None:
        diagnosis = parse_response(RawResponse(text=RESPONSE))
        assert diagnosis.preamble == "Some thinking out loud first."
        assert diagnosis.conclusion == "server-a crashed while starting."
        assert diagnosis.investigation_steps.startswith("1. Read the driver log.")
        assert diagnosis.cited_lines == (
            CitedLogLine(
                log_file_name="server-a.error",
                timestamp=datetime(2025, 9, 17, 16, 59, 41),
                callsite="file2.py:41",
                content="shutting down",
            ),
            CitedLogLine(
                log_file_name="test_driver.error",
                callsite="sut_launcher.py:112",
                content="component server-a failed",
            ),
        )
        assert diagnosis.parse_warnings == ()

    def test_empty_response(self) -> None:
        diagnosis = parse_response("")
        assert diagnosis.conclusion is None
        assert diagnosis.cited_lines == ()
        assert diagnosis.parse_warnings == ("no headers found",)

    def test_empty_timestamp_is_absent(self) -> None:
        diagnosis = parse_response(RESPONSE)
        assert diagnosis.cited_lines[1].timestamp is None

    @pytest.mark.parametrize(
        "group",
        [
            pytest.param("- timestamp: 2025-09-17-16:59:41\n**content**: x", id="no-file-name"),
            pytest.param("- log-file-name: a.info\n- callsite: a.py:1", id="no-content"),
        ],
    )
    def test_incomplete_groups_become_warnings(self, group: str) -> None:
        diagnosis = parse_response(f"==Conclusion==\nx\n\n==Most Relevant Log Lines==\n{group}\n")
        assert diagnosis.cited_lines == ()
        assert len(diagnosis.parse_warnings) == 1
        assert "incomplete" in diagnosis.parse_warnings[0]

    def test_bad_timestamp_is_warned_and_dropped(self) -> None:
        text = (
            "==Most Relevant Log Lines==\n- log-file-name: a.info\n"
            "- timestamp: yesterday\n**content**: boom\n"
        )
        diagnosis = parse_response(text)
        assert diagnosis.cited_lines[0].timestamp is None
        assert any("yesterday" in w for w in diagnosis.parse_warnings)

    def test_round_trip(self) -> None:
        """Rendering a parsed diagnosis and parsing it again is stable."""
        diagnosis = parse_response(RESPONSE)
        assert parse_response(render_diagnosis(diagnosis)) == diagnosis

    def test_mock_answers_round_trip(self, tmp_path: Path) -> None:
        """Mock answers to a hundred generated failures parse cleanly and render back."""
        corpus = build_corpus(100, seed=21, components=3, lines_per_file=(20, 60))
        for index, case in enumerate(corpus):
            case_dir = tmp_path / f"case-{index:03d}"
            generate_bundle(case, case_dir)
            _, prompt = prepare_prompt(case_dir)
            text = mock_diagnose(prompt.sectioned, prompt.sectioned.notes).text

            diagnosis = parse_response(text)

            assert diagnosis.parse_warnings == (), case
            assert render_diagnosis(diagnosis) == normalize_response(text), case


class TestClassifyOutcome:
    """Tests for classify_outcome."""

    def test_conclusive(self) -> None:
        assert classify_outcome(parse_response(RESPONSE)) is Outcome.CONCLUSIVE

    @pytest.mark.parametrize(
        "steps",
        [
            pytest.param("I NEED ACCESS to the server-b logs.", id="need-access"),
            pytest.param("There is not enough information.", id="not-enough"),
            pytest.param("I must not draw any conclusion.", id="must-not"),
        ],
    )
    def test_insufficient_information(self, steps: str) -> None:
        diagnosis = Diagnosis(investigation_steps=steps)
        assert classify_outcome(diagnosis) is Outcome.INSUFFICIENT_INFORMATION

    def test_headerless_text_is_unparseable(self) -> None:
        assert classify_outcome(parse_response("The server is fine.")) is Outcome.UNPARSEABLE

    def test_conclusion_without_citations_is_unparseable(self) -> None:
        diagnosis = Diagnosis(conclusion="It broke.", investigation_steps="need access")
        assert classify_outcome(diagnosis) is Outcome.UNPARSEABLE


class TestResolveCitations:
    """Tests for resolve_citations."""

    def test_listing_error_line(self, listing_dir: Path) -> None:
        bundle = load_bundle(listing_dir)
        diagnosis = Diagnosis(
            conclusion="crash",
            cited_lines=(CitedLogLine(log_file_name="server-a.error", content="shutting down"),),
        )
        resolved = resolve_citations(diagnosis, bundle)
        location = resolved.resolutions[0].location
        assert (location.file_name, location.line_index) == ("server-a.error", 0)
        assert resolved.outcome is Outcome.CONCLUSIVE

    def test_unknown_file_is_unresolved(self, listing_dir: Path) -> None:
        bundle = load_bundle(listing_dir)
        diagnosis = Diagnosis(
            conclusion="crash",
            cited_lines=(CitedLogLine(log_file_name="server-z.error", content="shutting down"),),
        )
        resolved = resolve_citations(diagnosis, bundle)
        assert not resolved.resolutions[0].resolved
        assert any("server-z.error" in w for w in resolved.diagnosis.parse_warnings)

    def test_timestamp_disambiguates(self, tmp_path: Path) -> None:
        write_bundle(
            tmp_path,
            {
                "server-a.error": [
                    "2025-09-17-14:00:00 | dc1 | p1 | t-1 | a.py:1 | disk full",
                    "2025-09-17-14:05:00 | dc1 | p1 | t-1 | a.py:1 | disk full",
                ]
            },
        )
        bundle = load_bundle(tmp_path)
        cited = CitedLogLine(
            log_file_name="server-a.error",
            timestamp=datetime(2025, 9, 17, 14, 5, 0),
            content="disk full",
        )
        resolved = resolve_citations(Diagnosis(conclusion="x", cited_lines=(cited,)), bundle)
        assert resolved.resolutions[0].location.line_index == 1

    def test_callsite_then_earliest(self, tmp_path: Path) -> None:
        write_bundle(
            tmp_path,
            {
                "server-a.error": [
                    "2025-09-17-14:00:00 | dc1 | p1 | t-1 | src/a.py:1 | disk full",
                    "2025-09-17-14:00:00 | dc1 | p1 | t-1 | src/b.py:2 | disk full",
                    "2025-09-17-14:00:00 | dc1 | p1 | t-1 | src/b.py:2 | disk full",
                ]
            },
        )
        bundle = load_bundle(tmp_path)
        cited = CitedLogLine(log_file_name="server-a.error", callsite="b.py:2", content="disk")
        resolved = resolve_citations(Diagnosis(conclusion="x", cited_lines=(cited,)), bundle)
        assert resolved.resolutions[0].location.line_index == 1

    def test_resolutions_are_sound(self, listing_dir: Path) -> None:
        """Every resolved location contains its cited content."""
        bundle = load_bundle(listing_dir)
        resolved = resolve_citations(parse_response(RESPONSE), bundle)
        assert all(r.resolved for r in resolved.resolutions)
        assert all(citation_is_sound(bundle, r) for r in resolved.resolutions)
