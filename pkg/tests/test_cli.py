"""Tests for the triage command line."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from triage_mcp.cli import EXIT_ERROR, EXIT_INSUFFICIENT, EXIT_OK, main

SMALL_EVAL = ["--components", "3", "--min-lines", "20", "--max-lines", "40"]


class TestDiagnose:
    """Tests for ``triage diagnose``."""

    def test_conclusive(self, tmp_path: Path, listing_dir: Path, capsys) -> None:
        store_dir = tmp_path / "store"
        code = main(["--store-dir", str(store_dir), "diagnose", str(listing_dir)])

        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert out.startswith("**Root cause identified**")
        assert "log://run-42/server-a.error#L0" in out
        assert len(list((store_dir / "findings").glob("*.json"))) == 1

    def test_insufficient(self, tmp_path: Path, driverless_dir: Path, capsys) -> None:
        code = main(["--store-dir", str(tmp_path / "store"), "diagnose", str(driverless_dir)])
        assert code == EXIT_INSUFFICIENT
        assert "More information is needed" in capsys.readouterr().out

    def test_missing_directory(self, tmp_path: Path, capsys) -> None:
        code = main(["--store-dir", str(tmp_path / "store"), "diagnose", str(tmp_path / "nope")])
        assert code == EXIT_ERROR
        assert capsys.readouterr().out == ""

    def test_message_only(self, tmp_path: Path, listing_dir: Path, capsys) -> None:
        args = ["--store-dir", str(tmp_path / "store"), "diagnose", "--message-only"]
        assert main([*args, str(listing_dir)]) == EXIT_OK
        assert "server-a.error#L0" in capsys.readouterr().out

    def test_bad_link_scheme_exits_one(
        self, tmp_path: Path, listing_dir: Path, monkeypatch: pytest.MonkeyPatch, capsys
    ) -> None:
        monkeypatch.setenv("TRIAGE_LINK_SCHEME", "log://{bundle}/{path}")
        code = main(["--store-dir", str(tmp_path / "store"), "diagnose", str(listing_dir)])
        assert code == EXIT_ERROR
        assert capsys.readouterr().out == ""

    def test_usage_error_exits_one(self) -> None:
        with pytest.raises(SystemExit) as exc_info:
            main(["diagnose", "--backend", "telepathy", "x"])
        assert exc_info.value.code == EXIT_ERROR


class TestEval:
    """Tests for ``triage eval``."""

    def test_small_run(self, tmp_path: Path, capsys) -> None:
        output = tmp_path / "report.json"
        code = main(
            ["eval", "--cases", "5", "--seed", "2", *SMALL_EVAL, "--no-timing",
             "--output", str(output)]
        )

        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "accuracy:" in out
        assert "latency" not in out
        report = json.loads(output.read_text(encoding="utf-8"))
        assert report["cases"] == 5
        assert 0.0 <= report["accuracy"] <= 1.0
        assert "latency_seconds" not in report["results"][0]

    def test_unknown_fault(self, capsys) -> None:
        assert main(["eval", "--cases", "2", "--faults", "Bogus"]) == EXIT_ERROR
        assert capsys.readouterr().out == ""

    def test_negative_cases(self) -> None:
        assert main(["eval", "--cases", "-1"]) == EXIT_ERROR


class TestMetrics:
    """Tests for ``triage metrics``."""

    def test_json_after_diagnose(self, tmp_path: Path, listing_dir: Path, capsys) -> None:
        store = ["--store-dir", str(tmp_path / "store")]
        main([*store, "diagnose", str(listing_dir)])
        capsys.readouterr()

        assert main([*store, "metrics", "--json"]) == EXIT_OK

        report = json.loads(capsys.readouterr().out)
        assert report["findings_total"] == 1
        assert report["feedback_rate"] == 0.0

    def test_table_on_empty_store(self, tmp_path: Path, capsys) -> None:
        assert main(["--store-dir", str(tmp_path / "store"), "metrics"]) == EXIT_OK
        assert "n/a" in capsys.readouterr().out
