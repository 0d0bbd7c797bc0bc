"""Shared fixtures: hand-written bundles in the log line grammar."""

from __future__ import annotations

from pathlib import Path

import pytest

from triage_mcp import runtime
from triage_mcp.config import ServiceConfig
from triage_mcp.findings import FeedbackStore

INFO_LINE = "2025-09-17-14:12:32 | dc7 | p41 | t-2 | file.py:444 | Server is starting"
ERROR_LINE = (
    "2025-09-17-16:59:41 | dc3 | p13 | t-7 | file2.py:41 | "
    "Server encountered an error, shutting down"
)
DRIVER_START = (
    "2025-09-17-14:12:30 | dc1 | p1 | t-1 | sut_launcher.py:57 | Starting component server-a"
)
DRIVER_FAILED = (
    "2025-09-17-17:00:02 | dc1 | p1 | t-1 | sut_launcher.py:112 | "
    "Test setup error: component server-a failed (exit status 1)"
)
DRIVER_SIGINT = (
    "2025-09-17-17:01:00 | dc1 | p1 | t-1 | test_main.py:9 | Received SIGINT, test driver exiting"
)


def write_bundle(root: Path, files: dict[str, list[str]]) -> Path:
    """Write each file's lines newline-terminated under root."""
    root.mkdir(parents=True, exist_ok=True)
    for name, lines in files.items():
        (root / name).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return root


@pytest.fixture
def listing_dir(tmp_path: Path) -> Path:
    """A crashed server-a with a driver that reports it."""
    return write_bundle(
        tmp_path / "run-42",
        {
            "server-a.info": [INFO_LINE],
            "server-a.error": [ERROR_LINE],
            "test_driver.info": [DRIVER_START, DRIVER_SIGINT],
            "test_driver.error": [DRIVER_FAILED],
        },
    )


@pytest.fixture
def driverless_dir(tmp_path: Path) -> Path:
    return write_bundle(
        tmp_path / "run-43",
        {"server-a.info": [INFO_LINE], "server-a.error": [ERROR_LINE]},
    )


@pytest.fixture
def config(tmp_path: Path) -> ServiceConfig:
    """Mock backend, store under tmp_path."""
    return ServiceConfig(store_dir=tmp_path / "store")


@pytest.fixture
def store(config: ServiceConfig) -> FeedbackStore:
    return FeedbackStore.from_config(config)


@pytest.fixture
def triage_runtime(config: ServiceConfig, store: FeedbackStore):
    """Point the MCP tools at the test config and store, and reset afterwards."""
    runtime.configure(config, store=store)
    yield runtime
    runtime.configure()
