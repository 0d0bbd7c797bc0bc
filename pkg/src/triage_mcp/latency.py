"""
Triage MCP - Latency and usage instrumentation

Collects one sample per pipeline run and summarizes them as nearest-rank
percentiles (LatencyStats) and per-run means (UsageStats).
"""

import math
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from statistics import fmean
from typing import Iterator, Sequence

from .models.service import LatencyStats, UsageStats


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    """The smallest value with at least ``percentile`` percent of samples at or below it."""
    if not sorted_values:
        raise ValueError("nearest_rank needs at least one value")
    if not 0 < percentile <= 100:
        raise ValueError("percentile must lie in (0, 100]")
    rank = math.ceil(percentile / 100 * len(sorted_values))
    return sorted_values[rank - 1]


def latency_stats(samples: Sequence[float]) -> LatencyStats:
    if not samples:
        return LatencyStats()
    ordered = sorted(samples)
    return LatencyStats(
        count=len(ordered), p50=nearest_rank(ordered, 50), p90=nearest_rank(ordered, 90)
    )


@dataclass(frozen=True)
class RunSample:
    latency_seconds: float
    log_files: int = 0
    log_lines: int = 0
    input_tokens: int = 0
    output_tokens: int = 0


class RunRecorder:
    """Thread-safe collection of RunSamples."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._samples: list[RunSample] = []

    def add(self, sample: RunSample) -> None:
        with self._lock:
            self._samples.append(sample)

    @contextmanager
    def track(self) -> Iterator[dict]:
        """
        Time a block and record it. The block may fill the yielded dict with
        log_files, log_lines, input_tokens and output_tokens. Failed runs are
        not recorded.
        """
        usage: dict = {}
        start = time.perf_counter()
        yield usage
        self.add(RunSample(latency_seconds=time.perf_counter() - start, **usage))

    def samples(self) -> list[RunSample]:
        with self._lock:
            return list(self._samples)

    def latency(self) -> LatencyStats:
        return latency_stats([s.latency_seconds for s in self.samples()])

    def usage(self) -> UsageStats:
        samples = self.samples()
        if not samples:
            return UsageStats()
        return UsageStats(
            runs=len(samples),
            mean_log_files=fmean(s.log_files for s in samples),
            mean_log_lines=fmean(s.log_lines for s in samples),
            mean_input_tokens=fmean(s.input_tokens for s in samples),
            mean_output_tokens=fmean(s.output_tokens for s in samples),
        )
