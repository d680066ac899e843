from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class LatencyStats:
    p50: float
    p95: float
    mean: float
    iterations: int

    @property
    def throughput(self) -> float:
        """Calls per second implied by the mean latency."""
        return 1e6 / self.mean if self.mean > 0 else float("inf")


def bench_latency(call: Callable[[], object], iterations: int = 200, warmup: int = 10) -> LatencyStats:
    """Wall-clock latency of ``call()`` in microseconds, warm-up runs excluded."""
    if iterations < 100:
        raise ValueError("iterations must be >= 100")
    for _ in range(warmup):
        call()
    samples = np.empty(iterations)
    for i in range(iterations):
        t0 = time.perf_counter_ns()
        call()
        samples[i] = (time.perf_counter_ns() - t0) / 1000.0
    return LatencyStats(
        float(np.percentile(samples, 50)),
        float(np.percentile(samples, 95)),
        float(samples.mean()),
        iterations,
    )
