"""
Run metrics for the quantum-measure toolkit

Counters and a duration histogram kept in a private registry, written in the
Prometheus text format when --metrics-out is given. Nothing recorded here
ever appears in a report.
"""

import logging
import os
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

import psutil
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

logger = logging.getLogger(__name__)

# Private registry so repeated runs in one process never clash with the default one
REGISTRY = CollectorRegistry()

commands_total = Counter(
    'qmeasure_commands_total',
    'Total number of toolkit commands run',
    ['command', 'status'],
    registry=REGISTRY
)

command_duration = Histogram(
    'qmeasure_command_duration_seconds',
    'Toolkit command duration in seconds',
    ['command'],
    buckets=(0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0),
    registry=REGISTRY
)

events_scanned_total = Counter(
    'qmeasure_events_scanned_total',
    'Events whose measure was evaluated',
    registry=REGISTRY
)

coevents_found_total = Counter(
    'qmeasure_coevents_found_total',
    'Coevents found by the solver',
    registry=REGISTRY
)

peak_rss_bytes = Gauge(
    'qmeasure_rss_bytes',
    'Resident set size at the end of the last command',
    registry=REGISTRY
)


def current_rss() -> int:
    """Resident set size of this process in bytes."""
    return psutil.Process(os.getpid()).memory_info().rss


@contextmanager
def track_command(command: str) -> Iterator[Dict[str, float]]:
    """
    Time one command and count its outcome.

    Yields a dict that receives wall_time_seconds and rss_bytes on exit.
    """
    timing: Dict[str, float] = {}
    start = time.perf_counter()
    status = "error"
    try:
        yield timing
        status = "ok"
    finally:
        elapsed = time.perf_counter() - start
        rss = current_rss()
        timing["wall_time_seconds"] = elapsed
        timing["rss_bytes"] = float(rss)
        commands_total.labels(command=command, status=status).inc()
        command_duration.labels(command=command).observe(elapsed)
        peak_rss_bytes.set(rss)
        logger.debug(f"Command {command} finished with status {status} in {elapsed:.3f}s")


def record_scan(events: int) -> None:
    events_scanned_total.inc(events)


def record_coevents(count: int) -> None:
    coevents_found_total.inc(count)


def export_metrics(path: Optional[str]) -> None:
    """Write the registry to a textfile; no-op without a path."""
    if not path:
        return
    write_to_textfile(path, REGISTRY)
    logger.info(f"📊 Metrics written to {path}")
