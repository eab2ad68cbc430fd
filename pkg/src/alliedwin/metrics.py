"""Latency, throughput, bandwidth and filtering accounting for a run."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from .errors import LengthMismatch


def batch_latency(l_batch_ms: float, l_transmit_ms: float, l_dnn_ms: float) -> float:
    """End-to-end latency of one batch: batching + transmission + inference."""
    if min(l_batch_ms, l_transmit_ms, l_dnn_ms) < 0:
        raise ValueError("latency components must be non-negative")
    return l_batch_ms + l_transmit_ms + l_dnn_ms


def weighted_batch_latency(latencies_ms: Sequence[float], sizes: Sequence[int]) -> float:
    """Mean batch latency weighted by batch size."""
    if len(latencies_ms) != len(sizes):
        raise LengthMismatch(f"{len(latencies_ms)} latencies vs {len(sizes)} sizes")
    if not sizes:
        return 0.0
    if any(s <= 0 for s in sizes):
        raise ValueError("batch sizes must be positive")
    total = sum(s for s in sizes)
    return sum(l * s for l, s in zip(latencies_ms, sizes)) / total


@dataclass
class BatchRecord:
    """One CSV row per transmitted (or dropped) batch."""

    batch_id: int
    unit_id: int
    size: int
    width: int
    height: int
    split_reason: str
    utility: Optional[float]
    decision: str  # forwarded | eager_drop | cache_drop | utility_trim
    frames_dropped: int
    wire_bytes: int
    l_batch_ms: float
    l_transmit_ms: float
    l_dnn_ms: float

    @property
    def latency_ms(self) -> float:
        return batch_latency(self.l_batch_ms, self.l_transmit_ms, self.l_dnn_ms)


@dataclass(frozen=True)
class SummaryReport:
    mode: str
    seed: int
    frames_ingested: int
    frames_delivered: int
    frames_dropped_eager: int
    frames_dropped_cache: int
    frames_dropped_utility: int
    messages_sent: int
    bytes_sent: int
    bytes_raw: int
    bandwidth_saving: float
    throughput_fps: float
    weighted_latency_ms: float
    match_count: int
    mean_event_accuracy: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @property
    def filtered_fraction(self) -> float:
        if self.frames_ingested == 0:
            return 0.0
        dropped = (
            self.frames_dropped_eager
            + self.frames_dropped_cache
            + self.frames_dropped_utility
        )
        return dropped / self.frames_ingested


class MetricsSink:
    """Append-only per-run collector; single writer."""

    def __init__(self, mode: str, seed: int):
        self.mode = mode
        self.seed = seed
        self.records: List[BatchRecord] = []
        self.frames_ingested = 0
        self.frames_dropped: Dict[str, int] = {"eager": 0, "cache": 0, "utility": 0}
        self.frames_delivered = 0
        self.bytes_raw = 0
        self.match_count = 0
        self.event_accuracies: List[float] = []
        self.last_arrival_ms = 0.0
        self.first_ts_ms: Optional[int] = None

    def add_record(self, record: BatchRecord) -> None:
        self.records.append(record)

    def drop_frames(self, stage: str, count: int) -> None:
        self.frames_dropped[stage] += count

    def report(self, bytes_sent: int, messages_sent: int) -> SummaryReport:
        forwarded = [r for r in self.records if r.decision in ("forwarded", "utility_trim")]
        latencies = [r.latency_ms for r in forwarded]
        sizes = [r.size - r.frames_dropped for r in forwarded]
        pairs = [(l, s) for l, s in zip(latencies, sizes) if s > 0]
        weighted = weighted_batch_latency([p[0] for p in pairs], [p[1] for p in pairs])
        duration_s = 0.0
        if self.first_ts_ms is not None and self.last_arrival_ms > self.first_ts_ms:
            duration_s = (self.last_arrival_ms - self.first_ts_ms) / 1000.0
        throughput = self.frames_delivered / duration_s if duration_s > 0 else 0.0
        saving = 1.0 - (bytes_sent / self.bytes_raw) if self.bytes_raw else 0.0
        mean_acc = (
            sum(self.event_accuracies) / len(self.event_accuracies)
            if self.event_accuracies
            else 0.0
        )
        return SummaryReport(
            mode=self.mode,
            seed=self.seed,
            frames_ingested=self.frames_ingested,
            frames_delivered=self.frames_delivered,
            frames_dropped_eager=self.frames_dropped["eager"],
            frames_dropped_cache=self.frames_dropped["cache"],
            frames_dropped_utility=self.frames_dropped["utility"],
            messages_sent=messages_sent,
            bytes_sent=bytes_sent,
            bytes_raw=self.bytes_raw,
            bandwidth_saving=saving,
            throughput_fps=throughput,
            weighted_latency_ms=weighted,
            match_count=self.match_count,
            mean_event_accuracy=mean_acc,
        )

    def write_csv(self, path: str) -> None:
        fields = [
            "batch_id", "unit_id", "size", "width", "height", "split_reason",
            "utility", "decision", "frames_dropped", "wire_bytes",
            "l_batch_ms", "l_transmit_ms", "l_dnn_ms",
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for rec in self.records:
                writer.writerow({k: getattr(rec, k) for k in fields})
