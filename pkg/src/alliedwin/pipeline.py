"""End-to-end pipeline wiring and the placement-mode scenario harness.

Modes:
  vanilla  frame-by-frame to the cloud, window after the detector
  content  batching + resizing applied cloud-side before the detector
  edge     batching + resizing applied edge-side, no filters
  vidwin   full two-stage pipeline with eager/cache/utility filters and
           diff+compressed transport

The whole pipeline runs on virtual time derived from frame timestamps,
stage cost tables and the link model, so every reported number is
deterministic for a given config and seed.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .classifier import SyntheticClassifier, SyntheticDetector
from .cloud import (
    CloudWindow,
    EventMatch,
    RoiState,
    event_accuracy,
    match,
    spatial_map_update,
)
from .config import RunConfig
from .core import Detection, Frame, MicroBatch, Query, Resolution
from .edge_window import EagerFilter, EdgeWindow, EmittedBatch
from .errors import MismatchedInputs
from .filtering import PartialMatchCache, ResourceMeters, cache_filter, mb_utility, resource_filter
from .ingest import FrameStream, generate_synthetic, load_manifest
from .metrics import BatchRecord, MetricsSink, SummaryReport
from .query import parse_query, validate_query
from .resizer import ResolutionSelector, crop_batch, resize_batch
from .transport import LinkModel, WireMessage, decode_batch, encode_batch


@dataclass
class RunResult:
    config: RunConfig
    summary: SummaryReport
    matches: List[EventMatch]
    window_accuracies: List[float]
    sink: MetricsSink
    roi: RoiState

    @property
    def match_identities(self) -> frozenset:
        return frozenset(m.identity for m in self.matches)


class _CloudSide:
    """Detector + cloud window + matcher, evaluated at every slide boundary."""

    def __init__(
        self,
        q: Query,
        start_ms: int,
        detector: SyntheticDetector,
        ground_truth: Sequence[Detection],
    ):
        self.q = q
        self.window = CloudWindow(q.window, start_ms)
        self.detector = detector
        self.ground_truth = sorted(ground_truth, key=lambda d: d.ts_ms)
        self.matches: List[EventMatch] = []
        self._seen = set()
        self.window_accuracies: List[float] = []
        self.roi = RoiState()
        self.frames_delivered = 0

    def deliver(self, frame: Frame) -> None:
        while frame.ts_ms >= self.window.end_ms:
            self._evaluate()
            self.window.slide()
        detections = self.detector.detect(frame)
        self.window.ingest(detections)
        spatial_map_update(self.roi, detections, self.q, frame.width, frame.height)
        self.frames_delivered += 1

    def finish(self) -> None:
        self._evaluate()

    def _evaluate(self) -> None:
        state = self.window.state()
        found = match(state, self.q, self.window.unit_id)
        start, end = self.window.start_ms, self.window.end_ms
        gt_state = [d for d in self.ground_truth if start <= d.ts_ms < end]
        gt_count = len(match(gt_state, self.q, self.window.unit_id))
        if gt_count >= 1:
            self.window_accuracies.append(event_accuracy(len(found), gt_count))
        for m in found:
            if m.identity not in self._seen:
                self._seen.add(m.identity)
                self.matches.append(m)


def _read_frames(config: RunConfig) -> List[Frame]:
    if config.scenario is not None:
        stream: FrameStream = generate_synthetic(config.scenario)
    else:
        stream = load_manifest(config.manifest)
    return list(stream)


def run(config: RunConfig) -> RunResult:
    """Execute one pipeline run in the configured placement mode."""
    q = parse_query(config.query_text)
    validate_query(q)
    frames = _read_frames(config)

    detector = SyntheticDetector(config.attenuation)
    classifier = SyntheticClassifier(config.attenuation, config.distractors)
    sink = MetricsSink(config.mode, config.seed)
    link = LinkModel(
        bandwidth_bytes_per_s=config.link.bandwidth_bytes_per_s,
        propagation_ms=config.link.propagation_ms,
    )

    if not frames:
        empty = sink.report(bytes_sent=0, messages_sent=0)
        return RunResult(config, empty, [], [], sink, RoiState())

    t0 = frames[0].ts_ms
    sink.first_ts_ms = t0
    ground_truth = [d for f in frames for d in detector.detect(f)]
    cloud = _CloudSide(q, t0, detector, ground_truth)

    if config.mode == "vanilla":
        _run_per_frame(config, q, frames, cloud, sink, link, batch_cloud_side=False)
    elif config.mode == "content":
        _run_per_frame(config, q, frames, cloud, sink, link, batch_cloud_side=True,
                       classifier=classifier)
    else:  # edge, vidwin
        _run_edge(config, q, frames, cloud, sink, link, classifier)

    cloud.finish()
    sink.frames_delivered = cloud.frames_delivered
    sink.match_count = len(cloud.matches)
    sink.event_accuracies = cloud.window_accuracies
    summary = sink.report(bytes_sent=link.bytes_sent, messages_sent=link.messages_sent)
    return RunResult(config, summary, cloud.matches, cloud.window_accuracies, sink, cloud.roi)


def _run_per_frame(
    config: RunConfig,
    q: Query,
    frames: Sequence[Frame],
    cloud: _CloudSide,
    sink: MetricsSink,
    link: LinkModel,
    batch_cloud_side: bool,
    classifier: Optional[SyntheticClassifier] = None,
) -> None:
    fps = config.effective_fps
    dnn_ms = config.meters.dnn_cost_ms_per_frame
    edge_win = None
    selector = None
    if batch_cloud_side:
        edge_win = EdgeWindow(
            q.window, fps, config.similarity_threshold, config.mb_max
        )
        selector = ResolutionSelector(classifier.classify, config.candidates)

    def deliver_batch(emitted: EmittedBatch, arrival_ms: float) -> None:
        mb = emitted.batch
        res = selector.select_resolution(mb.keyframe, q)
        resized = resize_batch(mb, res)
        for f in resized.frames:
            cloud.deliver(f)
        sink.last_arrival_ms = max(
            sink.last_arrival_ms, arrival_ms + dnn_ms * resized.size
        )

    for frame in frames:
        sink.frames_ingested += 1
        sink.bytes_raw += frame.raw_bytes
        delivery = link.transmit(frame.raw_bytes, frame.ts_ms)
        l_transmit = delivery.arrival_ms - frame.ts_ms
        sink.add_record(
            BatchRecord(
                batch_id=sink.frames_ingested - 1,
                unit_id=cloud.window.unit_id,
                size=1,
                width=frame.width,
                height=frame.height,
                split_reason="per_frame",
                utility=None,
                decision="forwarded",
                frames_dropped=0,
                wire_bytes=frame.raw_bytes,
                l_batch_ms=0.0,
                l_transmit_ms=l_transmit,
                l_dnn_ms=dnn_ms,
            )
        )
        if batch_cloud_side:
            for emitted in edge_win.advance(frame):
                deliver_batch(emitted, delivery.arrival_ms)
        else:
            cloud.deliver(frame)
            sink.last_arrival_ms = max(sink.last_arrival_ms, delivery.arrival_ms + dnn_ms)

    if batch_cloud_side:
        last_arrival = sink.last_arrival_ms
        for emitted in edge_win.finish():
            deliver_batch(emitted, last_arrival)


def _run_edge(
    config: RunConfig,
    q: Query,
    frames: Sequence[Frame],
    cloud: _CloudSide,
    sink: MetricsSink,
    link: LinkModel,
    classifier: SyntheticClassifier,
) -> None:
    is_vidwin = config.mode == "vidwin"
    fps = config.effective_fps
    meters = ResourceMeters(
        mem_capacity_bytes=config.meters.mem_capacity_bytes,
        cpu_capacity_ms=1000.0 * config.meters.cores,
    )
    edge_win = EdgeWindow(q.window, fps, config.similarity_threshold, config.mb_max)
    selector = ResolutionSelector(classifier.classify, config.candidates)
    eager = EagerFilter(config.mb_max)
    cache = PartialMatchCache()
    cache_unit = -1
    batch_ms = config.meters.batch_cost_ms_per_frame
    dnn_ms = config.meters.dnn_cost_ms_per_frame
    edge_ms = config.meters.edge_cpu_cost_ms_per_frame

    def process(emitted: EmittedBatch) -> None:
        nonlocal cache_unit
        mb = emitted.batch
        now_ms = mb.frames[-1].ts_ms + batch_ms * mb.size
        l_batch = (mb.frames[-1].ts_ms - mb.frames[0].ts_ms) + batch_ms * mb.size

        if emitted.unit_id != cache_unit:
            cache.reset()
            cache_unit = emitted.unit_id

        def record(decision: str, resized: Optional[MicroBatch], utility, dropped: int,
                   wire_bytes: int, l_transmit: float, l_dnn: float) -> None:
            shown = resized if resized is not None else mb
            sink.add_record(
                BatchRecord(
                    batch_id=mb.batch_id,
                    unit_id=emitted.unit_id,
                    size=mb.size,
                    width=shown.resolution.width,
                    height=shown.resolution.height,
                    split_reason=mb.split_reason.value,
                    utility=utility,
                    decision=decision,
                    frames_dropped=dropped,
                    wire_bytes=wire_bytes,
                    l_batch_ms=l_batch,
                    l_transmit_ms=l_transmit,
                    l_dnn_ms=l_dnn,
                )
            )

        if is_vidwin and config.filters.eager and not eager.forward(mb):
            sink.drop_frames("eager", mb.size)
            record("eager_drop", None, None, mb.size, 0, 0.0, 0.0)
            return

        res = selector.select_resolution(mb.keyframe, q)
        resized = resize_batch(mb, res)
        scores = classifier.classify(mb.keyframe, res)
        frame_bytes = res.pixel_count * 3
        meters.enqueue(frame_bytes * resized.size)

        if is_vidwin and config.filters.cache:
            if not cache_filter(resized, scores, cache, q):
                meters.dequeue(frame_bytes * resized.size)
                sink.drop_frames("cache", mb.size)
                record("cache_drop", resized, None, mb.size, 0, 0.0, 0.0)
                return

        utility_value = None
        dropped = 0
        if is_vidwin and config.filters.utility and q.has_bounds:
            breakdown = mb_utility(
                scores,
                q,
                mb_size=resized.size,
                frames_processed=mb.created_at,
                window_size=emitted.unit_size_frames,
                literal=config.literal_entropy,
            )
            utility_value = breakdown.mb_utility
            kept = resource_filter(
                resized, breakdown, q, meters, int(now_ms), frame_bytes, dnn_ms
            )
            dropped = resized.size - kept.size
            if dropped:
                sink.drop_frames("utility", dropped)
            resized = kept

        if config.roi_feedback:
            rect = _combined_roi(cloud.roi, q, config.roi_warmup)
            if rect is not None:
                resized = crop_batch(resized, rect)

        diff = config.diff_coding if is_vidwin else False
        compress = config.compression if is_vidwin else False
        msg = encode_batch(resized, emitted.unit_id, diff=diff, compress=compress)
        wire_bytes = msg.total_bytes
        delivery = link.transmit(wire_bytes, now_ms)
        meters.dequeue(frame_bytes * resized.size)

        decoded = decode_batch(WireMessage.from_bytes(msg.to_bytes()))
        for f in decoded.frames:
            cloud.deliver(f)

        l_transmit = delivery.arrival_ms - now_ms
        l_dnn = dnn_ms * resized.size
        sink.last_arrival_ms = max(sink.last_arrival_ms, delivery.arrival_ms + l_dnn)
        record(
            "utility_trim" if dropped else "forwarded",
            resized,
            utility_value,
            dropped,
            wire_bytes,
            l_transmit,
            l_dnn,
        )

    for frame in frames:
        sink.frames_ingested += 1
        sink.bytes_raw += frame.raw_bytes
        meters.add_cpu(frame.ts_ms, edge_ms)
        for emitted in edge_win.advance(frame):
            process(emitted)
    for emitted in edge_win.finish():
        process(emitted)


def _combined_roi(roi: RoiState, q: Query, warmup: int):
    """Union of per-label ROIs once every query label has warmed up."""
    rects = []
    for label in q.objects:
        if roi.observations.get(label, 0) < warmup:
            return None
        rects.append(roi.rects[label])
    x0 = min(r[0] for r in rects)
    y0 = min(r[1] for r in rects)
    x1 = max(r[2] for r in rects)
    y1 = max(r[3] for r in rects)
    return (x0, y0, x1, y1)


# -- run comparison ------------------------------------------------------------


@dataclass
class ComparisonTable:
    labels: List[str]
    metrics: Dict[str, List[float]]

    def deltas(self, metric: str) -> List[float]:
        values = self.metrics[metric]
        return [v - values[0] for v in values]

    def render(self) -> str:
        width = max(len(m) for m in self.metrics) + 2
        col = 18
        lines = [" " * width + "".join(label.rjust(col) for label in self.labels)]
        for metric, values in self.metrics.items():
            lines.append(
                metric.ljust(width) + "".join(f"{v:>{col}.4g}" for v in values)
            )
        return "\n".join(lines)


_COMPARE_METRICS = (
    "frames_ingested",
    "frames_delivered",
    "messages_sent",
    "bytes_sent",
    "bandwidth_saving",
    "throughput_fps",
    "weighted_latency_ms",
    "match_count",
    "mean_event_accuracy",
)


def compare(configs: Sequence[RunConfig]) -> Tuple[ComparisonTable, List[RunResult]]:
    """Run several configs over the same input and tabulate their metrics."""
    if len(configs) < 2:
        raise MismatchedInputs("need at least two configs to compare")
    key = configs[0].input_key
    for cfg in configs[1:]:
        if cfg.input_key != key:
            raise MismatchedInputs("configs must share input and seed")
    results = [run(cfg) for cfg in configs]
    table = ComparisonTable(
        labels=[cfg.mode for cfg in configs],
        metrics={
            metric: [float(getattr(r.summary, metric)) for r in results]
            for metric in _COMPARE_METRICS
        },
    )
    return table, results


def write_matches_jsonl(path: str, result: RunResult) -> None:
    """Match output: one JSON object per detected pattern instance."""
    with open(path, "w", encoding="utf-8") as fh:
        for m in result.matches:
            fh.write(
                json.dumps(
                    {
                        "query": result.config.query_text,
                        "window_unit": m.window_unit,
                        "match_ts": m.match_ts,
                        "contributors": [
                            {"label": d.label, "ts_ms": d.ts_ms, "score": d.score}
                            for d in m.contributors
                        ],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
