"""Run configuration: schema, defaults and dict/file loading."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .classifier import AttenuationParams
from .core import DEFAULT_MB_MAX, DEFAULT_SIMILARITY_THRESHOLD, Resolution
from .errors import ConfigError
from .ingest import ObjectTimeline, ScenarioConfig
from .resizer import DEFAULT_CANDIDATES

MODES = ("vanilla", "content", "edge", "vidwin")


@dataclass(frozen=True)
class FilterToggles:
    eager: bool = True
    cache: bool = True
    utility: bool = True


@dataclass(frozen=True)
class LinkConfig:
    bandwidth_bytes_per_s: float = 12_500_000.0  # 100 Mbit/s
    propagation_ms: float = 10.0


@dataclass(frozen=True)
class MeterConfig:
    mem_capacity_bytes: int = 2_000_000_000
    cores: int = 1
    edge_cpu_cost_ms_per_frame: float = 2.0
    batch_cost_ms_per_frame: float = 1.0
    dnn_cost_ms_per_frame: float = 5.0


@dataclass(frozen=True)
class RunConfig:
    query_text: str
    mode: str = "vidwin"
    scenario: Optional[ScenarioConfig] = None
    manifest: Optional[str] = None
    fps: int = 30  # used for manifest inputs; scenarios carry their own
    seed: int = 0
    filters: FilterToggles = FilterToggles()
    attenuation: AttenuationParams = AttenuationParams()
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    mb_max: int = DEFAULT_MB_MAX
    candidates: Tuple[Resolution, ...] = DEFAULT_CANDIDATES
    link: LinkConfig = LinkConfig()
    meters: MeterConfig = MeterConfig()
    diff_coding: bool = True
    compression: bool = True
    literal_entropy: bool = False
    roi_feedback: bool = False
    roi_warmup: int = 10
    distractors: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        if not self.query_text:
            raise ConfigError("query")
        if (self.scenario is None) == (self.manifest is None):
            raise ConfigError("scenario|manifest", "exactly one input is required")

    @property
    def effective_fps(self) -> int:
        return self.scenario.fps if self.scenario is not None else self.fps

    @property
    def input_key(self) -> tuple:
        """Identity of the input stream, for run comparisons."""
        if self.manifest is not None:
            return ("manifest", self.manifest)
        return ("scenario", self.scenario, self.seed)


def _scenario_from_dict(data: dict) -> ScenarioConfig:
    try:
        timelines = tuple(
            ObjectTimeline(
                label=tl["label"],
                start_ms=int(tl["start_ms"]),
                end_ms=int(tl["end_ms"]),
                base_score=float(tl["base_score"]),
                score_amplitude=float(tl.get("score_amplitude", 0.0)),
                period_frames=int(tl.get("period_frames", 60)),
                bbox=tuple(tl["bbox"]) if tl.get("bbox") else None,
            )
            for tl in data.get("object_timelines", [])
        )
        return ScenarioConfig(
            duration_s=float(data["duration_s"]),
            fps=int(data.get("fps", 30)),
            width=int(data.get("width", 1920)),
            height=int(data.get("height", 1080)),
            object_timelines=timelines,
            motion_profile=data.get("motion_profile", "slow"),
            iframe_interval=int(data.get("iframe_interval", 0)),
            seed=int(data.get("seed", 0)),
            stream_id=int(data.get("stream_id", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"scenario.{exc}", str(exc)) from exc


def config_from_dict(data: dict) -> RunConfig:
    """Build a RunConfig from a plain dict (e.g. a parsed JSON config file)."""
    if "query" not in data:
        raise ConfigError("query")
    scenario = None
    if data.get("scenario") is not None:
        scenario = _scenario_from_dict(data["scenario"])

    filters = data.get("filters", {})
    link = data.get("link", {})
    meters = data.get("meters", {})
    att = data.get("attenuation", {})
    try:
        candidates = tuple(
            Resolution(int(w), int(h)) for w, h in data.get("candidates", [])
        ) or DEFAULT_CANDIDATES
        return RunConfig(
            query_text=data["query"],
            mode=data.get("mode", "vidwin"),
            scenario=scenario,
            manifest=data.get("manifest"),
            fps=int(data.get("fps", 30)),
            seed=int(data.get("seed", scenario.seed if scenario else 0)),
            filters=FilterToggles(
                eager=bool(filters.get("eager", True)),
                cache=bool(filters.get("cache", True)),
                utility=bool(filters.get("utility", True)),
            ),
            attenuation=AttenuationParams(
                gamma=float(att.get("gamma", 0.15)),
                floor=float(att.get("floor", 0.5)),
                reference_resolution=Resolution(
                    *att.get("reference_resolution", (1920, 1080))
                ),
            ),
            similarity_threshold=float(
                data.get("similarity_threshold", DEFAULT_SIMILARITY_THRESHOLD)
            ),
            mb_max=int(data.get("mb_max", DEFAULT_MB_MAX)),
            candidates=candidates,
            link=LinkConfig(
                bandwidth_bytes_per_s=float(
                    link.get("bandwidth_bytes_per_s", 12_500_000.0)
                ),
                propagation_ms=float(link.get("propagation_ms", 10.0)),
            ),
            meters=MeterConfig(
                mem_capacity_bytes=int(meters.get("mem_capacity_bytes", 2_000_000_000)),
                cores=int(meters.get("cores", 1)),
                edge_cpu_cost_ms_per_frame=float(
                    meters.get("edge_cpu_cost_ms_per_frame", 2.0)
                ),
                batch_cost_ms_per_frame=float(meters.get("batch_cost_ms_per_frame", 1.0)),
                dnn_cost_ms_per_frame=float(meters.get("dnn_cost_ms_per_frame", 5.0)),
            ),
            diff_coding=bool(data.get("diff_coding", True)),
            compression=bool(data.get("compression", True)),
            literal_entropy=bool(data.get("literal_entropy", False)),
            roi_feedback=bool(data.get("roi_feedback", False)),
            roi_warmup=int(data.get("roi_warmup", 10)),
            distractors=tuple(
                (str(label), float(score)) for label, score in data.get("distractors", [])
            ),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "bad value") from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(path, str(exc)) from exc
    return config_from_dict(data)
