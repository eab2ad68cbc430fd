"""Two-stage edge/cloud allied windowing for complex event matching over
video frame streams."""

from .classifier import AttenuationParams, SyntheticClassifier, SyntheticDetector, attenuation
from .cloud import CloudWindow, EventMatch, RoiState, event_accuracy, match, spatial_map_update
from .config import FilterToggles, LinkConfig, MeterConfig, RunConfig, config_from_dict, load_config
from .core import (
    Annotation,
    ClassScore,
    Detection,
    Frame,
    Histogram,
    MicroBatch,
    Query,
    Resolution,
    SplitReason,
    WindowSpec,
)
from .edge_window import EagerFilter, EdgeWindow, EmittedBatch
from .filtering import (
    PartialMatchCache,
    ResourceMeters,
    UtilityBreakdown,
    cache_filter,
    entropy_combine,
    mb_accuracy,
    mb_rpi,
    mb_utility,
    mb_win_remain,
    resource_filter,
    update_meters,
)
from .ingest import FrameStream, ObjectTimeline, ScenarioConfig, generate_synthetic, load_manifest
from .metrics import MetricsSink, SummaryReport, batch_latency, weighted_batch_latency
from .pipeline import RunResult, compare, run, write_matches_jsonl
from .query import VOC_LABELS, parse_query, render_query, validate_query
from .resizer import (
    DEFAULT_CANDIDATES,
    ResolutionSelector,
    crop_batch,
    multi_object_guard,
    resize_batch,
)
from .similarity import correlation, hsv_histogram
from .transport import LinkModel, WireMessage, decode_batch, encode_batch

__version__ = "0.1.0"
