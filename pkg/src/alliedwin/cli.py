"""Command-line entry point.

    alliedwin run --config cfg.json [--query ...] [--mode ...] [--seed N]
                  [--input manifest.jsonl | --scenario scenario.json]
                  [--filters eager,cache,utility] [--out-dir DIR]
    alliedwin compare --config a.json --config b.json [--out-dir DIR]

Exit codes: 0 success, 2 config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import List, Optional

from .config import FilterToggles, RunConfig, _scenario_from_dict, config_from_dict, load_config
from .errors import AlliedWinError, ConfigError
from .pipeline import compare, run, write_matches_jsonl


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alliedwin")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run one pipeline configuration")
    _add_run_flags(run_p)

    cmp_p = sub.add_parser("compare", help="run several configs side by side")
    cmp_p.add_argument("--config", action="append", required=True, dest="configs")
    cmp_p.add_argument("--out-dir", default=None)
    return parser


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--query", default=None, help="query text override")
    p.add_argument("--mode", default=None, choices=["vanilla", "content", "edge", "vidwin"])
    p.add_argument("--input", default=None, help="JSON-Lines frame manifest")
    p.add_argument("--scenario", default=None, help="synthetic scenario JSON file")
    p.add_argument("--filters", default=None, help="comma list from eager,cache,utility")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)


def _apply_overrides(config: Optional[RunConfig], args) -> RunConfig:
    data = {}
    if config is not None:
        data = _config_to_dict(config)
    if args.query is not None:
        data["query"] = args.query
    if args.mode is not None:
        data["mode"] = args.mode
    if args.input is not None:
        data["manifest"] = args.input
        data.pop("scenario", None)
    if args.scenario is not None:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            data["scenario"] = json.load(fh)
        data.pop("manifest", None)
    if args.seed is not None:
        data["seed"] = args.seed
        if data.get("scenario") is not None:
            data["scenario"]["seed"] = args.seed
    if args.filters is not None:
        wanted = {name.strip() for name in args.filters.split(",") if name.strip()}
        unknown = wanted - {"eager", "cache", "utility"}
        if unknown:
            raise ConfigError("filters", f"unknown filter(s) {sorted(unknown)}")
        data["filters"] = {name: name in wanted for name in ("eager", "cache", "utility")}
    return config_from_dict(data)


def _config_to_dict(config: RunConfig) -> dict:
    data = {
        "query": config.query_text,
        "mode": config.mode,
        "fps": config.fps,
        "seed": config.seed,
        "filters": dataclasses.asdict(config.filters),
        "attenuation": {
            "gamma": config.attenuation.gamma,
            "floor": config.attenuation.floor,
            "reference_resolution": [
                config.attenuation.reference_resolution.width,
                config.attenuation.reference_resolution.height,
            ],
        },
        "similarity_threshold": config.similarity_threshold,
        "mb_max": config.mb_max,
        "candidates": [[r.width, r.height] for r in config.candidates],
        "link": dataclasses.asdict(config.link),
        "meters": dataclasses.asdict(config.meters),
        "diff_coding": config.diff_coding,
        "compression": config.compression,
        "literal_entropy": config.literal_entropy,
        "roi_feedback": config.roi_feedback,
        "roi_warmup": config.roi_warmup,
        "distractors": [list(d) for d in config.distractors],
    }
    if config.manifest is not None:
        data["manifest"] = config.manifest
    if config.scenario is not None:
        sc = config.scenario
        data["scenario"] = {
            "duration_s": sc.duration_s,
            "fps": sc.fps,
            "width": sc.width,
            "height": sc.height,
            "motion_profile": sc.motion_profile,
            "iframe_interval": sc.iframe_interval,
            "seed": sc.seed,
            "stream_id": sc.stream_id,
            "object_timelines": [
                {
                    "label": tl.label,
                    "start_ms": tl.start_ms,
                    "end_ms": tl.end_ms,
                    "base_score": tl.base_score,
                    "score_amplitude": tl.score_amplitude,
                    "period_frames": tl.period_frames,
                    "bbox": list(tl.bbox) if tl.bbox else None,
                }
                for tl in sc.object_timelines
            ],
        }
    return data


def _write_outputs(result, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        fh.write(result.summary.to_json() + "\n")
    result.sink.write_csv(os.path.join(out_dir, "batches.csv"))
    write_matches_jsonl(os.path.join(out_dir, "matches.jsonl"), result)


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            base = load_config(args.config) if args.config else None
            config = _apply_overrides(base, args)
            result = run(config)
            if args.out_dir:
                _write_outputs(result, args.out_dir)
            print(result.summary.to_json())
            return 0
        # compare
        configs = [load_config(path) for path in args.configs]
        table, results = compare(configs)
        print(table.render())
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            for i, res in enumerate(results):
                _write_outputs(res, os.path.join(args.out_dir, f"run_{i}_{res.config.mode}"))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AlliedWinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
