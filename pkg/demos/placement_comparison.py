"""Side-by-side comparison of the four placement modes.

All four modes consume the same synthetic stream and answer the same
query; the table shows how moving batching, resizing and filtering to the
edge changes bytes on the wire, message count and latency while the match
set stays the same.

Run:  python3 demos/placement_comparison.py
"""
from alliedwin import compare
from alliedwin.config import RunConfig
from alliedwin.ingest import ObjectTimeline, ScenarioConfig

SCENARIO = ScenarioConfig(
    duration_s=12,
    fps=15,
    motion_profile="increasing",
    seed=11,
    object_timelines=(
        ObjectTimeline("car", 0, 12000, 0.8),
        ObjectTimeline("person", 3000, 9000, 0.7),
    ),
)

QUERY = "MATCH CONJ(car, person) WITHIN WINDOW(4, 2) ACCURACY TOP-3"


def main():
    configs = [
        RunConfig(query_text=QUERY, mode=mode, scenario=SCENARIO, seed=SCENARIO.seed)
        for mode in ("vanilla", "content", "edge", "vidwin")
    ]
    table, results = compare(configs)
    print("12 s stream, 180 frames, CONJ(car, person) within win(4, 2)\n")
    print(table.render())

    print("\nmatches per mode (count, first few timestamps):")
    for result in results:
        stamps = sorted(m.match_ts for m in result.matches)
        head = ", ".join(str(t) for t in stamps[:6])
        tail = ", ..." if len(stamps) > 6 else ""
        print(f"  {result.config.mode:<8} {len(stamps):>4}  [{head}{tail}]")


if __name__ == "__main__":
    main()
