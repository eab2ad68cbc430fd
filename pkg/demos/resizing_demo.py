"""Query-aware resolution selection on a keyframe.

A car annotation is scored by the synthetic classifier at each candidate
resolution. Scores attenuate as the frame shrinks while distractor classes
keep fixed scores, so below some resolution the car drops out of the
query's top-k and the selector has to step up.

Run:  python3 demos/resizing_demo.py
"""
from alliedwin import ResolutionSelector, parse_query
from alliedwin.classifier import SyntheticClassifier
from alliedwin.core import Annotation, Frame, Histogram
from alliedwin.resizer import DEFAULT_CANDIDATES


def keyframe(base_score: float) -> Frame:
    return Frame(
        stream_id=0,
        ts_ms=0,
        width=1920,
        height=1080,
        histogram=Histogram(bins=(1.0, 2.0, 3.0)),
        annotations=(Annotation("car", base_score),),
    )


def main():
    clf = SyntheticClassifier(distractors=[("chair", 0.58), ("sofa", 0.55)])
    query = parse_query("MATCH OBJECT(car) WITHIN WINDOW(5, 5) ACCURACY TOP-2")

    print("car base score 0.8, distractors chair=0.58 sofa=0.55, TOP-2 query\n")
    frame = keyframe(0.8)
    print(f"{'resolution':<12} {'car score':>10} {'car rank':>9}  in top-2?")
    for res in DEFAULT_CANDIDATES:
        scores = {s.label: s for s in clf.classify(frame, res)}
        car = scores["car"]
        print(
            f"{res.width}x{res.height:<7} {car.score:>10.3f} {car.rank:>9}  "
            f"{'yes' if car.rank <= query.top_k else 'no'}"
        )

    selector = ResolutionSelector(clf.classify)
    chosen = selector.select_resolution(frame, query)
    print(f"\nselected: {chosen.width}x{chosen.height} "
          f"(minimal resolution keeping the car in the top-2)")
    print(f"probes used: {selector.probe_count}")

    # A second, similar keyframe: the selector seeds its search from the
    # previous answer instead of restarting the binary search.
    selector.probe_count = 0
    again = selector.select_resolution(keyframe(0.82), query)
    print(f"next keyframe: {again.width}x{again.height} with "
          f"{selector.probe_count} probes (seeded from the previous pick)")


if __name__ == "__main__":
    main()
