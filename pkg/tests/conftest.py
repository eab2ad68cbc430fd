import random

import pytest

from alliedwin.core import Frame, Histogram


@pytest.fixture
def rng():
    return random.Random(20240817)


def surrogate_frame(ts_ms, bins, width=1920, height=1080, iframe=False, annotations=(), stream_id=0):
    return Frame(
        stream_id=stream_id,
        ts_ms=ts_ms,
        width=width,
        height=height,
        histogram=Histogram(bins=tuple(float(v) for v in bins)),
        iframe=iframe,
        annotations=tuple(annotations),
    )


def pixel_frame(ts_ms, width, height, pixels=None, iframe=False, annotations=(), fill=0):
    if pixels is None:
        pixels = bytes([fill % 256]) * (width * height * 3)
    return Frame(
        stream_id=0,
        ts_ms=ts_ms,
        width=width,
        height=height,
        pixels=pixels,
        iframe=iframe,
        annotations=tuple(annotations),
    )
