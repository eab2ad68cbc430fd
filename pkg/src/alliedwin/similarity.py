"""HSV histogram computation and correlation-based frame similarity."""
from __future__ import annotations

import numpy as np

from .core import DEFAULT_H_BINS, DEFAULT_S_BINS, Frame, Histogram
from .errors import BinMismatch, NoPayload


def hsv_histogram(frame: Frame, h_bins: int = DEFAULT_H_BINS, s_bins: int = DEFAULT_S_BINS) -> Histogram:
    """Histogram of a frame in HSV space (H bins then S bins, V ignored).

    Frames carrying only a surrogate histogram return it unchanged. Each
    channel section sums to the pixel count.
    """
    if frame.pixels is None:
        if frame.histogram is None:
            raise NoPayload("frame has neither pixels nor a surrogate histogram")
        return frame.histogram

    import cv2

    rgb = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(frame.height, frame.width, 3)
    hsv = cv2.cvtColor(rgb, cv2.COLOR_RGB2HSV)
    h_hist = cv2.calcHist([hsv], [0], None, [h_bins], [0, 180]).ravel()
    s_hist = cv2.calcHist([hsv], [1], None, [s_bins], [0, 256]).ravel()
    return Histogram(bins=tuple(float(v) for v in np.concatenate([h_hist, s_hist])))


def correlation(h1: Histogram, h2: Histogram) -> float:
    """Pearson correlation of two histograms, in [-1, 1].

    Constant (zero-variance) histograms are degenerate for the formula;
    two equal constant histograms count as identical (1.0), anything else
    involving a constant histogram scores 0.0 so static blanks still batch.
    """
    if h1.bin_count != h2.bin_count:
        raise BinMismatch(f"bin counts differ: {h1.bin_count} vs {h2.bin_count}")
    a = np.asarray(h1.bins, dtype=np.float64)
    b = np.asarray(h2.bins, dtype=np.float64)
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.dot(da, da))
    nb = float(np.dot(db, db))
    if na == 0.0 and nb == 0.0:
        return 1.0 if np.array_equal(a, b) else 0.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    # Clamp: with tiny (denormal) variances the float quotient can drift
    # marginally outside the mathematically guaranteed [-1, 1].
    return float(min(1.0, max(-1.0, np.dot(da, db) / np.sqrt(na * nb))))
