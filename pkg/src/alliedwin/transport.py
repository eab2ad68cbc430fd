"""Wire codec for micro-batches and the simulated edge-to-cloud link.

Message layout (all little-endian):

    magic           4 bytes  b"VWIN"
    version         u16
    stream_id       u64
    window_unit_id  u64
    batch_id        u64
    keyframe_ts_ms  u64
    frame_count     u32
    width           u16
    height          u16
    flags           u8   bit0 diff-coded, bit1 compressed,
                         bit2 surrogate payload, bit3 metadata section
    ts_deltas       u32 * frame_count (ms offsets from keyframe_ts_ms)
    payload         see below

The payload starts with a u32-length-prefixed JSON metadata section
(annotations, iframe flags, split reason), followed by one fixed-size block
per frame: raw RGB8 pixels, or float64 histogram bins in surrogate mode.
When diff-coded, every non-key block is the byte-wise difference modulo 256
against the keyframe block. When compressed, the whole payload is DEFLATE
(RFC 1951).
"""
from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .core import Annotation, Frame, Histogram, MicroBatch, Resolution, SplitReason
from .errors import BadMagic, CorruptPayload, MixedResolution, VersionMismatch

MAGIC = b"VWIN"
VERSION = 1

FLAG_DIFF = 0x01
FLAG_COMPRESSED = 0x02
FLAG_SURROGATE = 0x04
FLAG_META = 0x08

_HEADER = struct.Struct("<4sHQQQQIHHB")


@dataclass(frozen=True)
class WireMessage:
    stream_id: int
    window_unit_id: int
    batch_id: int
    keyframe_ts_ms: int
    frame_count: int
    width: int
    height: int
    flags: int
    ts_deltas: Tuple[int, ...]
    payload: bytes

    @property
    def header_bytes(self) -> int:
        return _HEADER.size + 4 * self.frame_count

    @property
    def total_bytes(self) -> int:
        return self.header_bytes + len(self.payload)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(
            MAGIC,
            VERSION,
            self.stream_id,
            self.window_unit_id,
            self.batch_id,
            self.keyframe_ts_ms,
            self.frame_count,
            self.width,
            self.height,
            self.flags,
        )
        deltas = struct.pack(f"<{self.frame_count}I", *self.ts_deltas)
        return head + deltas + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "WireMessage":
        if len(data) < _HEADER.size:
            raise CorruptPayload("message shorter than header")
        magic, version, stream_id, unit_id, batch_id, kf_ts, count, w, h, flags = (
            _HEADER.unpack_from(data)
        )
        if magic != MAGIC:
            raise BadMagic(f"bad magic {magic!r}")
        if version != VERSION:
            raise VersionMismatch(f"version {version}, expected {VERSION}")
        delta_end = _HEADER.size + 4 * count
        if len(data) < delta_end:
            raise CorruptPayload("truncated timestamp deltas")
        deltas = struct.unpack_from(f"<{count}I", data, _HEADER.size)
        return cls(
            stream_id=stream_id,
            window_unit_id=unit_id,
            batch_id=batch_id,
            keyframe_ts_ms=kf_ts,
            frame_count=count,
            width=w,
            height=h,
            flags=flags,
            ts_deltas=deltas,
            payload=data[delta_end:],
        )


def _frame_block(frame: Frame, surrogate: bool) -> bytes:
    if surrogate:
        return np.asarray(frame.histogram.bins, dtype="<f8").tobytes()
    return frame.pixels


def _diff(block: bytes, key: bytes) -> bytes:
    a = np.frombuffer(block, dtype=np.uint8)
    k = np.frombuffer(key, dtype=np.uint8)
    return (a - k).tobytes()  # uint8 arithmetic wraps modulo 256


def _undiff(residual: bytes, key: bytes) -> bytes:
    r = np.frombuffer(residual, dtype=np.uint8)
    k = np.frombuffer(key, dtype=np.uint8)
    return (r + k).tobytes()


def encode_batch(
    mb: MicroBatch,
    window_unit_id: int = 0,
    diff: bool = True,
    compress: bool = True,
) -> WireMessage:
    """Deterministically encode a micro-batch as one wire message."""
    frames = mb.frames
    w, h = frames[0].width, frames[0].height
    for f in frames:
        if f.width != w or f.height != h:
            raise MixedResolution(f"{f.width}x{f.height} in a {w}x{h} batch")
    surrogate = frames[0].pixels is None
    for f in frames:
        if (f.pixels is None) != surrogate:
            raise MixedResolution("pixel and surrogate frames mixed in one batch")
    if surrogate:
        bin_count = frames[0].histogram.bin_count
        for f in frames:
            if f.histogram.bin_count != bin_count:
                raise MixedResolution("histogram bin counts differ within batch")

    meta = {
        "split_reason": mb.split_reason.value,
        "created_at": mb.created_at,
        "iframes": [f.iframe for f in frames],
        "annotations": [
            [
                {"label": a.label, "base_score": a.base_score, "bbox": a.bbox}
                for a in f.annotations
            ]
            for f in frames
        ],
    }
    if surrogate:
        meta["bin_count"] = frames[0].histogram.bin_count
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()

    blocks = [_frame_block(f, surrogate) for f in frames]
    if diff:
        key = blocks[0]
        blocks = [key] + [_diff(b, key) for b in blocks[1:]]
    payload = struct.pack("<I", len(meta_bytes)) + meta_bytes + b"".join(blocks)
    if compress:
        co = zlib.compressobj(9, zlib.DEFLATED, -15)  # raw DEFLATE, RFC 1951
        payload = co.compress(payload) + co.flush()

    flags = FLAG_META
    if diff:
        flags |= FLAG_DIFF
    if compress:
        flags |= FLAG_COMPRESSED
    if surrogate:
        flags |= FLAG_SURROGATE

    kf_ts = frames[0].ts_ms
    return WireMessage(
        stream_id=frames[0].stream_id,
        window_unit_id=window_unit_id,
        batch_id=mb.batch_id,
        keyframe_ts_ms=kf_ts,
        frame_count=len(frames),
        width=w,
        height=h,
        flags=flags,
        ts_deltas=tuple(f.ts_ms - kf_ts for f in frames),
        payload=payload,
    )


def decode_batch(msg: WireMessage) -> MicroBatch:
    """Reconstruct the micro-batch; bit-identical to the encoder input."""
    payload = msg.payload
    if msg.flags & FLAG_COMPRESSED:
        try:
            payload = zlib.decompress(payload, -15)
        except zlib.error as exc:
            raise CorruptPayload(f"decompression failed: {exc}") from exc

    if len(payload) < 4:
        raise CorruptPayload("payload shorter than metadata length prefix")
    (meta_len,) = struct.unpack_from("<I", payload)
    meta_end = 4 + meta_len
    if len(payload) < meta_end:
        raise CorruptPayload("truncated metadata section")
    try:
        meta = json.loads(payload[4:meta_end])
    except json.JSONDecodeError as exc:
        raise CorruptPayload(f"bad metadata JSON: {exc}") from exc

    surrogate = bool(msg.flags & FLAG_SURROGATE)
    if surrogate:
        block_size = int(meta["bin_count"]) * 8
    else:
        block_size = msg.width * msg.height * 3
    body = payload[meta_end:]
    if len(body) != block_size * msg.frame_count:
        raise CorruptPayload(
            f"payload body is {len(body)} bytes, expected {block_size * msg.frame_count}"
        )
    blocks = [body[i * block_size : (i + 1) * block_size] for i in range(msg.frame_count)]
    if msg.flags & FLAG_DIFF and blocks:
        key = blocks[0]
        blocks = [key] + [_undiff(b, key) for b in blocks[1:]]

    frames: List[Frame] = []
    for i, block in enumerate(blocks):
        annotations = tuple(
            Annotation(
                label=a["label"],
                base_score=a["base_score"],
                bbox=tuple(a["bbox"]) if a.get("bbox") else None,
            )
            for a in meta["annotations"][i]
        )
        if surrogate:
            bins = tuple(float(v) for v in np.frombuffer(block, dtype="<f8"))
            frame = Frame(
                stream_id=msg.stream_id,
                ts_ms=msg.keyframe_ts_ms + msg.ts_deltas[i],
                width=msg.width,
                height=msg.height,
                histogram=Histogram(bins=bins),
                iframe=meta["iframes"][i],
                annotations=annotations,
            )
        else:
            frame = Frame(
                stream_id=msg.stream_id,
                ts_ms=msg.keyframe_ts_ms + msg.ts_deltas[i],
                width=msg.width,
                height=msg.height,
                pixels=block,
                iframe=meta["iframes"][i],
                annotations=annotations,
            )
        frames.append(frame)

    return MicroBatch(
        batch_id=msg.batch_id,
        frames=tuple(frames),
        resolution=Resolution(msg.width, msg.height),
        split_reason=SplitReason(meta["split_reason"]),
        created_at=int(meta["created_at"]),
    )


@dataclass(frozen=True)
class Delivery:
    arrival_ms: float
    bytes: int


@dataclass
class LinkModel:
    """Lossless FIFO link: arrival = send + propagation + size / bandwidth."""

    bandwidth_bytes_per_s: float
    propagation_ms: float = 0.0
    bytes_sent: int = 0
    messages_sent: int = 0
    _busy_until_ms: float = 0.0

    def transmit(self, nbytes: int, send_time_ms: float) -> Delivery:
        start = max(send_time_ms, self._busy_until_ms)
        serialize_ms = nbytes / self.bandwidth_bytes_per_s * 1000.0
        self._busy_until_ms = start + serialize_ms
        self.bytes_sent += nbytes
        self.messages_sent += 1
        return Delivery(arrival_ms=self._busy_until_ms + self.propagation_ms, bytes=nbytes)
