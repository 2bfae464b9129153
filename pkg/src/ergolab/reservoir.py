"""Lazily extended random bit streams with O(1) window reads.

The expanding-map orbit engine stores a point as an offset into an infinite
random binary expansion.  Shifting the expansion is the doubling map, so the
orbit position n is just a 64-bit window read starting at bit n.  Windows are
reproducible: the stream is generated in fixed-size chunks from a
counter-based generator, cached, and re-reads return identical bits.
"""

import numpy as np

from .rand import point_rng

WINDOW_BITS = 64
_CHUNK_BYTES = 1 << 12
_INV64 = 2.0 ** -64


class BitReservoir:
    """Seeded, append-only random bit stream.

    Parameters
    ----------
    seed, index : int
        Key of the per-point stream used to extend the buffer.
    prefix : bytes, optional
        Bits fixed in advance (used by conditioned samplers to pin the
        leading window); the stream continues past them.
    """

    __slots__ = ("seed", "index", "_prefix_len", "_buf", "_gen")

    def __init__(self, seed, index, prefix=b""):
        self.seed = int(seed)
        self.index = int(index)
        self._prefix_len = len(prefix)
        self._buf = np.frombuffer(prefix, dtype=np.uint8).copy() if prefix else np.empty(0, dtype=np.uint8)
        self._gen = None

    def _ensure_bytes(self, nbytes):
        if self._buf.size >= nbytes:
            return
        if self._gen is None:
            self._gen = point_rng(self.seed, self.index)
        grow = max(nbytes - self._buf.size, _CHUNK_BYTES)
        fresh = np.frombuffer(self._gen.bytes(grow), dtype=np.uint8)
        self._buf = np.concatenate([self._buf, fresh])

    def window(self, offset, width=WINDOW_BITS):
        """Bits offset..offset+width-1 as an unsigned integer (msb first)."""
        if offset < 0:
            raise ValueError("bit offset must be non-negative")
        first = offset >> 3
        last = (offset + width + 7) >> 3
        self._ensure_bytes(last + 1)
        raw = int.from_bytes(self._buf[first:last + 1].tobytes(), "big")
        nbits = (last + 1 - first) * 8
        return (raw >> (nbits - (offset - first * 8) - width)) & ((1 << width) - 1)

    def window_float(self, offset):
        """The 64-bit window at ``offset`` as a float in [0, 1)."""
        return self.window(offset) * _INV64

    def window_floats(self, offset, count):
        """Vector of window_float at offsets offset..offset+count-1."""
        if count <= 0:
            return np.empty(0)
        last_byte = (offset + count - 1 + WINDOW_BITS + 7) >> 3
        self._ensure_bytes(last_byte + 2)
        buf = self._buf
        offs = offset + np.arange(count, dtype=np.int64)
        byte_idx = offs >> 3
        shift = (offs & 7).astype(np.uint64)
        span_lo = int(byte_idx[0])
        span_hi = int(byte_idx[-1]) + 9
        span = buf[span_lo:span_hi + 1].astype(np.uint64)
        word = np.zeros(span.size - 8, dtype=np.uint64)
        for i in range(8):
            word |= span[i:i + word.size] << np.uint64(8 * (7 - i))
        rel = (byte_idx - span_lo).astype(np.int64)
        w = (word[rel] << shift) | (span[rel + 8] >> (np.uint64(8) - shift))
        return w.astype(np.float64) * _INV64


def bulk_window_floats(byte_rows, bit_offset):
    """Window floats at one bit offset across rows of a byte matrix.

    ``byte_rows`` has shape (n, m) with 8*m >= bit_offset + 64; used by the
    vectorized estimators that need many short independent bit streams.
    """
    b = bit_offset >> 3
    s = np.uint64(bit_offset & 7)
    cols = byte_rows[:, b:b + 9].astype(np.uint64)
    word = np.zeros(byte_rows.shape[0], dtype=np.uint64)
    for i in range(8):
        word |= cols[:, i] << np.uint64(8 * (7 - i))
    w = (word << s) | (cols[:, 8] >> (np.uint64(8) - s))
    return w.astype(np.float64) * _INV64
