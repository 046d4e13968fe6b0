"""Deterministic random number streams.

Every replica draws from its own PCG64 generator keyed by (seed,
stream_id), so results are reproducible bit for bit and independent of
how replicas are grouped into batches.  Uniforms are produced through a
block buffer; consuming them one at a time or in blocks yields the same
sequence.
"""

from __future__ import annotations

import numpy as np

_BUFFER_SIZE = 1024


class RngStream:
    """Buffered uniform stream for one replica.

    The jump kernel consumes exactly two uniforms per event, holding
    time first and jump selection second, through `take`.  Gaussian
    draws for the baselines come from the same underlying generator via
    the `generator` property; do not mix the two uses on one stream.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence((self.seed, self.stream_id))))
        self._buf = np.empty(0)
        self._pos = 0

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def take(self, k: int) -> np.ndarray:
        """Next k uniforms in [0, 1) as a fresh array."""
        out = np.empty(k)
        filled = 0
        while filled < k:
            if self._pos >= self._buf.size:
                size = max(_BUFFER_SIZE, k - filled)
                self._buf = self._gen.random(size)
                self._pos = 0
            m = min(k - filled, self._buf.size - self._pos)
            out[filled : filled + m] = self._buf[self._pos : self._pos + m]
            self._pos += m
            filled += m
        return out


def replica_stream(seed: int, replica: int) -> RngStream:
    """Stream for replica index `replica` under a master seed."""
    return RngStream(seed, replica)
