"""Counter-based random streams for reproducible parallel Monte Carlo.

A stream is addressed by ``(master_seed, stream_id)``.  Streams are backed
by the Philox counter-based bit generator keyed through
``numpy.random.SeedSequence``, so the same address yields the same draw
sequence on every run and platform, and distinct addresses give
statistically independent streams.  Replica- or batch-parallel drivers
derive one stream per work unit and merge results in work-unit order,
which makes every estimate independent of the worker count.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream"]


@dataclass(frozen=True)
class RngStream:
    """Address of a reproducible random stream.

    Parameters
    ----------
    master_seed : int
        64-bit experiment seed.
    stream_id : int
        Nonnegative substream index (replica, batch, or grid-cell index).
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.stream_id < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self, *sub: int) -> np.random.Generator:
        """Instantiate the Philox generator for this stream.

        Extra ``sub`` indices address nested substreams (e.g. a batch
        within a grid cell) without advancing or sharing any state.
        """
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_id, *sub)
        )
        return np.random.Generator(np.random.Philox(seq))

    def substream(self, index: int) -> "RngStream":
        """Stream for work unit ``index`` under the same master seed.

        Only valid on a root stream (``stream_id == 0``); nested
        derivation should use ``generator(*sub)`` instead so that
        addresses never collide.
        """
        if self.stream_id != 0:
            raise ValueError("substream() is reserved for root streams")
        return RngStream(self.master_seed, index)
