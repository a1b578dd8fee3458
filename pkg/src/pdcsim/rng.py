"""Counter-based random substreams.

Monte-Carlo work is cut into fixed-size blocks. Each block gets its own
Philox generator keyed by ``(seed, stream, *counters)``, so a block's random
numbers depend only on its index and never on how many blocks ran before or
which worker ran it.
"""

import numpy as np

BLOCK_SIZE = 1 << 16

# stream identifiers; distinct streams never share key material
PHOTONS = 0
DETECTION = 1
GAIN = 2
SPECTROMETER = 3
GAIN_PHOTONS = 4


def substream(seed, stream, *counters):
    """Return a generator for one (seed, stream, counters...) cell."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), *map(int, counters)))
    return np.random.Generator(np.random.Philox(ss))


def blocks(n_items, block_size=BLOCK_SIZE):
    """Yield ``(block_index, start, stop)`` covering ``range(n_items)``."""
    for b, start in enumerate(range(0, n_items, block_size)):
        yield b, start, min(start + block_size, n_items)
