"""Counter-based random streams.

Each stream is a Philox-4x64 generator keyed by ``(master seed, index)``.
The high word of the counter carries a domain tag so that, for the same
seed and index, resampling, data synthesis and coverage trials never share
random numbers. Streams can be created in any order, on any thread, and
always produce the same sequence.
"""

import numpy as np

RESAMPLE = 0
SYNTH = 1
COVERAGE = 2

MASK64 = (1 << 64) - 1


def stream(seed: int, index: int, domain: int = RESAMPLE) -> np.random.Generator:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= index <= MASK64:
        raise ValueError(f"stream index out of range: {index}")
    key = np.array([seed, index], dtype=np.uint64)
    counter = np.array([0, 0, 0, domain], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
