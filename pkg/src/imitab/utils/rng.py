import numpy as np


def child_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit seed for the stream addressed by `path` under `seed`."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(sequence.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    # Philox is counter-based, so streams from distinct child seeds never overlap
    return np.random.Generator(np.random.Philox(int(seed)))


def draw_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    cdf = np.cumsum(probs)
    index = int(np.searchsorted(cdf, rng.random(), side="right"))
    # rounding can leave cdf[-1] just below u; fall back to the last entry with mass
    return min(index, int(np.flatnonzero(probs)[-1]))
