"""Seeded random streams.

Every stream is a Philox counter-based generator keyed by ``(seed, stream)``
through ``numpy.random.SeedSequence``, so outputs do not depend on how many
other streams were drawn or in which order.
"""

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def sample_indices(probabilities: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of ``n`` flat indices from a (renormalized) table."""
    p = np.asarray(probabilities, dtype=float).ravel()
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(idx, p.size - 1)
