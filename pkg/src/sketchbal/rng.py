"""Seeded random streams.

All randomness comes from numpy's Philox-4x64 counter-based bit generator.
Uniform doubles are taken from ``Generator.random``; Gaussian variates are
produced from pairs of uniforms by the Box-Muller transform implemented
here, so the normal stream does not depend on numpy's ziggurat tables.

Per-trial seeds follow ``base_seed * 1_000_003 + trial``. Inside a trial the
matrix generator uses ``trial_seed + MATRIX_OFFSET`` and the sketch
generator ``trial_seed + SKETCH_OFFSET``.
"""

import numpy as np

from .errors import ParameterError

SEED_MULTIPLIER = 1_000_003
MATRIX_OFFSET = 0
SKETCH_OFFSET = 1


def make_rng(seed):
    """Return a ``numpy.random.Generator`` over Philox seeded with ``seed``."""
    seed = int(seed)
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def trial_seed(base_seed, trial):
    return int(base_seed) * SEED_MULTIPLIER + int(trial)


def standard_normal(rng, shape):
    """Draw i.i.d. N(0, 1) variates of the given shape via Box-Muller."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    n = int(np.prod(shape, dtype=np.int64))
    half = (n + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    # 1 - u1 lies in (0, 1], keeps the log finite
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * half)
    z[0::2] = radius * np.cos(theta)
    z[1::2] = radius * np.sin(theta)
    return z[:n].reshape(shape)
