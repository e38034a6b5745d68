"""Seedable, counter-based random streams.

Every stochastic routine takes an explicit ``numpy.random.Generator``; these
helpers build them on top of Philox so substreams can be split off
deterministically (one per copy, per repetition, per worker).
"""

import numpy as np


def make_rng(seed=None):
    """Return a Philox-backed Generator. Generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def seed_token(seed):
    """Replay token recorded in results: the integer seed, if one was given."""
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    return None


def spawn(rng, count):
    """Split ``count`` independent child streams off ``rng``."""
    return [np.random.Generator(np.random.Philox(ss))
            for ss in rng.bit_generator.seed_seq.spawn(count)]


def derive(seed, *path):
    """Stream for a fixed position in an experiment grid, e.g. (seed, point, rep)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, path)])))
