"""Seedable, portable random number generation.

All stochastic operations take an explicit numpy Generator backed by
PCG64, so replays are exact across platforms. Episode-level generators
are derived from (run seed, batch index, episode index) via SeedSequence
spawning, which keeps every episode individually replayable.
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def episode_rng(run_seed: int, batch_index: int, episode_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=run_seed, spawn_key=(batch_index, episode_index))
    return np.random.Generator(np.random.PCG64(ss))
