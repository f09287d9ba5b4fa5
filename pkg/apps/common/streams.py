"""Counter-derived random streams."""

from typing import Sequence

import numpy as np


def stream(seed: int, *counters: int) -> np.random.Generator:
    """
    Generator for the work unit addressed by ``counters`` under ``seed``.

    Streams for distinct counter tuples are statistically independent and
    do not depend on the order in which work units are executed.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(c) for c in counters))
    return np.random.Generator(np.random.PCG64(sequence))


def generator_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def restore_generator(state: dict) -> np.random.Generator:
    bit_generator = np.random.PCG64()
    bit_generator.state = state
    return np.random.Generator(bit_generator)


def permutation_key(permutation: Sequence[int]) -> str:
    return ''.join(str(int(level)) for level in permutation)
