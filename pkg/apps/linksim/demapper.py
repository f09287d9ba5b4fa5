"""Bit-metric soft demapping."""

from typing import Optional, Sequence

import numpy as np

from apps.constellation.channel import Constellation


def demap(y: np.ndarray, constellation: Constellation, include_priors: bool = True,
          permutation: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    L-values log P(B_i=0|y)/P(B_i=1|y) of every level, shape ``y.shape + (m,)``.

    With ``permutation``, column j holds the L-value of the physical level
    that carries code level j + 1. Without priors the input-prior term is
    removed, which is a no-op for uniform levels.
    """
    llrs = constellation.llr_values(y, include_priors=include_priors)
    if permutation is not None:
        llrs = llrs[..., np.asarray(permutation, dtype=int) - 1]
    return llrs


def modulate(code_bits: np.ndarray, constellation: Constellation,
             permutation: Optional[Sequence[int]] = None) -> np.ndarray:
    """Scaled amplitudes of the symbols labelled by ``code_bits`` (n_c, m)."""
    if permutation is None:
        physical = code_bits
    else:
        physical = np.empty_like(code_bits)
        physical[:, np.asarray(permutation, dtype=int) - 1] = code_bits
    return constellation.delta * constellation.points[constellation.point_index(physical)]
