"""
Surrogate channels matched to bit-level uncertainties.

A bit-channel with uncertainty H(B_i|L_i) is replaced either by a BEC with
erasure probability H(B_i|L_i) or by a biAWGN channel whose consistent
Gaussian L-values have deviation sigma with 1 - J(sigma) = H(B_i|L_i).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from apps.common.exceptions import DomainError
from apps.constellation.channel import UncertaintySet
from apps.surrogates.jfunction import j_inverse


class SurrogateKind(Enum):
    """Surrogate channel families"""
    BEC = "bec"
    BIAWGN = "biawgn"


@dataclass(frozen=True, eq=False)
class SurrogateVector:
    """
    Per-level surrogate parameters.

    Attributes:
        kind: surrogate family
        params: erasure probabilities (BEC) or L-value deviations (biAWGN),
            one per bit level
    """
    kind: SurrogateKind
    params: np.ndarray

    def __post_init__(self):
        params = np.array(self.params, dtype=float)
        if params.ndim != 1 or not np.all(np.isfinite(params)):
            raise DomainError("surrogate parameters must be a finite vector")
        if self.kind is SurrogateKind.BEC and (np.any(params < 0) or np.any(params > 1)):
            raise DomainError("erasure probabilities must lie in [0, 1]")
        if self.kind is SurrogateKind.BIAWGN and np.any(params < 0):
            raise DomainError("surrogate deviations must be non-negative")
        params.setflags(write=False)
        object.__setattr__(self, 'params', params)

    @property
    def m(self) -> int:
        return self.params.size

    def per_variable_node(self, levels: Sequence[int]) -> np.ndarray:
        """Replicate level parameters to variable nodes carried on ``levels`` (1-based)."""
        return self.params[np.asarray(levels, dtype=int) - 1]

    def density(self, level: int, llr: np.ndarray) -> np.ndarray:
        """Surrogate L-value density given bit 0 (biAWGN only)."""
        if self.kind is not SurrogateKind.BIAWGN:
            raise DomainError("densities are defined for biAWGN surrogates")
        sigma = self.params[level - 1]
        llr = np.asarray(llr, dtype=float)
        if sigma == 0:
            return np.where(llr == 0, np.inf, 0.0)
        return np.exp(-0.5 * ((llr - 0.5 * sigma ** 2) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))


def match_bec(uncertainties: UncertaintySet) -> SurrogateVector:
    return SurrogateVector(SurrogateKind.BEC, np.array(uncertainties.h_cond, dtype=float))


def match_biawgn(uncertainties: UncertaintySet) -> SurrogateVector:
    """
    biAWGN deviations with 1 - J(sigma_i) = H(B_i|L_i).

    Raises:
        DomainError: an uncertainty lies outside [0, 1].
    """
    h_cond = np.asarray(uncertainties.h_cond, dtype=float)
    if np.any(h_cond < 0) or np.any(h_cond > 1):
        raise DomainError(f"uncertainties must lie in [0, 1], got {h_cond.tolist()}")
    return SurrogateVector(SurrogateKind.BIAWGN, np.atleast_1d(j_inverse(1.0 - h_cond)))


def match(uncertainties: UncertaintySet, kind: SurrogateKind) -> SurrogateVector:
    if kind is SurrogateKind.BEC:
        return match_bec(uncertainties)
    return match_biawgn(uncertainties)
