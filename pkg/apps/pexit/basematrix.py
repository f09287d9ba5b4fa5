"""Protograph basematrices and their column-to-level assignment."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import InvalidBasematrixError


def default_level_order(m: int) -> Tuple[int, ...]:
    """Column groups carry bit levels (2, ..., m, 1); level 1 is placed last."""
    return tuple(range(2, m + 1)) + (1,)


def is_feasible(a: np.ndarray, min_degree: int = 2) -> bool:
    """True when every row and column sum of ``a`` reaches ``min_degree``."""
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0 or np.any(a < 0):
        return False
    return bool(a.sum(axis=0).min() >= min_degree and a.sum(axis=1).min() >= min_degree)


@dataclass(frozen=True, eq=False)
class Basematrix:
    """
    Protograph basematrix A = [a_lk] of size M x N.

    Attributes:
        a: nonnegative integer entries, a_lk edges between check l and variable k
        d_per_level: D, number of variable nodes per bit level (N = D m)
        level_order: bit level carried by each column group of size D
        s_max: largest admissible entry S
        min_degree: smallest admissible row and column sum
    """
    a: np.ndarray
    d_per_level: int
    level_order: Optional[Tuple[int, ...]] = None
    s_max: Optional[int] = None
    min_degree: int = field(default=2, repr=False)

    def __post_init__(self):
        a = np.array(self.a)
        if a.ndim != 2 or a.size == 0:
            raise InvalidBasematrixError("basematrix must be a non-empty 2-D array", 'matrix')
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise InvalidBasematrixError("basematrix entries must be integers", 'matrix')
        a = a.astype(np.int64)
        if np.any(a < 0):
            raise InvalidBasematrixError("basematrix entries must be nonnegative", 'matrix')

        d = int(self.d_per_level)
        if d < 1 or a.shape[1] % d:
            raise InvalidBasematrixError(
                f"N={a.shape[1]} is not a multiple of D={self.d_per_level}", 'd_per_level'
            )
        m = a.shape[1] // d
        order = default_level_order(m) if self.level_order is None else tuple(int(v) for v in self.level_order)
        if sorted(order) != list(range(1, m + 1)):
            raise InvalidBasematrixError(f"{list(order)} is not a permutation of 1..{m}", 'level_order')

        s_max = int(a.max()) if self.s_max is None else int(self.s_max)
        if a.max() > s_max:
            raise InvalidBasematrixError(f"entry {int(a.max())} exceeds S={s_max}", 'matrix')
        if not is_feasible(a, self.min_degree):
            raise InvalidBasematrixError(
                f"row and column sums must be >= {self.min_degree}, got columns "
                f"{a.sum(axis=0).tolist()} and rows {a.sum(axis=1).tolist()}", 'matrix'
            )

        a.setflags(write=False)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'd_per_level', d)
        object.__setattr__(self, 'level_order', order)
        object.__setattr__(self, 's_max', s_max)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.a.shape

    @property
    def M(self) -> int:
        return self.a.shape[0]

    @property
    def N(self) -> int:
        return self.a.shape[1]

    @property
    def m(self) -> int:
        return self.N // self.d_per_level

    @property
    def rate(self) -> float:
        return (self.N - self.M) / self.N

    @property
    def key(self) -> bytes:
        """Content key for memoization."""
        return self.a.tobytes() + bytes(self.a.shape)

    @property
    def max_column_sum(self) -> int:
        return int(self.a.sum(axis=0).max())

    @property
    def column_levels(self) -> np.ndarray:
        """Bit level (1-based) carried by each variable node."""
        return np.repeat(np.asarray(self.level_order, dtype=int), self.d_per_level)

    def columns_of_level(self, level: int) -> np.ndarray:
        return np.flatnonzero(self.column_levels == level)

    def expand(self, level_params: Sequence[float]) -> np.ndarray:
        """Replicate one parameter per bit level to the N variable nodes."""
        level_params = np.asarray(level_params, dtype=float)
        if level_params.shape != (self.m,):
            raise InvalidBasematrixError(
                f"expected {self.m} level parameters, got shape {level_params.shape}"
            )
        return level_params[self.column_levels - 1]

    def to_dict(self) -> dict:
        return {
            'matrix': self.a.tolist(),
            'd_per_level': self.d_per_level,
            'level_order': list(self.level_order),
            's_max': self.s_max,
            'min_degree': self.min_degree,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Basematrix':
        return cls(
            a=np.asarray(data['matrix']),
            d_per_level=data['d_per_level'],
            level_order=data.get('level_order'),
            s_max=data.get('s_max'),
            min_degree=data.get('min_degree', 2),
        )

    def __eq__(self, other):
        if not isinstance(other, Basematrix):
            return NotImplemented
        return (self.a.shape == other.a.shape and np.array_equal(self.a, other.a)
                and self.d_per_level == other.d_per_level and self.level_order == other.level_order)

    def __hash__(self):
        return hash((self.key, self.d_per_level, self.level_order))
