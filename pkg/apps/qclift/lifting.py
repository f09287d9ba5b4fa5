"""
Quasi-cyclic lifting of basematrices.

Every base edge becomes a Q x Q circulant P_s; the a_lk edges of one cell get
pairwise distinct shifts so parallel edges are resolved. Shifts are chosen by
a randomized hill-climb that lowers the lifted 4-cycle count first and the
6-cycle count second.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from apps.common.exceptions import DomainError
from apps.common.streams import stream
from apps.pexit.basematrix import Basematrix
from apps.qclift.cycles import CycleCounter, base_edges
from constants import QCLIFT

logger = logging.getLogger('protoshape.qclift')

Shifts = Tuple[Tuple[Tuple[int, ...], ...], ...]


def codeword_layout(base: Basematrix, q: int) -> np.ndarray:
    """
    Lifted column carried by each transmitted bit position.

    Positions hold (B_2, ..., B_m) symbol by symbol followed by the n_c bits of
    level 1. Symbol i takes its level-j bit from the i-th lifted column of the
    level-j group, so each group occupies a contiguous block of Q D columns.
    """
    n_c = q * base.d_per_level
    groups = {level: index for index, level in enumerate(base.level_order)}
    symbols = np.arange(n_c)
    amplitude = [groups[level] * n_c + symbols for level in range(2, base.m + 1)]
    amplitude = np.stack(amplitude, axis=1).ravel() if amplitude else np.zeros(0, dtype=np.int64)
    return np.concatenate([amplitude, groups[1] * n_c + symbols]).astype(np.int64)


@dataclass(frozen=True, eq=False)
class QCCode:
    """
    Quasi-cyclic code lifted from ``base`` by a factor ``q``.

    Attributes:
        base: the protograph basematrix
        q: lifting factor Q
        shifts: shifts[l][k] holds the a_lk distinct circulant offsets of cell (l, k)
        seed: seed of the lifting run that produced the shifts
        four_cycles: lifted 4-cycle count
        six_cycles: lifted 6-cycle count, None when not enumerated
        encoder: systematic encoder, attached by ``encoder_prep``
    """
    base: Basematrix
    q: int
    shifts: Shifts
    seed: int = 0
    four_cycles: int = 0
    six_cycles: Optional[int] = None
    encoder: Optional[object] = field(default=None, repr=False)

    def __post_init__(self):
        a = self.base.a
        if len(self.shifts) != a.shape[0] or any(len(row) != a.shape[1] for row in self.shifts):
            raise DomainError("shift table does not match the basematrix shape")
        for (l, k), entry in np.ndenumerate(a):
            cell = self.shifts[l][k]
            if len(cell) != entry or len(set(cell)) != entry:
                raise DomainError(f"cell ({l}, {k}) needs {entry} distinct shifts, got {list(cell)}")
            if any(not 0 <= s < self.q for s in cell):
                raise DomainError(f"cell ({l}, {k}) has shifts outside 0..{self.q - 1}")

    @property
    def n(self) -> int:
        return self.q * self.base.N

    @property
    def rows(self) -> int:
        return self.q * self.base.M

    @property
    def n_c(self) -> int:
        return self.n // self.base.m

    @property
    def k(self) -> int:
        """Systematic bits per codeword; dependent checks found by the encoder raise it above n - rows."""
        if self.encoder is not None:
            return self.encoder.k
        return self.n - self.rows

    def edge_shifts(self) -> np.ndarray:
        """Shift of every base edge in ``base_edges`` order."""
        return np.array([s for row in self.shifts for cell in row for s in cell], dtype=np.int64)

    @cached_property
    def parity_check(self) -> sparse.csr_matrix:
        q = self.q
        checks, variables = base_edges(self.base.a)
        shifts = self.edge_shifts()
        copies = np.arange(q)
        rows = (checks[:, None] * q + copies[None, :]).ravel()
        columns = (variables[:, None] * q + (copies[None, :] + shifts[:, None]) % q).ravel()
        data = np.ones(rows.size, dtype=np.uint8)
        return sparse.csr_matrix((data, (rows, columns)), shape=(self.rows, self.n))

    @cached_property
    def layout(self) -> np.ndarray:
        return codeword_layout(self.base, self.q)

    def syndrome(self, codeword: np.ndarray) -> np.ndarray:
        """Syndrome of a codeword in lifted column order."""
        return (self.parity_check @ np.asarray(codeword, dtype=np.int64)) % 2

    def with_encoder(self, encoder) -> 'QCCode':
        return replace(self, encoder=encoder)

    def to_dict(self) -> dict:
        return {
            'base': self.base.to_dict(),
            'q': self.q,
            'shifts': [[list(cell) for cell in row] for row in self.shifts],
            'seed': self.seed,
            'four_cycles': self.four_cycles,
            'six_cycles': self.six_cycles,
            'n': self.n,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'QCCode':
        return cls(
            base=Basematrix.from_dict(data['base']),
            q=int(data['q']),
            shifts=_freeze(data['shifts']),
            seed=int(data.get('seed', 0)),
            four_cycles=int(data.get('four_cycles', 0)),
            six_cycles=data.get('six_cycles'),
        )


def _freeze(shifts) -> Shifts:
    return tuple(tuple(tuple(int(s) for s in cell) for cell in row) for row in shifts)


def _shift_table(a: np.ndarray, flat: np.ndarray) -> Shifts:
    table, cursor = [], 0
    for row in a:
        cells = []
        for entry in row:
            cells.append(tuple(int(s) for s in flat[cursor:cursor + entry]))
            cursor += entry
        table.append(tuple(cells))
    return tuple(table)


class ShiftClimber:
    """
    Randomized hill-climb over circulant shifts.

    A move picks an edge on a closed walk of the shortest length that still
    closes and draws a new shift for it, unused within its cell. Moves that
    do not worsen (4-cycles, 6-cycles) lexicographically are kept.
    """

    def __init__(self, base: Basematrix, q: int, rng: np.random.Generator,
                 max_moves: int = QCLIFT['MAX_MOVES']):
        self.base = base
        self.q = q
        self.rng = rng
        self.max_moves = max_moves
        self.counter = CycleCounter(base.a, q)
        checks, variables = base_edges(base.a)
        self.cells = checks * base.N + variables

    def initial(self) -> np.ndarray:
        shifts = []
        for entry in self.base.a.ravel():
            shifts.extend(self.rng.choice(self.q, size=int(entry), replace=False).tolist())
        return np.array(shifts, dtype=np.int64)

    def _score(self, closed: dict) -> Tuple[int, int]:
        four = self.counter.lifted(4, closed[4].sum())
        six = self.counter.lifted(6, closed[6].sum()) if 6 in closed else 0
        return four, six

    def _propose(self, shifts: np.ndarray, edge: int) -> Optional[int]:
        used = shifts[self.cells == self.cells[edge]]
        free = np.setdiff1d(np.arange(self.q), used)
        if free.size == 0:
            return None
        return int(self.rng.choice(free))

    def climb(self, shifts: np.ndarray) -> Tuple[np.ndarray, int, Optional[int]]:
        counter = self.counter
        lengths = [g for g in (4, 6) if counter.walks[g] is not None]
        closed = {g: counter.closing(g, shifts) for g in lengths}
        score = self._score(closed)
        moves = 0
        for moves in range(1, self.max_moves + 1):
            target = next((g for g in lengths if closed[g].any()), None)
            if target is None:
                break
            walk = counter.walks[target][self.rng.choice(np.flatnonzero(closed[target]))]
            edge = int(self.rng.choice(walk))
            value = self._propose(shifts, edge)
            if value is None:
                continue
            trial = shifts.copy()
            trial[edge] = value
            updated = {g: closed[g].copy() for g in lengths}
            for g in lengths:
                rows = counter.members[g][edge]
                updated[g][rows] = counter.closing(g, trial, rows)
            trial_score = self._score(updated)
            if trial_score <= score:
                shifts, closed, score = trial, updated, trial_score
        logger.debug("shift climb finished after %d moves with score %s", moves, score)
        return shifts, score[0], (score[1] if counter.counts_six else None)


def lift(a: Basematrix, q: int, seed: int = 0, max_moves: int = QCLIFT['MAX_MOVES'],
         allow_tight: bool = False) -> QCCode:
    """
    Lift ``a`` by ``q`` with girth-driven shift selection; deterministic given ``seed``.

    ``q`` must reach twice the largest entry so parallel edges can be resolved
    without in-cell 4-cycles; ``allow_tight`` accepts any ``q`` that still
    holds the distinct shifts of every cell. A code that keeps 4-cycles after
    the move budget is returned as it is, carrying its 4-cycle count.

    Raises:
        DomainError: ``q`` is below the admissible minimum.
    """
    q = int(q)
    largest = int(a.a.max())
    if q < max(largest, 1):
        raise DomainError(f"lifting factor {q} cannot resolve {largest} parallel edges")
    if q < 2 * largest:
        if not allow_tight:
            raise DomainError(f"lifting factor {q} is below twice the largest entry {largest}")
        logger.warning("lifting factor %d is below twice the largest entry %d", q, largest)
    climber = ShiftClimber(a, q, stream(seed), max_moves=max_moves)
    shifts, four, six = climber.climb(climber.initial())
    if four:
        logger.warning("lifted code keeps %d 4-cycles (Q=%d, seed=%d)", four, q, seed)
    logger.info("lifted %dx%d basematrix by Q=%d: 4-cycles=%d 6-cycles=%s",
                a.M, a.N, q, four, six)
    return QCCode(base=a, q=q, shifts=_shift_table(a.a, shifts), seed=int(seed),
                  four_cycles=four, six_cycles=six)
