"""
Short-cycle counting for quasi-cyclic liftings.

A closed non-backtracking walk of length 2g on the base graph, entered at a
check node, lifts to Q closed walks; it closes in the lifted graph iff the
alternating sum of its shifts vanishes mod Q. Each lifted cycle of length 2g
is met by 2g walks in the base enumeration (g check entry points, two
directions), so the lifted count is Q * closed / (2g).
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from constants import QCLIFT

logger = logging.getLogger('protoshape.qclift')


def base_edges(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Check and variable index of every base edge, cells in row-major order."""
    rows, columns = np.nonzero(a)
    counts = a[rows, columns]
    return np.repeat(rows, counts), np.repeat(columns, counts)


def _neighbors(groups: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR table of the other edges sharing each edge's group."""
    edges = np.arange(groups.size)
    lists = [edges[(groups == groups[e]) & (edges != e)] for e in edges]
    lengths = np.array([item.size for item in lists], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
    flat = np.concatenate(lists) if lists else np.zeros(0, dtype=np.int64)
    return offsets, lengths, flat.astype(np.int64)


def _extend(walks: np.ndarray, table, budget: int) -> Optional[np.ndarray]:
    offsets, lengths, flat = table
    last = walks[:, -1]
    counts = lengths[last]
    total = int(counts.sum())
    if total > budget:
        return None
    starts = np.repeat(offsets[last] - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    following = flat[starts + np.arange(total)]
    return np.column_stack([np.repeat(walks, counts, axis=0), following])


def closed_walks(a: np.ndarray, length: int, budget: int = QCLIFT['PATH_BUDGET']) -> Optional[np.ndarray]:
    """
    Edge sequences of the closed non-backtracking base walks of ``length``
    edges, or None when the enumeration exceeds ``budget`` walks.
    """
    checks, variables = base_edges(np.asarray(a))
    by_variable = _neighbors(variables)
    by_check = _neighbors(checks)
    walks = np.arange(checks.size, dtype=np.int64)[:, None]
    for step in range(1, length):
        walks = _extend(walks, by_variable if step % 2 else by_check, budget)
        if walks is None:
            return None
    closing = (checks[walks[:, -1]] == checks[walks[:, 0]]) & (walks[:, -1] != walks[:, 0])
    return walks[closing]


class CycleCounter:
    """
    Incremental 4- and 6-cycle counts for shift vectors over a fixed base.

    ``shifts`` is indexed by base edge in the order of ``base_edges``.
    """

    def __init__(self, a: np.ndarray, q: int, budget: int = QCLIFT['PATH_BUDGET']):
        self.q = int(q)
        self.walks = {4: closed_walks(a, 4, np.iinfo(np.int64).max), 6: closed_walks(a, 6, budget)}
        if self.walks[6] is None:
            logger.info("6-cycle enumeration exceeds %d walks; counting 4-cycles only", budget)
        self._signs = {g: np.where(np.arange(g) % 2 == 0, 1, -1) for g in (4, 6)}
        edge_count = int(np.asarray(a).sum())
        self.members = {g: self._membership(w, edge_count) for g, w in self.walks.items() if w is not None}

    @staticmethod
    def _membership(walks: np.ndarray, edge_count: int) -> List[np.ndarray]:
        flat = walks.ravel()
        order = np.argsort(flat, kind='stable')
        rows = order // walks.shape[1]
        bounds = np.searchsorted(flat[order], np.arange(edge_count + 1))
        return [np.unique(rows[bounds[e]:bounds[e + 1]]) for e in range(edge_count)]

    @property
    def counts_six(self) -> bool:
        return self.walks[6] is not None

    def closing(self, length: int, shifts: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
        walks = self.walks[length]
        if rows is not None:
            walks = walks[rows]
        return (shifts[walks] @ self._signs[length]) % self.q == 0

    def lifted(self, length: int, closed: int) -> int:
        return self.q * int(closed) // length

    def count(self, shifts: np.ndarray) -> Tuple[int, Optional[int]]:
        """Lifted (4-cycle, 6-cycle) counts; the latter is None beyond the walk budget."""
        four = self.lifted(4, self.closing(4, shifts).sum())
        six = self.lifted(6, self.closing(6, shifts).sum()) if self.counts_six else None
        return four, six


def brute_force_four_cycles(h: np.ndarray) -> int:
    """4-cycles of a dense binary matrix: pairs of rows sharing two columns."""
    h = np.asarray(h, dtype=np.int64)
    overlap = h @ h.T
    upper = np.triu(overlap, k=1)
    return int((upper * (upper - 1) // 2).sum())
