"""
Protograph EXIT recursions over parallel surrogate channels.

Both recursions use a flooding schedule: all variable-to-check messages are
computed from the previous state, then all check-to-variable messages, then
the APP mutual information. Entries of the state at cells with a_lk = 0 are
held at 0 and never enter a sum or product.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from apps.common.exceptions import DomainError, NumericalError
from apps.pexit.basematrix import Basematrix
from apps.surrogates.jfunction import JTable, j_table
from apps.surrogates.matching import SurrogateKind
from constants import PEXIT

logger = logging.getLogger('protoshape.pexit')

MatrixLike = Union[Basematrix, np.ndarray]


@dataclass(frozen=True)
class MIState:
    """Mutual information carried by the protograph edges at iteration ``iteration``."""
    i_ev: np.ndarray
    i_ec: np.ndarray
    i_app: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, rows: int, columns: int) -> 'MIState':
        return cls(
            i_ev=np.zeros((rows, columns)),
            i_ec=np.zeros((rows, columns)),
            i_app=np.zeros(columns),
        )

    @property
    def min_app(self) -> float:
        return float(self.i_app.min())


@dataclass(frozen=True)
class ExitRun:
    """Outcome of iterating one channel-parameter vector."""
    state: MIState
    converged: bool

    @property
    def iterations(self) -> int:
        return self.state.iteration


def _entries(a: MatrixLike) -> np.ndarray:
    entries = a.a if isinstance(a, Basematrix) else np.asarray(a, dtype=np.int64)
    if entries.ndim != 2 or np.any(entries < 0):
        raise DomainError("basematrix entries must form a nonnegative 2-D array")
    return entries


def converged(state: MIState, delta: float = PEXIT['DELTA']) -> bool:
    """True iff every APP mutual information reached 1 - delta."""
    return bool(state.i_app.min() >= 1.0 - delta)


class ProtographExit:
    """
    P-EXIT kernel for one basematrix.

    Masks and exponent tensors are built once, so repeated evaluations along a
    threshold search reuse them. Instances hold no mutable state and may be
    shared across threads.
    """

    def __init__(self, a: MatrixLike, table: Optional[JTable] = None):
        self.a = _entries(a)
        self.table = table or j_table()
        rows, columns = self.a.shape
        self.mask = self.a > 0
        weights = self.a.astype(float)
        self._weights = weights
        # exponent of (1 - I_ec(l' -> k)) in the BEC v2c product for edge (l, k)
        self._v2c_powers = np.maximum(weights[None, :, :] - np.eye(rows)[:, :, None], 0.0)
        # exponent of I_ev(k' -> l) in the BEC c2v product for edge (l, k)
        self._c2v_powers = np.maximum(weights[:, None, :] - np.eye(columns)[None, :, :], 0.0)

    @property
    def shape(self):
        return self.a.shape

    def _check_channel(self, params: np.ndarray, kind: SurrogateKind) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.a.shape[1],):
            raise DomainError(f"expected {self.a.shape[1]} channel parameters, got shape {params.shape}")
        if np.any(params < 0) or np.any(np.isnan(params)):
            raise DomainError("channel parameters must be nonnegative")
        if kind is SurrogateKind.BEC and np.any(params > 1):
            raise DomainError("erasure probabilities must lie in [0, 1]")
        return params

    def _finish(self, i_ev, i_ec, i_app, state: MIState) -> MIState:
        iteration = state.iteration + 1
        if np.isnan(i_ev).any() or np.isnan(i_ec).any() or np.isnan(i_app).any():
            raise NumericalError("P-EXIT produced NaN", iteration=iteration)
        return MIState(
            i_ev=np.where(self.mask, np.clip(i_ev, 0.0, 1.0), 0.0),
            i_ec=np.where(self.mask, np.clip(i_ec, 0.0, 1.0), 0.0),
            i_app=np.clip(i_app, 0.0, 1.0),
            iteration=iteration,
        )

    def iterate_biawgn(self, sigma_ch: np.ndarray, state: MIState) -> MIState:
        sigma_ch = self._check_channel(sigma_ch, SurrogateKind.BIAWGN)
        table, weights, mask = self.table, self._weights, self.mask

        incoming = np.where(mask, table.inverse(state.i_ec) ** 2, 0.0)
        variance = (weights * incoming).sum(axis=0)[None, :] - incoming + sigma_ch[None, :] ** 2
        i_ev = np.where(mask, table.j(np.sqrt(np.maximum(variance, 0.0))), 0.0)

        outgoing = np.where(mask, table.inverse(1.0 - i_ev) ** 2, 0.0)
        variance = (weights * outgoing).sum(axis=1)[:, None] - outgoing
        i_ec = np.where(mask, 1.0 - table.j(np.sqrt(np.maximum(variance, 0.0))), 0.0)

        incoming = np.where(mask, table.inverse(i_ec) ** 2, 0.0)
        i_app = table.j(np.sqrt((weights * incoming).sum(axis=0) + sigma_ch ** 2))
        return self._finish(i_ev, i_ec, i_app, state)

    def iterate_bec(self, eps: np.ndarray, state: MIState) -> MIState:
        eps = self._check_channel(eps, SurrogateKind.BEC)
        mask = self.mask

        unknown = np.where(mask, 1.0 - state.i_ec, 1.0)
        i_ev = np.where(mask, 1.0 - eps[None, :] * np.prod(unknown[None, :, :] ** self._v2c_powers, axis=1), 0.0)

        known = np.where(mask, i_ev, 0.0)
        i_ec = np.where(mask, np.prod(known[:, None, :] ** self._c2v_powers, axis=2), 0.0)

        i_app = 1.0 - eps * np.prod(np.where(mask, 1.0 - i_ec, 1.0) ** self._weights, axis=0)
        return self._finish(i_ev, i_ec, i_app, state)

    def iterate(self, kind: SurrogateKind, params: np.ndarray, state: MIState) -> MIState:
        if kind is SurrogateKind.BEC:
            return self.iterate_bec(params, state)
        return self.iterate_biawgn(params, state)

    def run(self, kind: SurrogateKind, params: np.ndarray,
            delta: float = PEXIT['DELTA'],
            max_iterations: int = PEXIT['MAX_ITERATIONS']) -> ExitRun:
        """
        Iterate from the all-zero state until convergence, a fixed point below
        1 - delta, or ``max_iterations``; the latter two count as non-convergent.
        """
        state = MIState.initial(*self.a.shape)
        stall = PEXIT['STALL_TOLERANCE']
        for _ in range(max_iterations):
            updated = self.iterate(kind, params, state)
            if converged(updated, delta):
                return ExitRun(updated, True)
            if (np.max(np.abs(updated.i_ec - state.i_ec)) < stall
                    and np.max(np.abs(updated.i_app - state.i_app)) < stall):
                logger.debug("P-EXIT fixed point at iteration %d, min I_app=%.6f",
                             updated.iteration, updated.min_app)
                return ExitRun(updated, False)
            state = updated
        return ExitRun(state, False)


def pexit_iterate_biawgn(a: MatrixLike, sigma_ch: np.ndarray, state: MIState) -> MIState:
    """One flooding iteration over biAWGN surrogates with per-VN deviations ``sigma_ch``."""
    return ProtographExit(a).iterate_biawgn(sigma_ch, state)


def pexit_iterate_bec(a: MatrixLike, eps: np.ndarray, state: MIState) -> MIState:
    """One flooding iteration over BEC surrogates with per-VN erasure probabilities ``eps``."""
    return ProtographExit(a).iterate_bec(eps, state)
