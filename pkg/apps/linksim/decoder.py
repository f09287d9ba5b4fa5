"""
Sum-product belief propagation on the Tanner graph of a lifted code.

Messages live on the edge list of the parity-check matrix. Check updates run
in the tanh domain with the extrinsic product formed from per-row sums of
log-magnitudes and sign parities. A zero APP L-value is an erasure and keeps
the decoder from declaring success.
"""

from dataclasses import dataclass

import numpy as np

from apps.common.exceptions import DomainError
from apps.qclift.lifting import QCCode
from constants import LINKSIM

_TINY = 1e-300
_EDGE = 1.0 - 1e-15


@dataclass(frozen=True)
class DecodeResult:
    hard: np.ndarray
    iterations: int
    ok: bool
    app: np.ndarray


class BeliefPropagation:
    """Flooding sum-product decoder bound to one parity-check matrix."""

    def __init__(self, code: QCCode, clamp: float = LINKSIM['LLR_CLAMP']):
        h = code.parity_check.tocoo()
        self.rows = h.row.astype(np.int64)
        self.columns = h.col.astype(np.int64)
        self.check_count, self.n = h.shape
        self.clamp = clamp

    def _check_update(self, v2c: np.ndarray) -> np.ndarray:
        t = np.tanh(np.clip(v2c, -self.clamp, self.clamp) / 2.0)
        log_magnitude = np.log(np.maximum(np.abs(t), _TINY))
        negative = (t < 0).astype(np.int64)
        row_log = np.bincount(self.rows, weights=log_magnitude, minlength=self.check_count)
        row_negative = np.bincount(self.rows, weights=negative, minlength=self.check_count).astype(np.int64)
        extrinsic = np.exp(row_log[self.rows] - log_magnitude)
        extrinsic = np.where((row_negative[self.rows] - negative) % 2 == 1, -extrinsic, extrinsic)
        return np.clip(2.0 * np.arctanh(np.clip(extrinsic, -_EDGE, _EDGE)), -self.clamp, self.clamp)

    def _syndrome_ok(self, hard: np.ndarray) -> bool:
        parity = np.bincount(self.rows, weights=hard[self.columns], minlength=self.check_count)
        return not np.any(parity.astype(np.int64) % 2)

    def decode(self, llrs: np.ndarray, max_iterations: int = LINKSIM['MAX_ITERATIONS']) -> DecodeResult:
        llrs = np.asarray(llrs, dtype=float)
        if llrs.shape != (self.n,):
            raise DomainError(f"expected {self.n} L-values, got shape {llrs.shape}")
        if not np.all(np.isfinite(llrs)):
            raise DomainError("L-values must be finite")
        llrs = np.clip(llrs, -self.clamp, self.clamp)

        v2c = llrs[self.columns]
        app, hard = llrs, (llrs < 0).astype(np.uint8)
        for iteration in range(1, max_iterations + 1):
            c2v = self._check_update(v2c)
            app = llrs + np.bincount(self.columns, weights=c2v, minlength=self.n)
            hard = (app < 0).astype(np.uint8)
            if not np.any(app == 0) and self._syndrome_ok(hard):
                return DecodeResult(hard, iteration, True, app)
            v2c = app[self.columns] - c2v
        return DecodeResult(hard, max_iterations, False, app)


def bp_decode(llrs: np.ndarray, code: QCCode,
              max_iterations: int = LINKSIM['MAX_ITERATIONS']) -> DecodeResult:
    """Decode channel L-values given in lifted column order."""
    return BeliefPropagation(code).decode(llrs, max_iterations)
