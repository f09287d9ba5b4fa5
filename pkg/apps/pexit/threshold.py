"""
Iterative decoding thresholds along the uniform and shaped SNR trajectories.

The threshold is the smallest SNR whose surrogate vector lies in the
convergence region. A coarse scan across the bracket checks that convergence
is a monotone step before bisection narrows the step down.
"""

import logging
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from apps.common.exceptions import BracketError, DomainError
from apps.constellation.channel import Constellation, UncertaintySet, bit_uncertainties
from apps.constellation.shaping import MODES, SHAPED, bmd_limit_snr, snr_gap, trajectory_point
from apps.pexit.basematrix import Basematrix
from apps.pexit.recursion import ExitRun, ProtographExit
from apps.surrogates.matching import SurrogateKind, SurrogateVector, match
from constants import PEXIT

logger = logging.getLogger('protoshape.pexit')


@dataclass(frozen=True)
class OperatingPoint:
    """Trajectory point, its bit uncertainties and the matched surrogate."""
    constellation: Constellation
    uncertainties: UncertaintySet
    surrogate: SurrogateVector


@lru_cache(maxsize=8192)
def _operating_point(m: int, snr_key: float, mode: str, kind: SurrogateKind,
                     code_rate: float) -> OperatingPoint:
    constellation = trajectory_point(m, snr_key, mode)
    uncertainties = bit_uncertainties(constellation, code_rate=code_rate)
    return OperatingPoint(constellation, uncertainties, match(uncertainties, kind))


def operating_point(m: int, snr_db: float, mode: str, kind: SurrogateKind,
                    code_rate: Optional[float] = None) -> OperatingPoint:
    """Shared, cached operating point; safe to read from several threads."""
    if code_rate is None:
        code_rate = (m - 1) / m
    return _operating_point(int(m), round(float(snr_db), 9), mode, kind, round(float(code_rate), 12))


@dataclass(frozen=True)
class ThresholdReport:
    """
    Threshold together with the operating point it was found at.

    Gaps are measured from the threshold to the SNR where 1/2 log2(1 + SNR)
    equals R (capacity gap) and to the SNR where the trajectory's R_BMD
    equals R (BMD gap).
    """
    threshold_db: float
    m: int
    mode: str
    surrogate: str
    code_rate: float
    nu: float
    scaling: float
    input_entropy: float
    r_bmd: float
    r_tx: float
    h_cond: Tuple[float, ...]
    surrogate_params: Tuple[float, ...]
    capacity_gap_db: float
    bmd_gap_db: Optional[float]
    iterations: int
    monotone: bool

    def to_dict(self) -> dict:
        data = asdict(self)
        data['h_cond'] = list(self.h_cond)
        data['surrogate_params'] = list(self.surrogate_params)
        return data


class ThresholdSearch:
    """
    Threshold search for one basematrix, modulation order, trajectory and
    surrogate kind.

    Results of single SNR evaluations are memoized per instance, so a search
    object must not be shared between threads; the underlying operating
    points are shared through a process-wide cache.
    """

    def __init__(self, base: Basematrix, m: int, mode: str, kind: SurrogateKind,
                 delta: float = PEXIT['DELTA'],
                 max_iterations: int = PEXIT['MAX_ITERATIONS'],
                 resolution_db: float = PEXIT['RESOLUTION_DB'],
                 scan_step_db: float = PEXIT['SCAN_STEP_DB']):
        if mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
        if base.m != m:
            raise DomainError(f"basematrix carries {base.m} bit levels, modulation has m={m}")
        if mode == SHAPED and m < 2:
            raise DomainError("shaped trajectories need m >= 2")
        if not 0 < delta < 1:
            raise DomainError(f"convergence tolerance must lie in (0, 1), got {delta}")
        if resolution_db <= 0 or scan_step_db <= 0:
            raise DomainError("resolution and scan step must be positive")
        self.base = base
        self.m = m
        self.mode = mode
        self.kind = kind
        self.delta = delta
        self.max_iterations = int(max_iterations)
        self.resolution_db = resolution_db
        self.scan_step_db = scan_step_db
        self.kernel = ProtographExit(base)
        self._runs: Dict[float, ExitRun] = {}

    def point(self, snr_db: float) -> OperatingPoint:
        return operating_point(self.m, snr_db, self.mode, self.kind, self.base.rate)

    def channel_parameters(self, snr_db: float) -> np.ndarray:
        """Per-VN surrogate parameters at ``snr_db``."""
        return self.base.expand(self.point(snr_db).surrogate.params)

    def evaluate(self, snr_db: float) -> ExitRun:
        key = round(float(snr_db), 9)
        if key not in self._runs:
            self._runs[key] = self.kernel.run(self.kind, self.channel_parameters(key),
                                              delta=self.delta, max_iterations=self.max_iterations)
        return self._runs[key]

    def converges(self, snr_db: float) -> bool:
        return self.evaluate(snr_db).converged

    def _scan_grid(self, low: float, high: float) -> np.ndarray:
        count = max(int(np.ceil((high - low) / self.scan_step_db - 1e-9)), 1)
        return np.linspace(low, high, count + 1)

    def search(self, snr_bracket: Sequence[float]) -> Tuple[float, bool]:
        """
        Threshold in dB and whether the coarse scan found a monotone step.

        Raises:
            BracketError: the bracket ends do not straddle the threshold.
        """
        low, high = (float(v) for v in snr_bracket)
        if not high > low:
            raise BracketError(f"bracket ({low}, {high}) is empty")
        grid = self._scan_grid(low, high)
        outcome = np.array([self.converges(snr) for snr in grid])
        if outcome[0]:
            raise BracketError(f"decoding converges at the low end {low:.3f} dB")
        if not outcome[-1]:
            raise BracketError(f"decoding does not converge at the high end {high:.3f} dB")

        first = int(np.argmax(outcome))
        if not np.all(outcome[first:]):
            failing = float(grid[np.flatnonzero(~outcome)[-1]])
            logger.warning("non-monotone convergence between %.3f and %.3f dB; reporting %.4f dB",
                           low, high, failing + self.resolution_db)
            return failing + self.resolution_db, False

        lo, hi = float(grid[first - 1]), float(grid[first])
        while hi - lo > self.resolution_db:
            middle = 0.5 * (lo + hi)
            if self.converges(middle):
                hi = middle
            else:
                lo = middle
        return hi, True

    def report(self, snr_bracket: Sequence[float]) -> ThresholdReport:
        threshold_db, monotone = self.search(snr_bracket)
        point = self.point(threshold_db)
        uncertainties = point.uncertainties
        try:
            bmd_gap = threshold_db - bmd_limit_snr(self.m, uncertainties.r_tx, self.mode)
        except DomainError:
            bmd_gap = None
        return ThresholdReport(
            threshold_db=threshold_db,
            m=self.m,
            mode=self.mode,
            surrogate=self.kind.value,
            code_rate=self.base.rate,
            nu=point.constellation.nu,
            scaling=point.constellation.delta,
            input_entropy=uncertainties.h_input,
            r_bmd=uncertainties.r_bmd,
            r_tx=uncertainties.r_tx,
            h_cond=tuple(float(v) for v in uncertainties.h_cond),
            surrogate_params=tuple(float(v) for v in point.surrogate.params),
            capacity_gap_db=snr_gap(threshold_db, uncertainties.r_tx),
            bmd_gap_db=bmd_gap,
            iterations=self.evaluate(threshold_db).iterations,
            monotone=monotone,
        )


def threshold(a: Basematrix, m: int, mode: str, surrogate: SurrogateKind,
              snr_bracket: Sequence[float], **options) -> float:
    """
    Smallest SNR in dB, to within the bisection resolution, at which P-EXIT
    over the matched surrogates converges.

    ``options`` are forwarded to ``ThresholdSearch`` (delta, max_iterations,
    resolution_db, scan_step_db).
    """
    value, _ = ThresholdSearch(a, m, mode, surrogate, **options).search(snr_bracket)
    logger.info("threshold %.4f dB (m=%d, %s, %s)", value, m, mode, surrogate.value)
    return value


def threshold_report(a: Basematrix, m: int, mode: str, surrogate: SurrogateKind,
                     snr_bracket: Sequence[float], **options) -> ThresholdReport:
    report = ThresholdSearch(a, m, mode, surrogate, **options).report(snr_bracket)
    logger.info("threshold %.4f dB, capacity gap %.4f dB (m=%d, %s, %s)",
                report.threshold_db, report.capacity_gap_db, m, mode, surrogate.value)
    return report
