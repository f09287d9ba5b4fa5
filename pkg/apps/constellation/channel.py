"""
ASK/AWGN channel with binary reflected Gray labels.

The channel is Y = delta * X + Z with unit-variance Gaussian Z and X on the
normalized 2^m-ASK constellation {+-1, +-3, ..., +-(2^m - 1)}. Bit levels are
numbered 1..m with B_1 the sign bit (most significant bit of the Gray label).

Provides:
1. ``Constellation``: points, labels, input distribution and scaling
2. ``snr_of``: average signal power in dB
3. ``bit_uncertainties``: conditional entropies H(B_i|L_i) and the BMD rates
4. ``llr_distribution``: evaluable per-level L-value densities
5. ``symbol_information``: I(X;Y) of the symbol channel
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import entropy

from apps.common.exceptions import DegenerateLevelError, DomainError
from apps.common.units import db_to_linear, linear_to_db
from apps.constellation.quadrature import gaussian_expectation

logger = logging.getLogger('protoshape.constellation')

_LN2 = np.log(2.0)


def brgc_labels(m: int) -> np.ndarray:
    """Gray labels of the 2^m points in ascending amplitude order, columns B_1..B_m."""
    index = np.arange(2 ** m)
    gray = index ^ (index >> 1)
    shifts = np.arange(m - 1, -1, -1)
    return ((gray[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def ask_points(m: int) -> np.ndarray:
    return np.arange(-(2 ** m - 1), 2 ** m, 2, dtype=float)


@dataclass(frozen=True, eq=False)
class Constellation:
    """
    Scaled 2^m-ASK constellation with an input distribution.

    Attributes:
        m: bits per symbol
        delta: constellation scaling
        dist: probability of each point, ascending amplitude order
        nu: Maxwell-Boltzmann parameter the distribution was built from
            (0 for uniform, informational only)
    """
    m: int
    delta: float
    dist: np.ndarray = field(repr=False)
    nu: float = 0.0

    def __post_init__(self):
        if int(self.m) < 1:
            raise DomainError(f"bits per symbol must be >= 1, got {self.m}")
        if not np.isfinite(self.delta) or self.delta <= 0:
            raise DomainError(f"constellation scaling must be positive, got {self.delta}")
        dist = np.array(self.dist, dtype=float)
        if dist.shape != (2 ** self.m,):
            raise DomainError(f"distribution needs {2 ** self.m} masses, got shape {dist.shape}")
        if np.any(dist < 0) or not np.all(np.isfinite(dist)):
            raise DomainError("distribution masses must be finite and non-negative")
        total = dist.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"distribution sums to {total:.12f}, expected 1")
        dist = dist / total
        dist.setflags(write=False)
        object.__setattr__(self, 'm', int(self.m))
        object.__setattr__(self, 'delta', float(self.delta))
        object.__setattr__(self, 'dist', dist)

    @classmethod
    def uniform(cls, m: int, delta: float = 1.0) -> 'Constellation':
        return cls(m=m, delta=delta, dist=np.full(2 ** m, 2.0 ** -m))

    @classmethod
    def at_snr(cls, m: int, snr_db: float, dist: Optional[np.ndarray] = None,
               nu: float = 0.0) -> 'Constellation':
        """Constellation whose scaling meets ``snr_db`` with equality."""
        if dist is None:
            dist = np.full(2 ** m, 2.0 ** -m)
        dist = np.asarray(dist, dtype=float)
        power = float(np.dot(dist, ask_points(m) ** 2))
        delta = float(np.sqrt(db_to_linear(snr_db) / power))
        return cls(m=m, delta=delta, dist=dist, nu=nu)

    @property
    def size(self) -> int:
        return 2 ** self.m

    @cached_property
    def points(self) -> np.ndarray:
        return ask_points(self.m)

    @cached_property
    def labels(self) -> np.ndarray:
        return brgc_labels(self.m)

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.dist, 1.0 / self.size, rtol=0, atol=1e-15))

    @cached_property
    def bit_marginals(self) -> np.ndarray:
        """P(B_i = b) as an (m, 2) array."""
        ones = self.dist @ self.labels
        return np.column_stack([1.0 - ones, ones])

    @cached_property
    def prior_terms(self) -> np.ndarray:
        """log(P(B_i=0) / P(B_i=1)) per level; infinite for degenerate levels."""
        with np.errstate(divide='ignore'):
            logs = np.log(self.bit_marginals)
        return logs[:, 0] - logs[:, 1]

    @property
    def input_entropy(self) -> float:
        return float(entropy(self.dist, base=2))

    @property
    def level_entropies(self) -> np.ndarray:
        return np.array([entropy(row, base=2) for row in self.bit_marginals])

    def amplitude_marginal(self) -> np.ndarray:
        """
        Distribution of the amplitude bits (B_2..B_m), indexed by their
        pattern read as a binary number with B_2 most significant.
        """
        patterns = self.amplitude_patterns()
        return np.bincount(patterns, weights=self.dist, minlength=2 ** (self.m - 1))

    def amplitude_patterns(self) -> np.ndarray:
        """Amplitude-bit pattern index of every point."""
        if self.m == 1:
            return np.zeros(self.size, dtype=np.int64)
        weights = 1 << np.arange(self.m - 2, -1, -1)
        return self.labels[:, 1:].astype(np.int64) @ weights

    def point_index(self, bits: np.ndarray) -> np.ndarray:
        """Point indices for label rows ``bits`` (shape (..., m), columns B_1..B_m)."""
        weights = 1 << np.arange(self.m - 1, -1, -1)
        gray = np.asarray(bits, dtype=np.int64) @ weights
        index = gray.copy()
        shift = gray >> 1
        while np.any(shift):
            index ^= shift
            shift >>= 1
        return index

    def with_level_permutation(self, permutation: Sequence[int]) -> 'Constellation':
        """
        Constellation seen when code level ``j`` is carried on physical level
        ``permutation[j-1]``.

        The point distribution is re-derived from the code-level bit
        distribution and the scaling keeps the signal power unchanged.
        """
        permutation = np.asarray(permutation, dtype=int)
        if sorted(permutation.tolist()) != list(range(1, self.m + 1)):
            raise DomainError(f"{permutation.tolist()} is not a permutation of 1..{self.m}")
        code_bits = self.labels[:, permutation - 1]
        dist = self.dist[self.point_index(code_bits)]
        return Constellation.at_snr(self.m, snr_of(self), dist=dist, nu=self.nu)

    def llr_values(self, y: np.ndarray, include_priors: bool = True) -> np.ndarray:
        """
        L-values of every bit level for received samples ``y``.

        Evaluates log sum_{x: b_i=0} P(x) p(y|x) - log sum_{x: b_i=1} P(x) p(y|x),
        which carries the prior term. Returns shape ``y.shape + (m,)``.
        """
        y = np.asarray(y, dtype=float)
        with np.errstate(divide='ignore'):
            log_prior = np.log(self.dist)
        metric = log_prior - 0.5 * (y[..., None] - self.delta * self.points) ** 2
        llrs = np.empty(y.shape + (self.m,))
        for level in range(self.m):
            zero = self.labels[:, level] == 0
            llrs[..., level] = (logsumexp(metric[..., zero], axis=-1)
                                - logsumexp(metric[..., ~zero], axis=-1))
        if not include_priors:
            llrs -= self.prior_terms
        return llrs

    def check_levels(self):
        """Raise when a bit value has zero probability."""
        degenerate = np.flatnonzero(np.min(self.bit_marginals, axis=1) <= 0.0)
        if degenerate.size:
            raise DegenerateLevelError(
                f"bit level(s) {(degenerate + 1).tolist()} take a single value"
            )


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """
    Bit-level uncertainties at one operating point.

    Attributes:
        snr_db: signal-to-noise ratio in dB
        h_cond: H(B_i|L_i) per level, in bits
        h_input: H(B) in bits
        r_bmd: achievable BMD rate, bits per channel use, clamped at 0
        r_tx: transmission rate H(B) - (1 - c) m
        code_rate: c used for r_tx
        h_levels: marginal entropies H(B_i)
    """
    snr_db: float
    h_cond: np.ndarray
    h_input: float
    r_bmd: float
    r_tx: float
    code_rate: float
    h_levels: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.h_cond)

    @property
    def mutual_informations(self) -> np.ndarray:
        return self.h_levels - self.h_cond

    @property
    def rate_backoff(self) -> float:
        return self.r_bmd - self.r_tx


def snr_of(constellation: Constellation) -> float:
    """Average signal power E[|delta X|^2] in dB (unit noise variance)."""
    power = constellation.delta ** 2 * float(np.dot(constellation.dist, constellation.points ** 2))
    return float(linear_to_db(power))


def bit_uncertainties(constellation: Constellation,
                      code_rate: Optional[float] = None) -> UncertaintySet:
    """
    Conditional entropies H(B_i|L_i) = H(B_i|Y) and the BMD rates.

    ``code_rate`` defaults to the systematic rate (m-1)/m; it only enters r_tx.

    Raises:
        DegenerateLevelError: a bit level takes a single value.
        NumericalToleranceError: the Gaussian expectation did not converge.
    """
    constellation.check_levels()
    m = constellation.m
    if code_rate is None:
        code_rate = (m - 1) / m
    delta = constellation.delta
    signs = 1.0 - 2.0 * constellation.labels.astype(float)

    h_cond = np.zeros(m)
    for index in np.flatnonzero(constellation.dist > 0):
        center = delta * constellation.points[index]
        sign = signs[index]

        def conditional(z, center=center, sign=sign):
            llrs = constellation.llr_values(center + z)
            return np.logaddexp(0.0, -sign * llrs).T / _LN2

        h_cond += constellation.dist[index] * gaussian_expectation(conditional)

    h_levels = constellation.level_entropies
    h_cond = np.clip(h_cond, 0.0, h_levels)
    h_input = constellation.input_entropy
    r_bmd = max(h_input - float(h_cond.sum()), 0.0)
    r_tx = h_input - (1.0 - code_rate) * m
    return UncertaintySet(
        snr_db=snr_of(constellation),
        h_cond=h_cond,
        h_input=h_input,
        r_bmd=r_bmd,
        r_tx=r_tx,
        code_rate=float(code_rate),
        h_levels=h_levels,
    )


class LLRDensity:
    """
    Conditional law of L_i given B_i = b for one bit level.

    Supports sampling, conditional means and a deterministic histogram built
    from a dense grid over the channel output.
    """

    def __init__(self, constellation: Constellation, level: int):
        if not 1 <= level <= constellation.m:
            raise DomainError(f"level must lie in 1..{constellation.m}, got {level}")
        marginal = constellation.bit_marginals[level - 1]
        if np.min(marginal) <= 0.0:
            raise DegenerateLevelError(f"bit level {level} takes a single value")
        self.constellation = constellation
        self.level = level
        self.prior_term = float(constellation.prior_terms[level - 1])

    def conditional_points(self, bit: int) -> Tuple[np.ndarray, np.ndarray]:
        """Point indices with B_level = bit and their conditional probabilities."""
        mask = self.constellation.labels[:, self.level - 1] == bit
        indices = np.flatnonzero(mask)
        weights = self.constellation.dist[indices]
        return indices, weights / weights.sum()

    def sample(self, bit: int, size: int, rng: np.random.Generator) -> np.ndarray:
        indices, weights = self.conditional_points(bit)
        chosen = rng.choice(indices, size=size, p=weights)
        y = self.constellation.delta * self.constellation.points[chosen] + rng.standard_normal(size)
        return self.constellation.llr_values(y)[:, self.level - 1]

    def mean(self, bit: int) -> float:
        indices, weights = self.conditional_points(bit)
        total = 0.0
        for index, weight in zip(indices, weights):
            center = self.constellation.delta * self.constellation.points[index]
            value = gaussian_expectation(
                lambda z, c=center: self.constellation.llr_values(c + z)[:, self.level - 1]
            )
            total += weight * float(value)
        return total

    def histogram(self, bit: int, bins: int = 200,
                  value_range: Optional[Tuple[float, float]] = None,
                  grid_points: int = 20001) -> Tuple[np.ndarray, np.ndarray]:
        """
        Density of L_level given B_level = bit on ``bins`` equal-width bins.

        Returns ``(density, edges)`` as ``numpy.histogram`` does with
        ``density=True``.
        """
        indices, weights = self.conditional_points(bit)
        constellation = self.constellation
        reach = constellation.delta * (constellation.size - 1) + 8.0
        y = np.linspace(-reach, reach, grid_points)
        llrs = constellation.llr_values(y)[:, self.level - 1]
        centers = constellation.delta * constellation.points[indices]
        pdf = np.exp(-0.5 * (y[None, :] - centers[:, None]) ** 2) / np.sqrt(2.0 * np.pi)
        mass = (weights @ pdf) * (y[1] - y[0])
        return np.histogram(llrs, bins=bins, range=value_range, weights=mass, density=True)


def llr_distribution(constellation: Constellation, level: int) -> LLRDensity:
    """
    Evaluable p_{L_i|B_i}(.|b) for ``level``.

    Raises:
        DomainError: level outside 1..m.
        DegenerateLevelError: a bit value of the level has zero probability.
    """
    return LLRDensity(constellation, level)


def symbol_information(constellation: Constellation) -> float:
    """
    I(X;Y) = H(X) - H(X|Y) in bits per channel use.

    Raises:
        NumericalToleranceError: the Gaussian expectation did not converge.
    """
    with np.errstate(divide='ignore'):
        log_prior = np.log(constellation.dist)
    centers = constellation.delta * constellation.points
    equivocation = 0.0
    for index in np.flatnonzero(constellation.dist > 0):

        def surprise(z, index=index):
            metric = log_prior - 0.5 * (centers[index] + z[:, None] - centers) ** 2
            return (logsumexp(metric, axis=-1) - metric[:, index]) / _LN2

        equivocation += constellation.dist[index] * float(gaussian_expectation(surprise))
    return max(constellation.input_entropy - equivocation, 0.0)
