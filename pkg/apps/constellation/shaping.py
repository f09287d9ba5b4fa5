"""
Operating points along the SNR search trajectories.

Uniform inputs keep P_B fixed and scale delta to the SNR. Shaped inputs pick,
per SNR, the Maxwell-Boltzmann distribution P(x) ~ exp(-nu x^2) maximizing the
symbol information I(X;Y), with delta meeting the power constraint with
equality. The BMD rate is nearly flat in nu around its maximum, so its
maximizer drifts along that plateau from one SNR to the next; the ``bmd``
criterion keeps it available.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from apps.common.exceptions import DomainError, NumericalToleranceError
from apps.common.units import capacity_snr_db
from apps.constellation.channel import Constellation, ask_points, bit_uncertainties, symbol_information
from constants import SHAPING

logger = logging.getLogger('protoshape.constellation')

UNIFORM = 'uniform'
SHAPED = 'shaped'
MODES = (UNIFORM, SHAPED)

SHAPING_OBJECTIVES = {
    'symbol': symbol_information,
    'bmd': lambda constellation: bit_uncertainties(constellation).r_bmd,
}


def maxwell_boltzmann(m: int, nu: float) -> np.ndarray:
    """Point masses proportional to exp(-nu x^2) on the normalized 2^m-ASK points."""
    if nu < 0:
        raise DomainError(f"Maxwell-Boltzmann parameter must be >= 0, got {nu}")
    squares = ask_points(m) ** 2
    weights = np.exp(-nu * (squares - squares.min()))
    return weights / weights.sum()


def mb_operating_point(m: int, snr_db: float, nu: float) -> Constellation:
    return Constellation.at_snr(m, snr_db, dist=maxwell_boltzmann(m, nu), nu=nu)


def _nu_scale(m: int) -> float:
    return float((2 ** m - 1) ** 2)


def shaped_operating_point(m: int, snr_db: float, criterion: str = SHAPING['CRITERION']) -> Constellation:
    """
    Maxwell-Boltzmann constellation maximizing ``criterion`` at ``snr_db``:
    I(X;Y) for ``symbol``, R_BMD for ``bmd``.

    The line search runs over u = nu (2^m - 1)^2 on [0, NU_SCALE_MAX]; the
    uniform input is kept when the search ends below it.

    Raises:
        NumericalToleranceError: the bounded line search failed.
    """
    if m < 2:
        raise DomainError(f"shaping needs m >= 2, got {m}")
    if not np.isfinite(snr_db):
        raise DomainError(f"SNR must be finite, got {snr_db}")
    if criterion not in SHAPING_OBJECTIVES:
        raise DomainError(f"criterion must be one of {tuple(SHAPING_OBJECTIVES)}, got {criterion!r}")
    objective = SHAPING_OBJECTIVES[criterion]
    scale = _nu_scale(m)

    def negative_rate(u):
        return -objective(mb_operating_point(m, snr_db, u / scale))

    result = minimize_scalar(negative_rate, bounds=(0.0, SHAPING['NU_SCALE_MAX']),
                             method='bounded', options={'xatol': SHAPING['XATOL']})
    if not result.success:
        raise NumericalToleranceError(
            f"Maxwell-Boltzmann search failed at {snr_db:.4f} dB: {result.message}"
        )
    nu = float(result.x) / scale
    if -result.fun < -negative_rate(0.0):
        nu = 0.0
    logger.debug("shaped operating point m=%d snr=%.4f dB nu=%.6g (%s)", m, snr_db, nu, criterion)
    return mb_operating_point(m, snr_db, nu)


def uniform_operating_point(m: int, snr_db: float) -> Constellation:
    return Constellation.at_snr(m, snr_db)


@lru_cache(maxsize=4096)
def _cached_point(m: int, snr_key: float, mode: str) -> Constellation:
    if mode == UNIFORM:
        return uniform_operating_point(m, snr_key)
    return shaped_operating_point(m, snr_key)


def trajectory_point(m: int, snr_db: float, mode: str) -> Constellation:
    """Operating point of the uniform or shaped search trajectory at ``snr_db``."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    return _cached_point(int(m), round(float(snr_db), 9), mode)


def snr_gap(snr_db: float, r_tx: float) -> float:
    """Distance in dB to the SNR where 1/2 log2(1 + SNR) equals ``r_tx``."""
    if r_tx <= 0:
        raise DomainError(f"transmission rate must be positive, got {r_tx}")
    return float(snr_db - capacity_snr_db(r_tx))


def bmd_limit_snr(m: int, rate: float, mode: str = UNIFORM) -> float:
    """
    SNR at which the trajectory's R_BMD equals ``rate``.

    For uniform inputs with a rate-c code, ``rate`` is the transmission rate m c.
    """
    if not 0 < rate < m:
        raise DomainError(f"rate must lie in (0, {m}), got {rate}")

    def excess(snr_db):
        return bit_uncertainties(trajectory_point(m, snr_db, mode)).r_bmd - rate

    low = capacity_snr_db(rate) - 1.0
    high = low + 10.0
    while excess(high) < 0:
        high += 10.0
        if high > 80.0:
            raise NumericalToleranceError(f"no BMD limit below 80 dB for rate {rate}")
    return float(brentq(excess, low, high, xtol=1e-6))
