"""
J-function of a consistent Gaussian L-value and its inverse.

J(sigma) = 1 - E[log2(1 + exp(-z))] with z ~ N(sigma^2/2, sigma^2). The exact
routines use the Gaussian quadrature stack of the constellation app; the
P-EXIT recursions use ``JTable``, a cubic-spline table built once from the
same quadrature and shared read-only.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from apps.common.exceptions import DomainError
from apps.constellation.quadrature import gaussian_expectation
from constants import J_FUNCTION

logger = logging.getLogger('protoshape.surrogates')

_LN2 = np.log(2.0)
_QUADRATURE_TOLERANCE = 1e-11
_CHUNK = 64


def _complement(sigma: np.ndarray) -> np.ndarray:
    """1 - J(sigma) for a 1-D array of standard deviations."""
    sigma = np.asarray(sigma, dtype=float)
    out = np.empty_like(sigma)
    for start in range(0, sigma.size, _CHUNK):
        block = sigma[start:start + _CHUNK, None]

        def integrand(z, block=block):
            return np.logaddexp(0.0, -(0.5 * block * block + block * z[None, :])) / _LN2

        out[start:start + _CHUNK] = gaussian_expectation(integrand, tol=_QUADRATURE_TOLERANCE)
    return out


def j_function(sigma):
    """
    Mutual information of a consistent Gaussian L-value with deviation ``sigma``.

    Accepts scalars or arrays; scalars return a float.
    """
    values = np.asarray(sigma, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError("J-function needs sigma >= 0")
    flat = values.ravel()
    result = np.zeros_like(flat)
    positive = flat > 0
    if np.any(positive):
        result[positive] = np.clip(1.0 - _complement(flat[positive]), 0.0, 1.0)
    result = result.reshape(values.shape)
    return float(result) if result.ndim == 0 else result


def _check_information(value: float, clamp: bool) -> float:
    if np.isnan(value) or value < 0.0 or value > 1.0:
        raise DomainError(f"mutual information must lie in [0, 1), got {value}")
    if value >= 1.0 and not clamp:
        raise DomainError("J-inverse of 1 is unbounded; pass clamp=True")
    return min(value, J_FUNCTION['CLAMP'])


def j_inverse(information, clamp: bool = True):
    """
    Standard deviation sigma with |J(sigma) - information| <= 1e-9.

    Inputs above 1 - 1e-12 are clamped there unless ``clamp`` is False, in
    which case an input of 1 is a domain error.
    """
    values = np.asarray(information, dtype=float)
    flat = values.ravel()
    result = np.empty_like(flat)
    for index, value in enumerate(flat):
        value = _check_information(float(value), clamp)
        if value == 0.0:
            result[index] = 0.0
            continue
        result[index] = brentq(lambda s, v=value: j_function(s) - v, 0.0,
                               J_FUNCTION['SIGMA_UPPER'], xtol=J_FUNCTION['INVERSE_TOLERANCE'],
                               rtol=4 * np.finfo(float).eps)
    result = result.reshape(values.shape)
    return float(result) if result.ndim == 0 else result


class JTable:
    """
    Tabulated J and J-inverse for vectorized use inside P-EXIT.

    Exact values on a coarse sigma grid are interpolated by a cubic spline
    onto a dense grid; lookups then interpolate linearly, so the tabulated J
    and J-inverse are exact inverses of each other.
    """

    def __init__(self, sigma_max: float = J_FUNCTION['TABLE_SIGMA_MAX'],
                 step: float = J_FUNCTION['TABLE_STEP'],
                 resolution: float = J_FUNCTION['TABLE_RESOLUTION']):
        coarse = np.arange(0.0, sigma_max + step / 2, step)
        exact = np.zeros_like(coarse)
        exact[1:] = 1.0 - _complement(coarse[1:])
        spline = CubicSpline(coarse, np.clip(exact, 0.0, 1.0))

        self.sigma = np.arange(0.0, sigma_max + resolution / 2, resolution)
        values = np.clip(spline(self.sigma), 0.0, 1.0)
        values[0] = 0.0
        self.values = np.maximum.accumulate(values)
        self.sigma_max = float(self.sigma[-1])

        top = min(int(np.searchsorted(self.values, J_FUNCTION['CLAMP'])), self.sigma.size - 1)
        self._inverse_values = self.values[:top + 1]
        self._inverse_sigma = self.sigma[:top + 1]
        self.sigma_clamp = float(self.sigma[top])
        logger.debug("J table built on %d nodes, clamp sigma=%.4f", self.sigma.size, self.sigma_clamp)

    def j(self, sigma: np.ndarray) -> np.ndarray:
        return np.interp(sigma, self.sigma, self.values, right=1.0)

    def inverse(self, information: np.ndarray) -> np.ndarray:
        information = np.minimum(information, J_FUNCTION['CLAMP'])
        return np.interp(information, self._inverse_values, self._inverse_sigma)


@lru_cache(maxsize=1)
def j_table() -> JTable:
    return JTable()
