"""
Gaussian expectations by Gauss-Hermite quadrature with order escalation.

Orders are tried in sequence until two successive estimates agree to the
tolerance; otherwise a refined trapezoid rule on +/-8 standard deviations
takes over. The same stack serves the bit-level entropies and the J-function.
"""

import logging
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from apps.common.exceptions import NumericalToleranceError
from constants import QUADRATURE

logger = logging.getLogger('protoshape.constellation')

_SQRT2 = np.sqrt(2.0)
_SQRT_PI = np.sqrt(np.pi)


@lru_cache(maxsize=None)
def hermite_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for E[f(Z)], Z ~ N(0, 1)."""
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    return _SQRT2 * nodes, weights / _SQRT_PI


def gaussian_expectation(func: Callable[[np.ndarray], np.ndarray],
                         tol: float = QUADRATURE['TOLERANCE'],
                         orders: Sequence[int] = QUADRATURE['HERMITE_ORDERS']) -> np.ndarray:
    """
    E[func(Z)] for a standard normal Z.

    ``func`` receives a 1-D array of noise samples and returns an array whose
    last axis runs over those samples; the expectation is taken over that axis.

    Raises:
        NumericalToleranceError: neither the Hermite ladder nor the trapezoid
            refinement reached ``tol``.
    """
    previous = None
    for order in orders:
        nodes, weights = hermite_rule(order)
        estimate = np.asarray(func(nodes)) @ weights
        if previous is not None and np.max(np.abs(estimate - previous)) < tol:
            return estimate
        previous = estimate
    logger.debug("Hermite ladder did not settle, refining on a trapezoid grid")
    return _trapezoid_expectation(func, tol)


def _trapezoid_expectation(func: Callable[[np.ndarray], np.ndarray], tol: float) -> np.ndarray:
    half_width = QUADRATURE['TRAPEZOID_HALF_WIDTH']
    previous = None
    for exponent in range(QUADRATURE['TRAPEZOID_MIN_LOG2'], QUADRATURE['TRAPEZOID_MAX_LOG2'] + 1):
        z = np.linspace(-half_width, half_width, 2 ** exponent + 1)
        pdf = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
        estimate = trapezoid(np.asarray(func(z)) * pdf, z, axis=-1)
        if previous is not None and np.max(np.abs(estimate - previous)) < tol:
            return estimate
        previous = estimate
    raise NumericalToleranceError(
        f"Gaussian expectation did not converge to {tol:g} on 2^{QUADRATURE['TRAPEZOID_MAX_LOG2']} points"
    )
