"""Bit sources and the bit-to-symbol mapping of the transmitter."""

import numpy as np

from apps.common.exceptions import ConfigurationError
from apps.constellation.channel import Constellation
from apps.qclift.lifting import QCCode


def source_shaped(constellation: Constellation, n_c: int, rng: np.random.Generator) -> np.ndarray:
    """
    Amplitude bits (B_2, ..., B_m) of ``n_c`` symbols, symbol by symbol.

    Amplitude patterns are drawn i.i.d. from the marginal of the input
    distribution, so a uniform constellation yields fair bits.
    """
    m = constellation.m
    if m == 1:
        return np.zeros(0, dtype=np.uint8)
    marginal = constellation.amplitude_marginal()
    patterns = rng.choice(marginal.size, size=n_c, p=marginal)
    bits = (patterns[:, None] >> np.arange(m - 2, -1, -1)[None, :]) & 1
    return bits.ravel().astype(np.uint8)


def systematic_block(code: QCCode, constellation: Constellation, rng: np.random.Generator) -> np.ndarray:
    """
    Systematic bits of one frame in transmission order.

    A full word of shaped amplitude bits followed by fair level-1 bits is
    drawn and restricted to the systematic positions of the encoder, so
    amplitude positions carrying parity are left to the encoder.
    """
    if code.encoder is None:
        raise ConfigurationError("code has no encoder", 'code')
    if constellation.m != code.base.m:
        raise ConfigurationError(
            f"code carries {code.base.m} bit levels, the constellation {constellation.m}", 'code'
        )
    amplitude = source_shaped(constellation, code.n_c, rng)
    sign = rng.integers(0, 2, size=code.n_c, dtype=np.uint8)
    return np.concatenate([amplitude, sign])[code.encoder.systematic_positions]


def symbol_bits(transmitted: np.ndarray, m: int) -> np.ndarray:
    """Per-symbol code bits (n_c, m), columns ordered level 1..m."""
    transmitted = np.asarray(transmitted)
    n_c = transmitted.size // m
    bits = np.empty((n_c, m), dtype=transmitted.dtype)
    bits[:, 1:] = transmitted[:n_c * (m - 1)].reshape(n_c, m - 1)
    bits[:, 0] = transmitted[n_c * (m - 1):]
    return bits


def transmission_order(values: np.ndarray) -> np.ndarray:
    """Inverse of ``symbol_bits``: (n_c, m) per-level values to a flat word."""
    values = np.asarray(values)
    return np.concatenate([values[:, 1:].ravel(), values[:, 0]])
