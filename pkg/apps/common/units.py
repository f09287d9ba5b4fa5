"""dB/linear conversion. SNR is carried in dB at every interface and converted here only."""

import numpy as np


def db_to_linear(value_db):
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


def capacity_snr_db(rate: float) -> float:
    """SNR at which the real AWGN capacity 1/2 log2(1 + SNR) equals ``rate``."""
    return float(linear_to_db(np.expm1(2.0 * rate * np.log(2.0))))
