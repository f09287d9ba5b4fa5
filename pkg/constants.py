# -*- coding: utf-8 -*-
"""Numerical defaults and the catalog of published protographs."""

# Quadrature for Gaussian expectations
QUADRATURE = {
    'TOLERANCE': 1e-8,
    'HERMITE_ORDERS': (32, 64, 128),
    'TRAPEZOID_HALF_WIDTH': 8.0,
    'TRAPEZOID_MIN_LOG2': 8,
    'TRAPEZOID_MAX_LOG2': 16,
}

# Maxwell-Boltzmann line search; nu is searched as NU_SCALE / (2^m - 1)^2
SHAPING = {
    'NU_SCALE_MAX': 40.0,
    'XATOL': 1e-6,
    'CRITERION': 'symbol',
}

# J-function and its inverse
J_FUNCTION = {
    'CLAMP': 1.0 - 1e-12,
    'SIGMA_UPPER': 100.0,
    'INVERSE_TOLERANCE': 1e-10,
    'TABLE_SIGMA_MAX': 24.0,
    'TABLE_STEP': 0.005,
    'TABLE_RESOLUTION': 1e-4,
}

# Protograph EXIT analysis
PEXIT = {
    'DELTA': 1e-6,
    'MAX_ITERATIONS': 2000,
    'RESOLUTION_DB': 0.005,
    'SCAN_STEP_DB': 0.1,
    'STALL_TOLERANCE': 1e-13,
}

# Differential evolution
PROTOPT = {
    'F_WEIGHT': 0.5,
    'CROSSOVER_RATE': 0.8,
    'POPULATION_PER_ENTRY': 10,
    'POPULATION_CAP': 60,
    'POPULATION_MIN': 4,
    'RESAMPLE_ATTEMPTS': 100,
    'EXHAUSTIVE_LIMIT': 1_000_000,
}

# Quasi-cyclic lifting
QCLIFT = {
    'MAX_MOVES': 2000,
    'PATH_BUDGET': 2_000_000,
}

# Link simulation
LINKSIM = {
    'LLR_CLAMP': 50.0,
    'MAX_ITERATIONS': 100,
    'MIN_FRAME_ERRORS': 50,
    'MAX_FRAMES': 10_000,
    'FRAMES_PER_WORKER': 4,
    'HISTOGRAM_RANGE': (-20.0, 60.0),
    'HISTOGRAM_BINS': 160,
}

# Published protographs. Column groups of size D are assigned to the bit
# levels in the order (2, ..., m, 1).
PUBLISHED_PROTOGRAPHS = {
    'ask4-r12-uniform': {
        'matrix': [[2, 1, 1, 2, 1, 4],
                   [1, 1, 1, 2, 2, 5],
                   [1, 0, 0, 1, 0, 6]],
        'm': 2,
        'd_per_level': 3,
        'rate': 1 / 2,
        'mode': 'uniform',
        'threshold_db': 5.57,
        'gap_db': 0.28,
        'snr_bracket': (5.0, 6.5),
        'blocklength': 16200,
    },
    'ask4-r34-uniform': {
        'matrix': [[1, 1, 1, 1, 6, 6, 1, 1],
                   [1, 1, 2, 2, 6, 6, 2, 2]],
        'm': 2,
        'd_per_level': 4,
        'rate': 3 / 4,
        'mode': 'uniform',
        'threshold_db': 9.57,
        'gap_db': 0.26,
        'snr_bracket': (9.0, 10.5),
        'blocklength': 16200,
    },
    'ask8-r23-shaped': {
        'matrix': [[1, 1, 1, 1, 1, 6],
                   [2, 2, 1, 1, 2, 6]],
        'm': 3,
        'd_per_level': 2,
        'rate': 2 / 3,
        'mode': 'shaped',
        'threshold_db': 7.74,
        'gap_db': 0.39,
        'snr_bracket': (7.0, 8.5),
        'blocklength': 64800,
    },
    'ask64-r56-shaped': {
        'matrix': [[2, 2, 2, 1, 2, 2, 6, 2, 2, 0, 6, 6],
                   [1, 1, 1, 2, 1, 1, 6, 1, 0, 2, 6, 6]],
        'm': 6,
        'd_per_level': 2,
        'rate': 5 / 6,
        'mode': 'shaped',
        'threshold_db': 25.52,
        'gap_db': 0.35,
        'snr_bracket': (25.0, 26.5),
        'blocklength': 64800,
    },
}

# BMD limits of uniform 4-ASK
BMD_LIMITS_DB = {
    (2, 1 / 2): 5.2805,
    (2, 3 / 4): 9.308,
}
