"""
Systematic encoding of lifted codes.

Parity preferably sits on the last M variable nodes of the level-1 group,
which places it on the last Q M bit positions of the transmitted word. When
that Q M x Q M matrix of circulants is invertible over GF(2)[x] / (x^Q - 1)
it is applied by FFT-based cyclic convolution.

Otherwise Gauss-Jordan elimination over GF(2) picks the parity columns,
scanning bit positions from the end of the transmitted word: level-1 columns
first, so parity reaches the amplitude levels only where the level-1 columns
do not span the checks. Dependent checks are dropped, and the code then
carries more than n - Q M systematic bits.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.fft import irfft, rfft

from apps.common.exceptions import DomainError, InvalidBasematrixError
from apps.pexit.basematrix import Basematrix
from apps.qclift import ring
from apps.qclift.lifting import QCCode

logger = logging.getLogger('protoshape.qclift')


@dataclass(frozen=True, eq=False)
class CirculantStage:
    """Parity of whole base columns from an inverted matrix of circulants."""
    columns: np.ndarray
    q: int
    inverse_spectra: np.ndarray

    def solve(self, syndrome: np.ndarray) -> np.ndarray:
        blocks = self.inverse_spectra.shape[0]
        spectrum = rfft(syndrome.reshape(blocks, self.q).astype(float), axis=-1)
        product = np.einsum('jif,if->jf', self.inverse_spectra, spectrum)
        return (np.rint(irfft(product, n=self.q, axis=-1)).astype(np.int64) % 2).ravel()


@dataclass(frozen=True, eq=False)
class EliminationStage:
    """Parity of single columns from rows of a GF(2) row transform."""
    columns: np.ndarray
    transform: np.ndarray

    def solve(self, syndrome: np.ndarray) -> np.ndarray:
        # uint8 products wrap modulo 256, which keeps the parity
        return (self.transform @ syndrome.astype(np.uint8)) & 1


@dataclass(frozen=True, eq=False)
class EncoderPrep:
    """
    Factorization used by ``encode``.

    Each stage sets its parity columns to ``solve`` applied to the syndrome
    of the partial codeword, with its own columns still zero.

    Attributes:
        systematic_columns: lifted columns of the systematic bits, in
            transmission order
        systematic_positions: transmitted positions of the systematic bits
        stages: parity stages in the order they are solved
    """
    systematic_columns: np.ndarray
    systematic_positions: np.ndarray
    stages: Tuple[object, ...]

    @property
    def k(self) -> int:
        return int(self.systematic_columns.size)

    @property
    def parity_columns(self) -> np.ndarray:
        return np.concatenate([stage.columns for stage in self.stages])


def parity_base_columns(base: Basematrix) -> np.ndarray:
    """Base columns carrying parity: the last M columns of the level-1 group."""
    d, rows = base.d_per_level, base.M
    if rows > d:
        raise InvalidBasematrixError(
            f"systematic encoding needs M <= D, got M={rows} and D={d}", 'matrix'
        )
    group = base.level_order.index(1)
    return np.arange(group * d + d - rows, group * d + d)


def gauss_jordan(matrix: np.ndarray) -> Tuple[List[int], np.ndarray]:
    """
    Reduce a dense binary matrix, choosing pivots column by column.

    Returns the pivot columns and a row transform T with (T @ matrix) % 2
    holding the unit vector e_i in pivot column i; rows of T past the rank
    map ``matrix`` to zero.
    """
    rows, width = matrix.shape
    augmented = np.hstack([np.asarray(matrix, dtype=np.uint8) % 2, np.eye(rows, dtype=np.uint8)])
    work = np.packbits(augmented, axis=1)
    pivots = []
    for column in range(width):
        if len(pivots) == rows:
            break
        byte, mask = column >> 3, np.uint8(0x80 >> (column & 7))
        rank = len(pivots)
        candidates = np.flatnonzero(work[rank:, byte] & mask)
        if not candidates.size:
            continue
        pivot = rank + candidates[0]
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        hits = np.flatnonzero(work[:, byte] & mask)
        hits = hits[hits != rank]
        work[hits] ^= work[rank]
        pivots.append(column)
    transform = np.unpackbits(work, axis=1, count=width + rows)[:, width:]
    return pivots, transform


def _circulant_stage(code: QCCode):
    q = code.q
    parity = parity_base_columns(code.base)
    blocks = [[ring.circulant_poly(code.shifts[l][k], q) for k in parity] for l in range(code.base.M)]
    inverse = ring.matrix_inverse(blocks, q)
    if inverse is None:
        return None
    vectors = np.array([[ring.to_vector(entry, q) for entry in row] for row in inverse], dtype=float)
    columns = (parity[:, None] * q + np.arange(q)[None, :]).ravel()
    return CirculantStage(columns=columns, q=q, inverse_spectra=rfft(vectors, axis=-1))


def _elimination_stages(code: QCCode) -> List[EliminationStage]:
    h = code.parity_check.tocsc()
    preference = code.layout[::-1]
    level_one, amplitude = preference[:code.n_c], preference[code.n_c:]

    pivots, transform = gauss_jordan(h[:, level_one].toarray())
    rank = len(pivots)
    stages = [EliminationStage(columns=level_one[pivots], transform=transform[:rank])]
    remaining = transform[rank:]
    if not remaining.shape[0] or not amplitude.size:
        return stages

    residual = (h[:, amplitude].T @ remaining.T.astype(np.int64)).T % 2
    spill, reduction = gauss_jordan(residual)
    dropped = remaining.shape[0] - len(spill)
    if spill:
        combined = (reduction[:len(spill)].astype(np.int64) @ remaining) % 2
        stages.insert(0, EliminationStage(columns=amplitude[spill], transform=combined.astype(np.uint8)))
        logger.warning("level-1 columns leave %d checks unsolved; %d parity bits move to amplitude levels",
                       remaining.shape[0], len(spill))
    if dropped:
        logger.info("dropping %d dependent checks of %d", dropped, code.rows)
    return stages


def encoder_prep(code: QCCode) -> QCCode:
    """
    Attach a systematic encoder.

    Raises:
        InvalidBasematrixError: the level-1 group has fewer than M columns.
    """
    stage = _circulant_stage(code)
    if stage is not None:
        stages = (stage,)
    else:
        logger.info("parity circulants of seed %d are singular; eliminating over GF(2)", code.seed)
        stages = tuple(_elimination_stages(code))

    parity = np.concatenate([s.columns for s in stages])
    positions = np.flatnonzero(~np.isin(code.layout, parity))
    prep = EncoderPrep(
        systematic_columns=code.layout[positions],
        systematic_positions=positions,
        stages=stages,
    )
    logger.info("encoder for n=%d carries %d systematic bits", code.n, prep.k)
    return code.with_encoder(prep)


def encode(code: QCCode, systematic: np.ndarray) -> np.ndarray:
    """
    Codeword in lifted column order for systematic bits given in transmission
    order, one per position of ``code.encoder.systematic_positions``.
    """
    prep = code.encoder
    if prep is None:
        raise DomainError("code has no encoder; run encoder_prep first")
    systematic = np.asarray(systematic, dtype=np.int64)
    if systematic.shape != (prep.k,):
        raise DomainError(f"expected {prep.k} systematic bits, got shape {systematic.shape}")

    h = code.parity_check
    codeword = np.zeros(code.n, dtype=np.int64)
    codeword[prep.systematic_columns] = systematic
    for stage in prep.stages:
        codeword[stage.columns] = stage.solve((h @ codeword) % 2)
    return codeword.astype(np.uint8)


def to_transmission_order(code: QCCode, codeword: np.ndarray) -> np.ndarray:
    return np.asarray(codeword)[code.layout]


def to_lifted_order(code: QCCode, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    lifted = np.empty_like(values)
    lifted[code.layout] = values
    return lifted
