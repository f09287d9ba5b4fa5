"""
Arithmetic in GF(2)[x] / (x^Q - 1), the ring of Q x Q binary circulants.

Polynomials are Python integers whose bit i is the coefficient of x^i. The
circulant P_s (row r has its one in column r + s mod Q) acts on a vector
v(x) = sum v[i] x^i as multiplication by x^(-s).
"""

from typing import List, Optional, Sequence

import numpy as np

Poly = int
PolyMatrix = List[List[Poly]]


def circulant_poly(shifts: Sequence[int], q: int) -> Poly:
    """Polynomial of the sum of the circulants P_s for ``shifts``."""
    value = 0
    for shift in shifts:
        value ^= 1 << ((-int(shift)) % q)
    return value


def weight(value: Poly) -> int:
    return bin(value).count('1')


def _exponents(value: Poly):
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def reduce(value: Poly, q: int) -> Poly:
    mask = (1 << q) - 1
    while value >> q:
        value = (value & mask) ^ (value >> q)
    return value


def clmul(a: Poly, b: Poly) -> Poly:
    """Carry-less product; loops over the sparser operand."""
    if weight(a) > weight(b):
        a, b = b, a
    product = 0
    for exponent in _exponents(a):
        product ^= b << exponent
    return product


def multiply(a: Poly, b: Poly, q: int) -> Poly:
    return reduce(clmul(a, b), q)


def _divmod(a: Poly, b: Poly):
    quotient = 0
    width = b.bit_length()
    while a.bit_length() >= width:
        shift = a.bit_length() - width
        quotient |= 1 << shift
        a ^= b << shift
    return quotient, a


def inverse(value: Poly, q: int) -> Optional[Poly]:
    """Inverse modulo x^Q - 1, or None when gcd(value, x^Q - 1) != 1."""
    r0, r1 = (1 << q) | 1, reduce(value, q)
    s0, s1 = 0, 1
    while r1:
        quotient, remainder = _divmod(r0, r1)
        r0, r1 = r1, remainder
        s0, s1 = s1, s0 ^ clmul(quotient, s1)
    if r0 != 1:
        return None
    return reduce(s0, q)


def _minor(matrix: PolyMatrix, row: int, column: int) -> PolyMatrix:
    return [r[:column] + r[column + 1:] for i, r in enumerate(matrix) if i != row]


def determinant(matrix: PolyMatrix, q: int) -> Poly:
    """Laplace expansion along the first row; signs vanish in characteristic 2."""
    size = len(matrix)
    if size == 0:
        return 1
    if size == 1:
        return reduce(matrix[0][0], q)
    total = 0
    for column, entry in enumerate(matrix[0]):
        if entry:
            total ^= multiply(entry, determinant(_minor(matrix, 0, column), q), q)
    return total


def adjugate(matrix: PolyMatrix, q: int) -> PolyMatrix:
    size = len(matrix)
    if size == 1:
        return [[1]]
    return [[determinant(_minor(matrix, column, row), q) for column in range(size)]
            for row in range(size)]


def matrix_inverse(matrix: PolyMatrix, q: int) -> Optional[PolyMatrix]:
    """Inverse of a square polynomial matrix, or None when it is singular."""
    det_inverse = inverse(determinant(matrix, q), q)
    if det_inverse is None:
        return None
    return [[multiply(det_inverse, entry, q) for entry in row] for row in adjugate(matrix, q)]


def to_vector(value: Poly, q: int) -> np.ndarray:
    vector = np.zeros(q, dtype=np.uint8)
    for exponent in _exponents(value):
        vector[exponent] = 1
    return vector
