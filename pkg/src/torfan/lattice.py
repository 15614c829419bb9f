"""Exact integer and rational linear algebra on small lattices.

Everything here works on plain Python ints and :class:`fractions.Fraction`;
matrices are sequences of rows.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Vector = tuple[int, ...]


def is_primitive(v: Sequence[int]) -> bool:
    g = 0
    for c in v:
        g = gcd(g, c)
    return g == 1


def add(*vectors: Sequence[int]) -> Vector:
    return tuple(sum(cs) for cs in zip(*vectors))


def scale(k: int, v: Sequence[int]) -> Vector:
    return tuple(k * c for c in v)


def neg(v: Sequence[int]) -> Vector:
    return tuple(-c for c in v)


def combination(coeffs: Sequence[int], vectors: Sequence[Sequence[int]], dim: int) -> Vector:
    out = [0] * dim
    for a, v in zip(coeffs, vectors):
        if a:
            for i, c in enumerate(v):
                out[i] += a * c
    return tuple(out)


def det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss, fraction free)."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(c) for c in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve_in_span(columns: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[list[Fraction]]:
    """Coefficients ``a`` with ``sum(a[j] * columns[j]) == target``.

    The columns must be linearly independent. Returns ``None`` when the
    target is not in their rational span.
    """
    k = len(columns)
    n = len(target)
    # augmented n x (k+1) system
    m = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    row = 0
    pivots = []
    for c in range(k):
        piv = next((i for i in range(row, n) if m[i][c] != 0), None)
        if piv is None:
            raise ValueError("columns are linearly dependent")
        m[row], m[piv] = m[piv], m[row]
        p = m[row][c]
        m[row] = [a / p for a in m[row]]
        for i in range(n):
            if i != row and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(row)
        row += 1
    for i in range(row, n):
        if m[i][k] != 0:
            return None
    return [m[pivots[j]][k] for j in range(k)]


def inverse(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(rows)
    m = [[Fraction(c) for c in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [a / p for a in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [r[n:] for r in m]


def quotient_map(vectors: Sequence[Sequence[int]], dim: int) -> list[Vector]:
    """Integer matrix of the projection ``Z^dim -> Z^dim / L``.

    ``L`` is the sublattice spanned by ``vectors``, which must be part of a
    lattice basis (saturated and independent). The returned ``dim - k`` rows
    give a surjection onto ``Z^(dim-k)`` whose kernel is exactly ``L``.

    Unimodular row operations bring the column matrix of ``vectors`` to
    echelon form; the rows of the transform below the echelon block span the
    annihilator. Pivoting always uses the first row with a nonzero entry, so
    the result is reproducible.
    """
    k = len(vectors)
    # a = columns of vectors (dim x k), u = accumulated unimodular transform
    a = [[vectors[j][i] for j in range(k)] for i in range(dim)]
    u = [[int(i == j) for j in range(dim)] for i in range(dim)]
    top = 0
    for c in range(k):
        while True:
            nz = [i for i in range(top, dim) if a[i][c] != 0]
            if not nz:
                raise ValueError("vectors are linearly dependent")
            piv = min(nz, key=lambda i: (abs(a[i][c]), i))
            if piv != top:
                a[top], a[piv] = a[piv], a[top]
                u[top], u[piv] = u[piv], u[top]
            done = True
            for i in range(top + 1, dim):
                if a[i][c] != 0:
                    q = a[i][c] // a[top][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[top])]
                    if a[i][c] != 0:
                        done = False
            if done:
                break
        if abs(a[top][c]) != 1:
            raise ValueError("vectors do not span a saturated sublattice")
        top += 1
    return [tuple(r) for r in u[k:]]


def apply(matrix: Sequence[Sequence[int]], v: Sequence[int]) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in matrix)
