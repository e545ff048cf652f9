"""Exact matrix helpers over Scalar / CoeffFn / RatFn and integer lattices.

Matrices are plain lists of rows.  Field operations (inverse, rank, pivot
selection) require Scalar entries; determinants and products work over any
of the exact rings.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Callable, Sequence

from .scalars import ONE, ZERO, ArithmeticError_, Scalar

Matrix = list


def zeros(r: int, c: int, zero=ZERO) -> Matrix:
    return [[zero for _ in range(c)] for _ in range(r)]


def identity(n: int, one=ONE, zero=ZERO) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def shape(a: Matrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {ra}x{ca} @ {rb}x{cb}")
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            acc = None
            for k in range(ca):
                x = a[i][k]
                y = b[k][j]
                if not x or not y:
                    continue
                t = x * y
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else (a[i][0] * 0 if ca else ZERO))
        out.append(row)
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def matmap(a: Matrix, f: Callable) -> Matrix:
    return [[f(x) for x in row] for row in a]


def matadd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def first_nonzero_entry(a: Matrix):
    """Return (i, j, value) of the first nonzero entry or None."""
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            if x:
                return i, j, x
    return None


def det(a: Matrix):
    """Determinant by cofactor expansion with memoised minors (small sizes)."""
    n = len(a)
    memo: dict = {}

    def rec(row: int, cols: tuple):
        if row == n:
            return 1
        if cols in memo:
            return memo[cols]
        acc = 0
        for idx, c in enumerate(cols):
            x = a[row][c]
            if not x:
                continue
            sub = rec(row + 1, cols[:idx] + cols[idx + 1:])
            if isinstance(sub, int) and sub == 0:
                continue
            t = x * sub
            acc = (t if idx % 2 == 0 else -t) if isinstance(acc, int) else (acc + t if idx % 2 == 0 else acc - t)
        memo[cols] = acc
        return acc

    out = rec(0, tuple(range(n)))
    if isinstance(out, int):
        return ONE * out if n == 0 else a[0][0] * out
    return out


def maximal_minors(a: Matrix) -> list:
    """All maximal minors of a rectangular matrix (row subsets if tall)."""
    r, c = shape(a)
    if r == c:
        return [det(a)]
    if r > c:
        return [det([a[i] for i in rows]) for rows in combinations(range(r), c)]
    return [det([[row[j] for j in cols] for row in a]) for cols in combinations(range(c), r)]


def inverse(a: Matrix) -> Matrix:
    """Gauss-Jordan inverse over the Scalar field."""
    n = len(a)
    m = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            raise ArithmeticError_("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col].inverse()
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def independent_columns(vectors: Sequence[Sequence[Scalar]], limit: int | None = None) -> list[int]:
    """Indices of the greedily selected linearly independent vectors, in order."""
    basis: list[tuple[int, list]] = []  # (pivot position, reduced vector)
    chosen: list[int] = []
    for idx, v in enumerate(vectors):
        w = list(v)
        for p, b in basis:
            if w[p]:
                f = w[p]
                w = [x - f * y for x, y in zip(w, b)]
        p = next((k for k, x in enumerate(w) if x), None)
        if p is None:
            continue
        inv = w[p].inverse()
        w = [x * inv for x in w]
        basis.append((p, w))
        chosen.append(idx)
        if limit is not None and len(chosen) == limit:
            break
    return chosen


def rank(vectors: Sequence[Sequence[Scalar]]) -> int:
    return len(independent_columns(vectors))


def solve(a: Matrix, b: Sequence[Scalar]) -> list[Scalar] | None:
    """Unique solution of a square or overdetermined consistent system, else None."""
    r, c = shape(a)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    piv_cols = []
    row = 0
    for col in range(c):
        piv = next((k for k in range(row, r) if m[k][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col].inverse()
        m[row] = [x * inv for x in m[row]]
        for k in range(r):
            if k != row and m[k][col]:
                f = m[k][col]
                m[k] = [x - f * y for x, y in zip(m[k], m[row])]
        piv_cols.append(col)
        row += 1
    for k in range(row, r):
        if m[k][c]:
            return None
    if len(piv_cols) < c:
        return None
    out = [ZERO] * c
    for k, col in enumerate(piv_cols):
        out[col] = m[k][c]
    return out


# --------------------------------------------------------------------------
# Integer linear systems
# --------------------------------------------------------------------------


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def integer_solutions(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve ``rows @ x = rhs`` over the integers.

    Returns ``None`` when there is no integer solution, otherwise
    ``(x0, kernel)`` with every integer solution equal to
    ``x0 + sum(z_k * kernel[k])`` for integers ``z_k``.
    """
    nvar = len(rows[0]) if rows else 0
    a: list[list[int]] = []
    b: list[int] = []
    for row, v in zip(rows, rhs):
        den = lcm(*(Fraction(x).denominator for x in row), Fraction(v).denominator)
        a.append([int(Fraction(x) * den) for x in row])
        b.append(int(Fraction(v) * den))
    u = [[1 if i == j else 0 for j in range(nvar)] for i in range(nvar)]
    h = [list(r) for r in a]
    pivots: list[tuple[int, int]] = []  # (row, col)
    col = 0
    for i in range(len(h)):
        if col >= nvar:
            break
        # gather the gcd of h[i][col:] into h[i][col] with unimodular column ops
        for j in range(col + 1, nvar):
            if h[i][j] == 0:
                continue
            g, s, t = _xgcd(h[i][col], h[i][j])
            if g == 0:
                continue
            p, q = h[i][col] // g, h[i][j] // g
            for mat in (h, u):
                for r in mat:
                    c1, c2 = r[col], r[j]
                    r[col], r[j] = s * c1 + t * c2, -q * c1 + p * c2
        if h[i][col] != 0:
            if h[i][col] < 0:
                for mat in (h, u):
                    for r in mat:
                        r[col] = -r[col]
            pivots.append((i, col))
            col += 1
    y = [0] * nvar
    piv_of_row = dict(pivots)
    for i in range(len(h)):
        if i in piv_of_row:
            c = piv_of_row[i]
            acc = sum(h[i][j] * y[j] for j in range(c))
            num = b[i] - acc
            if num % h[i][c]:
                return None
            y[c] = num // h[i][c]
        else:
            acc = sum(h[i][j] * y[j] for j in range(nvar))
            if acc != b[i]:
                return None
    x0 = [sum(u[r][c] * y[c] for c in range(nvar)) for r in range(nvar)]
    kernel = [[u[r][c] for r in range(nvar)] for c in range(col, nvar)]
    return x0, kernel


def gcd_list(values) -> int:
    g = 0
    for v in values:
        g = gcd(g, int(v))
    return g
