"""Exact linear algebra over the scalar tower and over the integers.

Matrices are tuples of row tuples.  Scalar matrices hold :class:`Scalar`
entries; intersection matrices hold Python ints.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, NotSymmetric
from .scalar import ONE, ZERO, S


def matrix(rows):
    return tuple(tuple(S(v) for v in row) for row in rows)


def identity(n):
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def zeros(n, m=None):
    m = n if m is None else m
    return tuple(tuple(ZERO for _ in range(m)) for _ in range(n))


def shape(a):
    return len(a), (len(a[0]) if a else 0)


def is_square(a):
    return all(len(row) == len(a) for row in a)


def matmul(a, b):
    cols = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in cols:
            acc = ZERO
            for u, v in zip(row, col):
                if u and v:
                    acc = acc + u * v
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def matvec(a, v):
    out = []
    for row in a:
        acc = ZERO
        for u, w in zip(row, v):
            if u and w:
                acc = acc + u * w
        out.append(acc)
    return tuple(out)


def add(a, b):
    return tuple(tuple(u + v for u, v in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a, b):
    return tuple(tuple(u - v for u, v in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(c, a):
    c = S(c)
    return tuple(tuple(c * u for u in row) for row in a)


def elementwise(fn, a):
    return tuple(tuple(fn(u) for u in row) for row in a)


def transpose(a):
    return tuple(zip(*a))


def is_zero_matrix(a):
    return all(u.is_zero() for row in a for u in row)


def trace(a):
    acc = ZERO
    for i in range(len(a)):
        acc = acc + a[i][i]
    return acc


def columns(a):
    return [tuple(col) for col in zip(*a)]


def from_columns(cols):
    return tuple(zip(*cols))


def _size(s):
    return len(str(s))


def _pick_pivot(rows, col, start):
    best = None
    for r in range(start, len(rows)):
        v = rows[r][col]
        if v:
            size = _size(v)
            if best is None or size < best[0]:
                best = (size, r)
    return None if best is None else best[1]


def det(a):
    """Determinant by Gaussian elimination over the field."""
    n = len(a)
    rows = [list(r) for r in a]
    result = ONE
    for c in range(n):
        p = _pick_pivot(rows, c, c)
        if p is None:
            return ZERO
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            result = -result
        piv = rows[c][c]
        result = result * piv
        inv = piv.inverse()
        for r in range(c + 1, n):
            if rows[r][c]:
                f = rows[r][c] * inv
                rows[r] = [u - f * v if v else u for u, v in zip(rows[r], rows[c])]
    return result


def solve(a, b):
    """Solve ``a X = b`` for square invertible ``a``; ``b`` is a matrix."""
    n = len(a)
    rows = [list(ra) + list(rb) for ra, rb in zip(a, b)]
    for c in range(n):
        p = _pick_pivot(rows, c, c)
        if p is None:
            raise DivisionByZero("singular matrix")
        rows[c], rows[p] = rows[p], rows[c]
        inv = rows[c][c].inverse()
        rows[c] = [u * inv for u in rows[c]]
        for r in range(n):
            if r != c and rows[r][c]:
                f = rows[r][c]
                rows[r] = [u - f * v if v else u for u, v in zip(rows[r], rows[c])]
    return tuple(tuple(row[n:]) for row in rows)


def inverse(a):
    return solve(a, identity(len(a)))


def solve_vector(a, v):
    return tuple(r[0] for r in solve(a, tuple((u,) for u in v)))


def charpoly(a):
    """Coefficients ``[c_0, ..., c_n]`` (``c_n = 1``) of ``det(lambda*I - a)``.

    Faddeev-LeVerrier recursion; the only divisions are by small integers.
    """
    n = len(a)
    if not is_square(a):
        raise ValueError("charpoly needs a square matrix")
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    m = zeros(n)
    for k in range(1, n + 1):
        m = add(matmul(a, m), scale(coeffs[n - k + 1], identity(n)))
        coeffs[n - k] = -trace(matmul(a, m)) / k
    return coeffs


def poly_at_matrix(coeffs, a):
    """Evaluate a polynomial (low-to-high coefficients) at a square matrix."""
    n = len(a)
    out = zeros(n)
    for c in reversed(coeffs):
        out = add(matmul(out, a), scale(c, identity(n)))
    return out


def format_poly(coeffs, var="lambda"):
    """Printable form of a polynomial with Scalar coefficients."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c.is_zero():
            continue
        mon = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mon:
            parts.append(f"({c})")
        elif c.is_one():
            parts.append(mon)
        else:
            parts.append(f"({c})*{mon}")
    return " + ".join(parts) if parts else "0"


# integer matrices ----------------------------------------------------------
def is_symmetric(a):
    n = len(a)
    return all(len(row) == n for row in a) and all(
        a[i][j] == a[j][i] for i in range(n) for j in range(n)
    )


def int_det(a):
    """Bareiss fraction-free determinant of an integer matrix."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def leading_minors(a):
    return [int_det([row[:k] for row in a[:k]]) for k in range(1, len(a) + 1)]


def is_negative_definite(a):
    """Sylvester's criterion on ``-a``: ``(-1)^k * minor_k > 0`` for all k."""
    if not is_symmetric(a):
        raise NotSymmetric(f"matrix {a} is not symmetric")
    return all((-1) ** k * d > 0 for k, d in enumerate(leading_minors(a), start=1))


def int_matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def rational_solve(rows, rhs):
    """Exact least-structure solve over Q: find any ``z`` with ``rows @ z = rhs``.

    ``rows`` is an m x n list of Fractions.  Returns ``None`` when the system
    is inconsistent.
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [u - f * v for u, v in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(all(v == 0 for v in row[:n]) and row[n] != 0 for row in aug):
        return None
    z = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        z[c] = aug[i][n]
    return z

