import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import scalars, to_sympy
from regcrit import linalg
from regcrit.errors import NotSymmetric
from regcrit.scalar import ONE, ZERO, X, Y


@st.composite
def square(draw, n=None):
    n = n or draw(st.integers(1, 3))
    return linalg.matrix([[draw(scalars()) for _ in range(n)] for _ in range(n)])


POINTS = [
    {"x": sympy.Rational(2, 7), "y": sympy.Rational(-5, 3), "c1": sympy.Rational(11, 13), "c2": 3},
    {"x": sympy.Rational(-9, 4), "y": sympy.Rational(1, 6), "c1": -2, "c2": sympy.Rational(7, 5)},
]


def at(expr, point):
    return expr.subs({sympy.Symbol(k): v for k, v in point.items()})


@given(square())
def test_det_matches_sympy_at_points(m):
    d = to_sympy(linalg.det(m))
    for point in POINTS:
        numeric = sympy.Matrix([[at(to_sympy(u), point) for u in row] for row in m])
        if any(v.has(sympy.zoo, sympy.nan) for v in numeric):
            continue
        assert at(d, point) == numeric.det()


@given(square())
def test_cayley_hamilton(m):
    cp = linalg.charpoly(m)
    assert cp[-1] == ONE
    assert linalg.is_zero_matrix(linalg.poly_at_matrix(cp, m))


@given(square())
def test_charpoly_constant_term_is_signed_det(m):
    n = len(m)
    assert linalg.charpoly(m)[0] == (-1) ** n * linalg.det(m)


@given(square())
def test_inverse(m):
    if linalg.det(m).is_zero():
        return
    assert linalg.matmul(m, linalg.inverse(m)) == linalg.identity(len(m))


def test_solve_vector():
    a = linalg.matrix([[X, ONE], [ZERO, Y]])
    v = linalg.solve_vector(a, (ONE, ONE))
    assert linalg.matvec(a, v) == (ONE, ONE)


int_sym = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(-4, 4), min_size=n * n, max_size=n * n).map(
        lambda xs, n=n: [[xs[min(i, j) * n + max(i, j)] for j in range(n)] for i in range(n)]
    )
)


@given(int_sym)
def test_negative_definite_matches_eigenvalues(a):
    eig = sympy.Matrix(a).eigenvals()
    expected = all(sympy.re(sympy.N(v)) < 0 for v in eig)
    assert linalg.is_negative_definite(a) == expected


@given(int_sym)
def test_int_det_matches_sympy(a):
    assert linalg.int_det(a) == sympy.Matrix(a).det()


def test_sylvester_on_known_matrices():
    assert linalg.is_negative_definite([[-3, 0, 1], [0, -2, 1], [1, 1, -1]])
    assert linalg.leading_minors([[-3, 0, 1], [0, -2, 1], [1, 1, -1]]) == [-3, 6, -1]
    assert not linalg.is_negative_definite([[-1, 1], [1, -1]])
    assert not linalg.is_negative_definite([[1]])


def test_not_symmetric():
    with pytest.raises(NotSymmetric):
        linalg.is_negative_definite([[-1, 1], [0, -1]])


def test_rational_solve():
    from fractions import Fraction

    assert linalg.rational_solve([[1, 1], [1, -1]], [2, 0]) == [Fraction(1), Fraction(1)]
    assert linalg.rational_solve([[1, 1], [2, 2]], [1, 3]) is None
