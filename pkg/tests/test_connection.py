import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

import corpus
from conftest import SX, SY, polys, to_sympy
from regcrit import linalg
from regcrit.connection import (
    ModelBlock,
    NiceFormalModel,
    PlaneConnection,
    assemble_nice_model,
    check_flatness,
    curvature,
    gauge,
    lift_param,
    pull_through_chart,
    pullback_curve,
    restrict_to_component,
    substitute,
    translate,
    varpi_projection,
)
from regcrit.diffmod import Exponent, is_regular, katz_rank, leading_divisor, residue_exponents
from regcrit.errors import (
    ComponentNotInChart,
    CurveInsidePolarLocus,
    IntegrabilityViolation,
    NotFlat,
    NotSplittable,
)
from regcrit.resolution import CurveGerm, embedded_resolution
from regcrit.scalar import ONE, ZERO, S, Scalar, X, Y, parse

C1 = Scalar.var("c1")
C2 = Scalar.var("c2")


def rank1(a_x, a_y):
    return PlaneConnection(((S(a_x),),), ((S(a_y),),))


def closed_form(g):
    """``A = dg``: always flat in rank one."""
    return rank1(g.derivative("x"), g.derivative("y"))


def unipotent(rank, entry):
    g = [[ONE if i == j else ZERO for j in range(rank)] for i in range(rank)]
    if rank > 1:
        g[0][rank - 1] = entry
    return g


def random_flat(rng, rank):
    """Diagonal of exact rank-one pieces, scrambled by a unipotent gauge."""
    a_x = [[ZERO] * rank for _ in range(rank)]
    a_y = [[ZERO] * rank for _ in range(rank)]
    for i in range(rank):
        g = rng.choice([C1 / X + C2 / Y, 1 / (X * Y), Y / X, X + Y, X / Y**2])
        a_x[i][i], a_y[i][i] = g.derivative("x"), g.derivative("y")
    return gauge(PlaneConnection(a_x, a_y), unipotent(rank, rng.choice([X, Y, X + Y, ONE])))


# flatness -------------------------------------------------------------------------------
def test_flatness_examples():
    assert check_flatness(PlaneConnection.trivial(2))
    assert check_flatness(rank1(C1 / X, C2 / Y))
    assert not check_flatness((((0, 1), (0, 0)), ((0, 0), (1, 0))))


def test_not_flat_is_rejected():
    with pytest.raises(NotFlat):
        PlaneConnection(((ZERO, ONE), (ZERO, ZERO)), ((ZERO, ZERO), (ONE, ZERO)))


def test_curvature_matches_sympy():
    a_x = ((C1 / X, ONE), (ZERO, Y))
    a_y = ((ZERO, X), (ONE / Y, ZERO))
    sx = sympy.Matrix([[to_sympy(u) for u in row] for row in a_x])
    sy = sympy.Matrix([[to_sympy(u) for u in row] for row in a_y])
    expected = sy.diff(SX) - sx.diff(SY) + sx * sy - sy * sx
    got = curvature(linalg.matrix(a_x), linalg.matrix(a_y))
    for i in range(2):
        for j in range(2):
            assert sympy.simplify(to_sympy(got[i][j]) - expected[i, j]) == 0


@given(polys())
def test_exact_forms_are_flat(g):
    assert check_flatness(closed_form(g / (X * Y + 1)))


@pytest.mark.parametrize("seed", range(6))
def test_gauge_preserves_flatness(seed):
    rng = random.Random(seed)
    conn = random_flat(rng, rng.randint(1, 3))
    assert check_flatness(gauge(conn, unipotent(conn.rank, X * Y + 1)))


def test_declared_polar_locus_must_cover_poles():
    with pytest.raises(ValueError):
        PlaneConnection(((1 / X,),), ((ZERO,),), polar_locus=(Y,))
    assert set(rank1(1 / X, 1 / (Y - 1)).polar_locus) == {X, Y - 1}


# charts ---------------------------------------------------------------------------------
def test_pull_through_chart_example():
    tree = embedded_resolution([CurveGerm("C", parse("y^2 - x^3"))])
    pulled = pull_through_chart(rank1(C1 / X, C2 / Y), tree.chart("C1a"))
    assert pulled.a_x == (((C1 + C2) / X,),)
    assert pulled.a_y == ((C2 / Y,),)
    root = tree.chart("R")
    conn = rank1(C1 / X, C2 / Y)
    assert pull_through_chart(conn, root) == conn


@pytest.mark.parametrize("seed", range(4))
def test_flat_through_every_chart(seed):
    rng = random.Random(10 + seed)
    conn = random_flat(rng, rng.randint(1, 2))
    tree = embedded_resolution([CurveGerm("C", parse(rng.choice(list(corpus.BASIC_GERMS.values()))))])
    for chart in tree.charts:
        assert check_flatness(pull_through_chart(conn, chart))


def test_substitution_matches_sympy_chain_rule():
    conn = rank1(C1 / X + Y, C2 / Y + X)
    sigma = (X * Y, Y**2 + X)
    pulled = substitute(conn, sigma)
    ax, ay = to_sympy(conn.a_x[0][0]), to_sympy(conn.a_y[0][0])
    sx, sy = SX * SY, SY**2 + SX
    sub = {SX: sx, SY: sy}
    for k, var in enumerate((SX, SY)):
        expected = ax.subs(sub, simultaneous=True) * sympy.diff(sx, var) + ay.subs(sub, simultaneous=True) * sympy.diff(sy, var)
        got = to_sympy((pulled.a_x, pulled.a_y)[k][0][0])
        assert sympy.simplify(got - expected) == 0


def test_translate():
    conn = rank1(C1 / (X - 1), ZERO)
    assert translate(conn, (1, 0)).a_x == ((C1 / X,),)


# restriction and pullback -------------------------------------------------------------------
def test_restriction_examples():
    m = restrict_to_component(PlaneConnection.trivial(2), X)
    assert linalg.is_zero_matrix(m.theta_matrix) and is_regular(m)
    m = restrict_to_component(rank1(C1 / X, C2 / Y), X)
    assert m.theta_matrix == ((C1,),)
    assert residue_exponents(m) == (Exponent.from_scalar(C1),)
    # u = x, v = y: A_u = v/u^2
    m = restrict_to_component(rank1(Y / X**2, -1 / X), X)
    assert m.theta_matrix == ((Y / X,),)
    assert katz_rank(m).rho == 1
    assert leading_divisor(m).phi == X - Y


def test_restriction_along_y_swaps_roles():
    m = restrict_to_component(closed_form(X / Y), Y)
    # y becomes the transverse coordinate, printed as x
    assert m.theta_matrix == ((-Y / X,),)


def test_restriction_needs_a_line():
    with pytest.raises(ComponentNotInChart):
        restrict_to_component(rank1(C1 / X, ZERO), X + Y**2)


def test_pullback_examples():
    m = pullback_curve(rank1(C1 / X, C2 / Y), (X**2, X**3))
    assert m.theta_matrix == ((2 * C1 + 3 * C2,),)
    assert residue_exponents(m) == (Exponent.from_scalar(2 * C1 + 3 * C2),)
    m = pullback_curve(rank1(1 / X**2, ZERO), (X, ONE))
    assert m.theta_matrix[0][0].ord("x") == -1
    assert katz_rank(m).rho == 1
    assert is_regular(pullback_curve(PlaneConnection.trivial(2), (X + X**2, X**3)))


@given(st.integers(1, 5), st.integers(1, 5))
def test_monomial_pullback_oracle(p, q):
    m = pullback_curve(rank1(C1 / X, C2 / Y), (X**p, X**q))
    # t * (c1 * p t^(p-1) / t^p + c2 * q t^(q-1) / t^q)
    assert m.theta_matrix == ((p * C1 + q * C2,),)


def test_curve_inside_polar_locus():
    with pytest.raises(CurveInsidePolarLocus):
        pullback_curve(rank1(C1 / X, C2 / Y), (X, ZERO))


def test_lift_param_through_cusp_tree():
    tree = embedded_resolution([CurveGerm("C", parse("y^2 - x^3"))])
    chart = tree.chart("C3a")
    xt, yt = lift_param(tree, chart, (X**2, X**3))
    eq = chart.curve("C").equation
    assert eq.subs({"x": xt, "y": yt}).is_zero()


# varpi and models -------------------------------------------------------------------------------
def test_varpi_examples():
    f = 1 / X + 1 / (X * Y) + 1 / Y
    assert varpi_projection(f) == 1 / X + 1 / (X * Y)
    assert varpi_projection(X + Y**2 + 3) == ZERO
    assert varpi_projection(Y / X) == Y / X


def test_varpi_is_projection():
    f = 1 / (X**2 * Y) + Y / X + 1 / Y + X / (1 + X + Y)
    p = varpi_projection(f)
    assert varpi_projection(p) == p
    assert varpi_projection(f - p) == ZERO


def test_varpi_not_splittable():
    with pytest.raises(NotSplittable):
        varpi_projection(1 / (X - Y))


def test_model_one_over_xy():
    f = 1 / (X * Y)
    model = NiceFormalModel((ModelBlock(f.theta("x"), f.theta("y")),))
    conn = assemble_nice_model(model)
    assert check_flatness(conn)
    assert katz_rank(restrict_to_component(conn, X)).rho == 1


def test_model_trivial_block():
    conn = assemble_nice_model(NiceFormalModel((ModelBlock(ZERO, ZERO),)))
    assert conn == PlaneConnection.trivial(1)


def test_model_integrability():
    f = 1 / (X * Y)
    with pytest.raises(IntegrabilityViolation):
        NiceFormalModel((ModelBlock(f, ZERO),))


def test_model_blocks_must_differ():
    f = 1 / (X * Y)
    b = ModelBlock(f.theta("x"), f.theta("y"))
    c = ModelBlock(f.theta("x") + X, f.theta("y") + Y)
    with pytest.raises(ValueError):
        NiceFormalModel((b, c))


def test_scrambled_model_keeps_slopes():
    f = 1 / (X * Y)
    g = 2 / X
    model = NiceFormalModel(
        (ModelBlock(f.theta("x"), f.theta("y")), ModelBlock(g.theta("x"), g.theta("y"))),
        scramble=((ONE, X + Y), (ZERO, ONE)),
    )
    conn = assemble_nice_model(model)
    assert check_flatness(conn)
    assert katz_rank(restrict_to_component(conn, X)).rho == 1
