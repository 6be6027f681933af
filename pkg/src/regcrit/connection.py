"""Flat connections ``nabla = d + A_x dx + A_y dy`` on the punctured plane."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .diffmod import MAX_RANK, DiffModule
from .errors import (
    ComponentNotInChart,
    CurveInsidePolarLocus,
    DivisionByZero,
    IntegrabilityViolation,
    NotFlat,
    NotSplittable,
    SizeLimit,
)
from .scalar import ZERO, S, Scalar, X, Y, factor


def curvature(a_x, a_y):
    """``d_x A_y - d_y A_x + [A_x, A_y]``."""
    dy = linalg.elementwise(lambda u: u.derivative("x"), a_y)
    dx = linalg.elementwise(lambda u: u.derivative("y"), a_x)
    comm = linalg.sub(linalg.matmul(a_x, a_y), linalg.matmul(a_y, a_x))
    return linalg.add(linalg.sub(dy, dx), comm)


def _polar_factors(a_x, a_y):
    out = set()
    for row in a_x + a_y:
        for u in row:
            if u.denominator().free_of("x", "y"):
                continue
            for f, _ in factor(u.denominator())[1]:
                if not f.free_of("x", "y"):
                    out.add(f)
    return tuple(sorted(out, key=str))


@dataclass(frozen=True)
class PlaneConnection:
    a_x: tuple
    a_y: tuple
    polar_locus: tuple = None
    verify: bool = field(default=True, compare=False)

    def __post_init__(self):
        a_x = linalg.matrix(self.a_x)
        a_y = linalg.matrix(self.a_y)
        if not a_x or not linalg.is_square(a_x) or len(a_x) != len(a_y) or not linalg.is_square(a_y):
            raise ValueError("A_x and A_y must be square of the same size")
        if len(a_x) > MAX_RANK:
            raise SizeLimit(f"rank {len(a_x)} exceeds {MAX_RANK}")
        object.__setattr__(self, "a_x", a_x)
        object.__setattr__(self, "a_y", a_y)
        found = _polar_factors(a_x, a_y)
        if self.polar_locus is None:
            object.__setattr__(self, "polar_locus", found)
        else:
            declared = tuple(S(f) for f in self.polar_locus)
            object.__setattr__(self, "polar_locus", declared)
            for f in found:
                if not any((g / f).is_polynomial() for g in declared):
                    raise ValueError(f"pole along {f} is outside the declared polar locus")
        if self.verify and not linalg.is_zero_matrix(curvature(a_x, a_y)):
            raise NotFlat("curvature of the connection is nonzero")

    @property
    def rank(self):
        return len(self.a_x)

    @classmethod
    def trivial(cls, rank=1):
        return cls(linalg.zeros(rank), linalg.zeros(rank))

    def __str__(self):
        def fmt(m):
            return "; ".join(", ".join(str(u) for u in row) for row in m)

        return f"PlaneConnection[A_x = {fmt(self.a_x)} | A_y = {fmt(self.a_y)}]"


def check_flatness(conn):
    """Exact curvature test; accepts a connection or a pair ``(A_x, A_y)``."""
    if isinstance(conn, PlaneConnection):
        a_x, a_y = conn.a_x, conn.a_y
    else:
        a_x, a_y = (linalg.matrix(m) for m in conn)
    return linalg.is_zero_matrix(curvature(a_x, a_y))


def gauge(conn, g):
    """Basis change ``A -> G^-1 A G + G^-1 dG`` in both directions."""
    g = linalg.matrix(g)
    gi = linalg.inverse(g)

    def one(a, var):
        dg = linalg.elementwise(lambda u: u.derivative(var), g)
        return linalg.add(linalg.matmul(gi, linalg.matmul(a, g)), linalg.matmul(gi, dg))

    return PlaneConnection(one(conn.a_x, "x"), one(conn.a_y, "y"))


def substitute(conn, sigma):
    """Pull back along ``(x, y) = sigma(x, y)``, ``sigma`` a pair of Scalars."""
    sx, sy = (S(s) for s in sigma)
    sub = {"x": sx, "y": sy}
    jac = ((sx.derivative("x"), sx.derivative("y")), (sy.derivative("x"), sy.derivative("y")))
    mats = []
    for k in range(2):
        out = []
        for row_x, row_y in zip(conn.a_x, conn.a_y):
            out.append(
                tuple(
                    u.subs(sub) * jac[0][k] + v.subs(sub) * jac[1][k] if (u or v) else ZERO
                    for u, v in zip(row_x, row_y)
                )
            )
        mats.append(tuple(out))
    return PlaneConnection(mats[0], mats[1])


def pull_through_chart(conn, chart):
    """The connection in the coordinates of a resolution chart."""
    if chart.kind == "root":
        return conn
    return substitute(conn, chart.to_root)


def translate(conn, point):
    """Move ``point`` to the origin."""
    a, b = (S(c) for c in point)
    if not a and not b:
        return conn
    return substitute(conn, (X + a, Y + b))


def _line(local_equation):
    """``(axis, offset)`` for a line ``x - a`` or ``y - b``."""
    if isinstance(local_equation, str):
        local_equation = S(local_equation) if local_equation not in ("x", "y") else Scalar.var(local_equation)
    f = S(local_equation)
    for axis, other in (("x", "y"), ("y", "x")):
        if f.is_polynomial() and not f.depends_on(other) and f.degree(axis)[0] == 1:
            coeffs, _ = f.coefficients(axis)
            return axis, -coeffs.get(0, ZERO) / coeffs[1]
    raise ComponentNotInChart(f"{f} is not a coordinate line of the chart")


def restrict_to_component(conn, local_equation):
    """Module of ``nabla(theta_u)`` along ``u = 0``, ``u`` the transverse coordinate.

    ``local_equation`` is ``x - a`` or ``y - b``.  In the returned module the
    transverse coordinate is called ``x`` and the coordinate along the
    component is called ``y``.
    """
    axis, offset = _line(local_equation)
    if axis == "x":
        a = conn.a_x
        sub = {"x": X + offset}
        mult = X
    else:
        a = conn.a_y
        sub = {"x": Y, "y": X + offset}
        mult = X
    rows = [[(u.subs(sub) * mult) if u else ZERO for u in row] for row in a]
    return DiffModule(linalg.matrix(rows), "y")


def pullback_curve(conn, param):
    """Module of ``nabla(theta_t)`` on the curve ``t -> (x(t), y(t))``.

    The parameter is written ``x`` (a polynomial pair in ``x``); the module
    has no coefficient variable.
    """
    xt, yt = (S(p) for p in param)
    if not (xt.free_of("y") and yt.free_of("y")):
        raise ValueError("parametrizations must only involve t")
    if xt.free_of("x") and yt.free_of("x"):
        raise ValueError("parametrization is constant")
    sub = {"x": xt, "y": yt}
    dx, dy = xt.derivative("x"), yt.derivative("x")
    rows = []
    for row_x, row_y in zip(conn.a_x, conn.a_y):
        out = []
        for u, v in zip(row_x, row_y):
            try:
                w = u.subs(sub) * dx + v.subs(sub) * dy
            except (DivisionByZero, ZeroDivisionError) as exc:
                raise CurveInsidePolarLocus(f"the curve ({xt}, {yt}) lies in the polar locus") from exc
            out.append(w * X)
        rows.append(out)
    return DiffModule(linalg.matrix(rows), None)


def lift_param(tree, chart, param):
    """Parametrization of the strict transform of a curve in ``chart``."""
    chain = []
    c = chart
    while c.kind != "root":
        chain.append(c)
        c = tree.chart(c.parent)
    xt, yt = (S(p) for p in param)
    for c in reversed(chain):
        a, b = c.center
        if c.kind == "a":
            u = xt - a
            xt, yt = u, (yt - b) / u
        else:
            v = yt - b
            xt, yt = (xt - a) / v, v
    return xt, yt


# formal splitting -------------------------------------------------------------
def varpi_projection(f):
    """Part of ``f`` with negative x-exponent in the splitting at ``x*y = 0``.

    ``f`` must have denominator ``x^a * y^b * d`` with ``d(0, 0) != 0``.
    The kept part is ``sum_{i<0} x^i g_i(y)``, which covers both the
    ``x^-1 K[x^-1]`` terms with y-regular coefficients and the mixed
    ``x^-i y^-j`` terms.
    """
    f = S(f)
    if f.is_zero():
        return ZERO
    d = f.denominator()
    rest = d / (X ** max(0, int(d.ord("x"))) * Y ** max(0, int(d.ord("y"))))
    if rest.subs({"x": ZERO, "y": ZERO}).is_zero():
        raise NotSplittable(f"{f} has poles off x*y = 0 through the origin")
    v = int(f.ord("x"))
    if v >= 0:
        return ZERO
    _, coeffs = f.laurent("x", -v)
    out = ZERO
    for k, c in enumerate(coeffs):
        if c:
            out = out + c * X ** (v + k)
    return out


def is_regular_at_crossing(f):
    """``f`` has no pole along ``x = 0`` or ``y = 0`` and is defined at the origin."""
    f = S(f)
    return f.is_zero() or not f.denominator().subs({"x": ZERO, "y": ZERO}).is_zero()


@dataclass(frozen=True)
class ModelBlock:
    """``L(phi, psi) (x) R``: ``nabla(theta_x) = phi + R_x``, ``nabla(theta_y) = psi + R_y``.

    ``R_x``, ``R_y`` have entries regular at the origin; the regular part
    defaults to the rank-one trivial factor.
    """

    phi: Scalar
    psi: Scalar
    r_x: tuple = ((ZERO,),)
    r_y: tuple = ((ZERO,),)

    def __post_init__(self):
        object.__setattr__(self, "phi", S(self.phi))
        object.__setattr__(self, "psi", S(self.psi))
        r_x, r_y = linalg.matrix(self.r_x), linalg.matrix(self.r_y)
        if len(r_x) != len(r_y) or not linalg.is_square(r_x) or not linalg.is_square(r_y):
            raise ValueError("regular block matrices must be square of equal size")
        for u in (*sum(r_x, ()), *sum(r_y, ())):
            if not is_regular_at_crossing(u):
                raise ValueError(f"regular block entry {u} has a pole at the crossing")
        object.__setattr__(self, "r_x", r_x)
        object.__setattr__(self, "r_y", r_y)

    @property
    def rank(self):
        return len(self.r_x)


@dataclass(frozen=True)
class NiceFormalModel:
    blocks: tuple
    ramification: int = 1
    scramble: tuple = None

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, ModelBlock) else ModelBlock(*b) for b in self.blocks)
        if not blocks:
            raise ValueError("a model needs at least one block")
        for b in blocks:
            if b.phi.theta("y") != b.psi.theta("x"):
                raise IntegrabilityViolation(
                    f"theta_x({b.psi}) != theta_y({b.phi})"
                )
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if is_regular_at_crossing(blocks[i].phi - blocks[j].phi) and is_regular_at_crossing(
                    blocks[i].psi - blocks[j].psi
                ):
                    raise ValueError(f"blocks {i} and {j} have the same exponential part")
        object.__setattr__(self, "blocks", blocks)
        if self.ramification < 1:
            raise ValueError("ramification must be positive")


def assemble_nice_model(model):
    """Block-diagonal connection of the model, gauged by ``model.scramble`` if given."""
    for b in model.blocks:
        if b.phi.theta("y") != b.psi.theta("x"):
            raise IntegrabilityViolation(f"theta_x({b.psi}) != theta_y({b.phi})")
    n = sum(b.rank for b in model.blocks)
    a_x = [[ZERO] * n for _ in range(n)]
    a_y = [[ZERO] * n for _ in range(n)]
    k = 0
    for b in model.blocks:
        for i in range(b.rank):
            for j in range(b.rank):
                a_x[k + i][k + j] = b.r_x[i][j] / X
                a_y[k + i][k + j] = b.r_y[i][j] / Y
            a_x[k + i][k + i] = a_x[k + i][k + i] + b.phi / X
            a_y[k + i][k + i] = a_y[k + i][k + i] + b.psi / Y
        k += b.rank
    conn = PlaneConnection(a_x, a_y)
    if model.scramble is not None:
        g = linalg.matrix(model.scramble)
        if not linalg.det(g):
            raise ValueError("scrambling matrix is singular")
        conn = gauge(conn, g)
    return conn

