"""Differential modules over K((x)), K = Q(c1..c9)(y).

A module is stored through the matrix of ``nabla(theta_x)`` in a chosen
basis, with the column convention ``nabla(e_j) = sum_i M[i][j] e_i``; a
coordinate vector ``v`` is sent to ``theta_x(v) + M v``.  A basis change by
an invertible ``G`` gives ``G^-1 M G + G^-1 theta_x(G)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import (
    CapTooSmall,
    CoefficientNotInA,
    CyclicSearchExhausted,
    IrrationalExponents,
    NondescendableLeadingPoly,
    NotRegular,
    SizeLimit,
)
from .scalar import CONSTANTS, ONE, X, ZERO, S, Scalar, factor, gcd

MAX_RANK = 8
MAX_RAMIFICATION = 64


@dataclass(frozen=True)
class DiffModule:
    """Matrix of ``nabla(theta_x)`` over K((x))."""

    theta_matrix: tuple
    coefficient: str | None = "y"

    def __post_init__(self):
        mat = linalg.matrix(self.theta_matrix)
        if len(mat) == 0:
            raise ValueError("rank-0 modules are not allowed")
        if not linalg.is_square(mat):
            raise ValueError("theta_matrix must be square")
        if len(mat) > MAX_RANK:
            raise SizeLimit(f"rank {len(mat)} exceeds {MAX_RANK}")
        object.__setattr__(self, "theta_matrix", mat)

    @property
    def rank(self):
        return len(self.theta_matrix)

    @classmethod
    def of(cls, rows, coefficient="y"):
        mat = linalg.matrix(rows)
        for row in mat:
            for v in row:
                v.check_size()
        return cls(mat, coefficient)

    def max_pole_order(self):
        return max([0] + [-int(v.ord("x")) for row in self.theta_matrix for v in row if v])

    def __str__(self):
        rows = "; ".join(", ".join(str(v) for v in row) for row in self.theta_matrix)
        return f"DiffModule[{rows}]"


@dataclass(frozen=True)
class Operator:
    """Monic ``theta^mu + a_{mu-1} theta^{mu-1} + ... + a_0``; ``coeffs`` low to high."""

    coeffs: tuple

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __str__(self):
        parts = []
        for k in range(self.order, -1, -1):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            mon = "" if k == 0 else ("theta" if k == 1 else f"theta^{k}")
            if not mon:
                parts.append(f"({c})")
            elif c.is_one():
                parts.append(mon)
            else:
                parts.append(f"({c})*{mon}")
        return " + ".join(parts)


@dataclass(frozen=True)
class SlopeData:
    pairs: tuple  # ((slope: Fraction, multiplicity: int), ...), slopes increasing

    @property
    def max_slope(self):
        return self.pairs[-1][0]

    def multiplicity(self, slope):
        return dict(self.pairs).get(Fraction(slope), 0)

    def total(self):
        return sum(m for _, m in self.pairs)

    def __str__(self):
        return "[" + ", ".join(f"({s}, {m})" for s, m in self.pairs) + "]"


@dataclass(frozen=True)
class KatzCertificate:
    rho: Fraction
    ramification: int
    slopes: SlopeData
    cyclic_vector: tuple
    H0: tuple | None
    leading_poly: Scalar

    @property
    def mu_rho(self):
        return self.slopes.multiplicity(self.rho)


@dataclass(frozen=True, order=True)
class Exponent:
    """Class of ``const + sum coeffs[i] * c_{i+1}``, const reduced into [0, 1)."""

    const: Fraction
    coeffs: tuple = field(default=(Fraction(0),) * len(CONSTANTS))

    @classmethod
    def from_scalar(cls, value):
        if not (value.is_polynomial() and value.free_of("x", "y") and value.total_degree() <= 1):
            raise IrrationalExponents(f"{value} is not a Q-linear combination of 1, c1..c9")
        const = Fraction(0)
        coeffs = [Fraction(0)] * len(CONSTANTS)
        d = int(value.den.leading_coefficient())
        for monom, c in zip(value.num.monoms(), value.num.coeffs()):
            q = Fraction(int(c), d)
            if sum(monom) == 0:
                const += q
            else:
                coeffs[monom.index(1)] += q
        return cls(const % 1, tuple(coeffs))

    def mod_q(self):
        return Exponent(Fraction(0), self.coeffs)

    def is_rational(self):
        return not any(self.coeffs)

    def to_scalar(self):
        out = S(self.const)
        for name, q in zip(CONSTANTS, self.coeffs):
            if q:
                out = out + Scalar.var(name) * q
        return out

    def __str__(self):
        return str(self.to_scalar())


# basic constructions -------------------------------------------------------
def nabla(module, v):
    """``nabla(theta_x)`` applied to a coordinate vector."""
    mv = linalg.matvec(module.theta_matrix, v)
    return tuple(u.theta("x") + w for u, w in zip(v, mv))


def gauge(module, g):
    """Matrix in the basis given by the columns of ``g``."""
    g = linalg.matrix(g)
    ginv = linalg.inverse(g)
    tg = linalg.elementwise(lambda u: u.theta("x"), g)
    new = linalg.add(
        linalg.matmul(ginv, linalg.matmul(module.theta_matrix, g)), linalg.matmul(ginv, tg)
    )
    return DiffModule(new, module.coefficient)


def direct_sum(*modules):
    n = sum(m.rank for m in modules)
    rows = [[ZERO] * n for _ in range(n)]
    off = 0
    for m in modules:
        for i in range(m.rank):
            for j in range(m.rank):
                rows[off + i][off + j] = m.theta_matrix[i][j]
        off += m.rank
    coeff = "y" if any(m.coefficient for m in modules) else None
    return DiffModule(linalg.matrix(rows), coeff)


def companion(op, coefficient="y"):
    """Module of a monic operator in the basis ``(m, theta m, ...)``."""
    mu = op.order
    rows = [[ZERO] * mu for _ in range(mu)]
    for k in range(mu - 1):
        rows[k + 1][k] = ONE
    for i in range(mu):
        rows[i][mu - 1] = -op.coeffs[i]
    return DiffModule(linalg.matrix(rows), coefficient)


def ramify(module, e):
    """Substitute ``x = x'^e``; the matrix of ``nabla(theta_x')`` is ``e * M(x'^e)``."""
    if e < 1:
        raise ValueError("ramification index must be positive")
    if e > MAX_RAMIFICATION:
        raise SizeLimit(f"ramification {e} exceeds {MAX_RAMIFICATION}")
    if e == 1:
        return module
    sub = {"x": X**e}
    return DiffModule(
        linalg.elementwise(lambda u: u.subs(sub) * e, module.theta_matrix), module.coefficient
    )


# cyclic vectors and operators ---------------------------------------------
def _candidates(mu):
    basis = [tuple(ONE if i == j else ZERO for i in range(mu)) for j in range(mu)]
    yield from basis
    for size in range(2, mu + 1):
        for combo in itertools.combinations(range(mu), size):
            yield tuple(ONE if i in combo else ZERO for i in range(mu))
    for k in range(1, mu + 2):
        yield tuple(X ** (k * i) for i in range(mu))


def _iterates(module, m, count):
    out = [tuple(m)]
    for _ in range(count - 1):
        out.append(nabla(module, out[-1]))
    return out


def cyclic_vector(module):
    """First candidate ``m`` whose iterates ``m, nabla m, ...`` form a basis.

    Candidates, in order: the standard basis vectors, sums of distinct basis
    vectors (by size, then lexicographically), then ``(1, x^k, x^2k, ...)``
    for ``k = 1..mu+1``.
    """
    mu = module.rank
    for m in _candidates(mu):
        cols = _iterates(module, m, mu)
        if not linalg.det(linalg.from_columns(cols)).is_zero():
            return m
    raise CyclicSearchExhausted(f"no cyclic vector among the candidates for {module}")


def to_operator(module, m=None):
    """Monic operator annihilating the cyclic vector; returns ``(L, m)``."""
    mu = module.rank
    if m is None:
        m = cyclic_vector(module)
    cols = _iterates(module, m, mu + 1)
    t = linalg.from_columns(cols[:mu])
    a = linalg.solve_vector(t, cols[mu])
    return Operator(tuple(-u for u in a) + (ONE,)), m


def newton_polygon(op):
    """Slopes of the Newton polygon of a monic theta-operator.

    The polygon is the lower boundary of the convex hull of the quadrants
    ``{(u, w): u <= i, w >= ord_x a_i}``; its slopes are >= 0 and their
    horizontal extents add up to the order.
    """
    mu = op.order
    pts = [(i, int(a.ord("x"))) for i, a in enumerate(op.coeffs) if a]
    vmin = min(w for _, w in pts)
    start = max(i for i, w in pts if w == vmin)
    pairs = []
    if start > 0:
        pairs.append((Fraction(0), start))
    cur = start
    while cur < mu:
        wcur = dict(pts)[cur]
        best = None
        for i, w in pts:
            if i <= cur:
                continue
            s = Fraction(w - wcur, i - cur)
            if best is None or s < best[0] or (s == best[0] and i > best[1]):
                best = (s, i)
        s, nxt = best
        if pairs and pairs[-1][0] == s:
            pairs[-1] = (s, pairs[-1][1] + nxt - cur)
        else:
            pairs.append((s, nxt - cur))
        cur = nxt
    return SlopeData(tuple(pairs))


def slope_data(module):
    return newton_polygon(to_operator(module)[0])


# Katz rank and the leading divisor -----------------------------------------
def katz_rank(module):
    """Poincare-Katz rank with the leading matrix ``H(0)`` and ``phi(x)``.

    For ``rho = p/e > 0`` the module is ramified by ``e`` and written in the
    basis ``(m, x'^p nabla m, ..., x'^((mu-1)p) nabla^(mu-1) m)``; there the
    matrix of ``nabla(theta_x)`` is ``x'^-p H`` with H regular.  The nonzero
    eigenvalues of ``H(0)``, with algebraic multiplicity, are the leading
    coefficients of the exponential factors, and ``phi`` is their
    characteristic polynomial evaluated at ``x^rho``.
    """
    op, m = to_operator(module)
    slopes = newton_polygon(op)
    rho = slopes.max_slope
    if rho == 0:
        return KatzCertificate(rho, 1, slopes, m, None, ONE)
    e, p = rho.denominator, rho.numerator
    mu = module.rank
    ram = ramify(module, e)
    m_e = cyclic_vector(ram)
    op_e, _ = to_operator(ram, m_e)
    comp = companion(op_e, module.coefficient).theta_matrix
    # basis f_k = x'^(k p) nabla^k m: matrix D^-1 C D + D^-1 theta(D)
    mat = [[ZERO] * mu for _ in range(mu)]
    for i in range(mu):
        for j in range(mu):
            if comp[i][j]:
                mat[i][j] = comp[i][j] * X ** ((j - i) * p)
        mat[i][i] = mat[i][i] + i * p
    # theta_{x'} = e * theta_x
    h = [[u * X**p / e for u in row] for row in mat]
    for row in h:
        for u in row:
            if u.ord("x") < 0:
                raise ArithmeticError(f"leading matrix is not regular: {u}")
    h0 = linalg.matrix([[u.at_zero("x") for u in row] for row in h])
    cp = linalg.charpoly(h0)
    low = next(k for k, c in enumerate(cp) if c)
    g = cp[low:]
    if len(g) - 1 != slopes.multiplicity(rho):
        raise ArithmeticError(
            f"H(0) has {len(g) - 1} nonzero eigenvalues, expected {slopes.multiplicity(rho)}"
        )
    phi = ZERO
    for k, c in enumerate(g):
        if not c:
            continue
        if (k * p) % e:
            raise NondescendableLeadingPoly(f"term X^{k} of {g} is not a power of x")
        phi = phi + c * X ** (k * p // e)
    return KatzCertificate(rho, e, slopes, m_e, h0, phi)


@dataclass(frozen=True)
class LeadingDivisor:
    phi: Scalar
    rho: Fraction
    mu_rho: int
    localization: tuple

    @property
    def degree(self):
        return self.mu_rho * self.rho

    def is_zero(self):
        return self.rho == 0


def default_localization(module):
    """x-contents of the entry denominators: the y-points removed from the base."""
    out = []
    for row in module.theta_matrix:
        for u in row:
            if not u:
                continue
            _, dc = u.coefficients("x")
            content = None
            for c in dc.values():
                content = c if content is None else gcd(content, c)
            if content is not None and not content.free_of("y"):
                out.append(content)
    return tuple(sorted(set(out), key=str))


def _is_unit_in_a(d, localization):
    """Whether the polynomial ``d`` in (c, y) becomes a unit once ``localization`` is inverted."""
    while d.depends_on("y"):
        for f in localization:
            g = gcd(d, f)
            if g.depends_on("y"):
                d = d / g
                break
        else:
            # the c-only content is a unit already
            return False
    return True


def leading_divisor(module, localization=None):
    """``phi(x)`` with coefficients checked to lie in ``A = Q(c)[y][1/localization]``."""
    cert = katz_rank(module)
    loc = default_localization(module) if localization is None else tuple(S(f) for f in localization)
    if cert.rho == 0:
        return LeadingDivisor(ONE, Fraction(0), cert.slopes.multiplicity(0), loc)
    num, _ = cert.leading_poly.coefficients("x")
    d = cert.leading_poly.denominator()
    if not _is_unit_in_a(_y_part(d), loc):
        raise CoefficientNotInA(
            f"leading polynomial {cert.leading_poly} has denominator {d} outside A", denominator=d
        )
    deg = max(num)
    if deg != cert.mu_rho * cert.rho:
        raise ArithmeticError(f"deg phi = {deg}, expected {cert.mu_rho * cert.rho}")
    return LeadingDivisor(cert.leading_poly, cert.rho, cert.mu_rho, loc)


def _y_part(d):
    """Drop the factors of ``d`` that only involve the constants."""
    _, facs = factor(d)
    out = ONE
    for f, k in facs:
        if f.depends_on("y"):
            out = out * f**k
    return out


def is_regular(module):
    return katz_rank(module).rho == 0


# lattice saturation -------------------------------------------------------
# The standard lattice L0 lies in every L_k, so lattices are handled modulo
# L0: vector entries are polar Laurent polynomials stored as {exponent: K}.
def _series(a, upto):
    """Laurent coefficients of ``a`` with exponents < ``upto``."""
    if not a:
        return {}
    w = int(a.ord("x"))
    if w >= upto:
        return {}
    v, cs = a.laurent("x", upto - w)
    return {v + k: c for k, c in enumerate(cs) if c}


def _mul(a, b, below=0):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            if k < below:
                out[k] = out[k] + ca * cb if k in out else ca * cb
    return {k: c for k, c in out.items() if c}


def _sub(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out[k] - c if k in out else -c
    return {k: c for k, c in out.items() if c}


def _polar(a):
    return {k: c for k, c in a.items() if k < 0}


def _to_scalar(a):
    out = ZERO
    for k, c in a.items():
        out = out + c * X**k
    return out


class _Expansion:
    """Laurent expansion of the module matrix, extended on demand."""

    def __init__(self, mat):
        self.mat = mat
        self.depth = None
        self.terms = None

    def upto(self, depth):
        if self.depth is None or depth > self.depth:
            self.depth = max(depth, 2 * (self.depth or 1))
            self.terms = [[_series(u, self.depth) for u in row] for row in self.mat]
        return self.terms


def _nabla_polar(exp, vec):
    low = min([k for e in vec for k in e] + [0])
    m = exp.upto(-low + 1)
    out = []
    for i in range(len(vec)):
        acc = {k: k * c for k, c in vec[i].items() if k < 0 and k}
        for j, e in enumerate(vec):
            if e and m[i][j]:
                acc = _sub(acc, {k: -c for k, c in _mul(m[i][j], e).items()})
        out.append(acc)
    return out


def _inverse_series(u, count):
    inv = [u[0].inverse()]
    for n in range(1, count):
        acc = ZERO
        for k in range(1, n + 1):
            if k in u:
                acc = acc + u[k] * inv[n - k]
        inv.append(-acc * inv[0])
    return {k: c for k, c in enumerate(inv) if c}


def _hermite(gens, mu):
    """Reduced lower-triangular basis of ``L0 + span(gens)``, diagonal x^v_r."""
    work = [[_polar(e) for e in g] for g in gens]
    work = [g for g in work if any(g)]
    basis = []
    exps = []
    for r in range(mu):
        cand = [(min(g[r]), sum(len(e) for e in g), idx) for idx, g in enumerate(work) if g[r]]
        if not cand:
            basis.append([{0: ONE} if i == r else {} for i in range(mu)])
            exps.append(0)
            continue
        v, _, idx = min(cand)
        piv = work.pop(idx)
        low = min(k for e in piv for k in e)
        u = {k - v: c for k, c in piv[r].items()}
        uinv = _inverse_series(u, -low + 1)
        piv = [_mul(uinv, e) for e in piv]
        piv[r] = {v: ONE}
        nxt = []
        for g in work:
            if g[r]:
                q = {k - v: c for k, c in g[r].items()}
                g = [_sub(e, _mul(q, p)) for e, p in zip(g, piv)]
                g[r] = {}
            if any(g):
                nxt.append(g)
        work = nxt
        basis.append(piv)
        exps.append(v)
    for r in range(mu):
        col = basis[r]
        for i in range(r + 1, mu):
            t = {k: c for k, c in col[i].items() if k >= exps[i]}
            if t and exps[i] < 0:
                q = {k - exps[i]: c for k, c in t.items()}
                col = [_sub(e, _mul(q, p)) if j != r else e for j, (e, p) in enumerate(zip(col, basis[i]))]
        basis[r] = col
    return basis, exps


def _saturate(module, cap):
    mu = module.rank
    exp = _Expansion(module.theta_matrix)
    basis = [[{0: ONE} if i == j else {} for i in range(mu)] for j in range(mu)]
    index = 0
    for step in range(cap + 1):
        gens = basis + [_nabla_polar(exp, b) for b in basis]
        new_basis, exps = _hermite(gens, mu)
        new_index = sum(exps)
        if new_index == index:
            return True, step, [tuple(_to_scalar(e) for e in b) for b in basis]
        basis, index = new_basis, new_index
    return False, cap, [tuple(_to_scalar(e) for e in b) for b in basis]


def default_cap(module):
    mu = module.rank
    return mu * (module.max_pole_order() + 1) + mu


def saturation_oracle(module, cap=None):
    """Whether ``L_{k+1} = L_k + nabla(theta) L_k`` stabilises within ``cap`` steps."""
    mu, q = module.rank, module.max_pole_order()
    if cap is None:
        cap = default_cap(module)
    if cap < mu * (1 + q):
        raise CapTooSmall(f"cap {cap} < {mu * (1 + q)}")
    return _saturate(module, cap)[0]


# exponents ------------------------------------------------------------------
def residue_matrix(module, cap=None):
    """Residue at x = 0 of the module written on its saturated lattice."""
    if not is_regular(module):
        raise NotRegular(f"{module} is irregular")
    ok, _, basis = _saturate(module, default_cap(module) if cap is None else cap)
    if not ok:
        raise ArithmeticError("saturation did not stabilise for a regular module")
    g = linalg.from_columns(basis)
    log = gauge(module, g).theta_matrix
    return linalg.matrix([[u.at_zero("x") for u in row] for row in log])


def eigenvalue_factors(mat):
    """Roots of ``charpoly(mat)`` as ``[(root, multiplicity)]``; only linear factors allowed."""
    cp = linalg.charpoly(mat)
    poly = ZERO
    for k, c in enumerate(cp):
        poly = poly + c * X**k
    _, facs = factor(poly.numerator())
    roots = []
    for f, k in facs:
        deg = f.degree("x")[0]
        if deg == 0:
            continue
        if deg > 1:
            raise IrrationalExponents(f"characteristic polynomial has the factor {f}")
        nc, _ = f.coefficients("x")
        roots.append((-nc.get(0, ZERO) / nc[1], k))
    return roots


def residue_exponents(module, cap=None):
    """Exponents mod Z as a sorted tuple of :class:`Exponent` (with multiplicity)."""
    out = []
    for root, k in eigenvalue_factors(residue_matrix(module, cap)):
        out.extend([Exponent.from_scalar(root)] * k)
    return tuple(sorted(out))

