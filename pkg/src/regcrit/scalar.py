"""Exact arithmetic in the tower Q(c1..c9)(y)(x).

A :class:`Scalar` is a reduced quotient of two integer polynomials in the
fixed variable order ``c1..c9, y, x``.  Canonical form: the numerator and
denominator are coprime over Z (content included) and the leading
coefficient of the denominator, in lex order, is a positive integer.  With
that normalisation equality is structural.

The grammar shared with the CLI is::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | IDENT | '(' expr ')'

with identifiers ``x``, ``y``, ``c1``..``c9``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import flint
from flint.utils.flint_exceptions import DomainError

from .errors import DivisionByZero, ParseError, SizeLimit

CONSTANTS = tuple(f"c{i}" for i in range(1, 10))
VARIABLES = CONSTANTS + ("y", "x")
_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_NGENS = len(VARIABLES)
_CTX = flint.fmpz_mpoly_ctx.get(VARIABLES, "lex")
_ZERO_EXP = (0,) * _NGENS

MAX_DEGREE = 64

INF = math.inf


def _const(n):
    return _CTX.from_dict({_ZERO_EXP: int(n)}) if n else _CTX.from_dict({})


_P0 = _const(0)
_P1 = _const(1)


def _min_exponent(p, idx):
    return int(min(m[idx] for m in p.monoms()))


class Scalar:
    """Immutable element of Q(c1..c9, y, x) in canonical form."""

    __slots__ = ("_num", "_den", "_hash")

    def __init__(self, num, den=None, _reduced=False):
        if isinstance(num, int):
            num = _const(num)
        if den is None:
            den = _P1
        elif isinstance(den, int):
            den = _const(den)
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if not _reduced:
            if num.is_zero():
                den = _P1
            elif not den.is_one():
                g = num.gcd(den)
                if not g.is_one():
                    num = num / g
                    den = den / g
            if den.leading_coefficient() < 0:
                num, den = -num, -den
        self._num = num
        self._den = den
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def var(cls, name):
        return cls(_CTX.gens()[_INDEX[name]])

    @classmethod
    def from_fraction(cls, q):
        q = Fraction(q)
        return cls(_const(q.numerator), _const(q.denominator))

    @classmethod
    def from_poly(cls, p):
        return cls(p)

    # accessors ---------------------------------------------------------
    @property
    def num(self):
        return self._num

    @property
    def den(self):
        return self._den

    def numerator(self):
        return Scalar(self._num, _P1, _reduced=True)

    def denominator(self):
        return Scalar(self._den, _P1, _reduced=True)

    def is_zero(self):
        return self._num.is_zero()

    def is_one(self):
        return self._num.is_one() and self._den.is_one()

    def is_polynomial(self):
        return self._den.is_constant()

    def depends_on(self, name):
        idx = _INDEX[name]
        return any(m[idx] for m in self._num.monoms()) or any(
            m[idx] for m in self._den.monoms()
        )

    def free_of(self, *names):
        return not any(self.depends_on(n) for n in names)

    def is_rational(self):
        return self._num.is_constant() and self._den.is_constant()

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational constant")
        n = int(self._num.leading_coefficient()) if not self.is_zero() else 0
        return Fraction(n, int(self._den.leading_coefficient()))

    def degree(self, name):
        """Degree in ``name`` of numerator and denominator."""
        idx = _INDEX[name]
        dn = int(max((m[idx] for m in self._num.monoms()), default=0))
        dd = int(max((m[idx] for m in self._den.monoms()), default=0))
        return dn, dd

    def total_degree(self):
        return max(int(self._num.total_degree()), int(self._den.total_degree()), 0)

    def check_size(self, limit=MAX_DEGREE):
        if self.total_degree() > limit:
            raise SizeLimit(f"total degree {self.total_degree()} exceeds {limit}")
        return self

    # arithmetic --------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, Scalar):
            return other
        if isinstance(other, int):
            return Scalar(_const(other), _P1, _reduced=True)
        if isinstance(other, Fraction):
            return Scalar.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self._den == other._den:
            return Scalar(self._num + other._num, self._den)
        return Scalar(self._num * other._den + other._num * self._den, self._den * other._den)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self._num, self._den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ZERO
        if self._den.is_one() and other._den.is_one():
            return Scalar(self._num * other._num, _P1, _reduced=True)
        # cross-cancel keeps intermediate sizes down
        g1 = self._num.gcd(other._den)
        g2 = other._num.gcd(self._den)
        n = (self._num / g1) * (other._num / g2)
        d = (self._den / g2) * (other._den / g1)
        if d.leading_coefficient() < 0:
            n, d = -n, -d
        return Scalar(n, d, _reduced=True)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        n, d = self._den, self._num
        if d.leading_coefficient() < 0:
            n, d = -n, -d
        return Scalar(n, d, _reduced=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise DivisionByZero(f"division of {self} by zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return Scalar(self._num**k, self._den**k, _reduced=True)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._num == other._num and self._den == other._den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((str(self._num), str(self._den)))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    # printing ------------------------------------------------------------
    def __str__(self):
        n = str(self._num)
        if self._den.is_one():
            return n
        d = str(self._den)
        if len(self._num.monoms()) > 1:
            n = f"({n})"
        if not re.fullmatch(r"[A-Za-z0-9_^]+", d):
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    # calculus and valuations ---------------------------------------------
    def derivative(self, name):
        n, d = self._num, self._den
        dn = n.derivative(name)
        if d.is_constant():
            return Scalar(dn, d)
        dd = d.derivative(name)
        return Scalar(dn * d - n * dd, d * d)

    def theta(self, name):
        """The Euler derivation v*d/dv in the variable ``name``."""
        return self.derivative(name) * Scalar.var(name)

    def ord(self, name):
        """Exact valuation at ``name = 0``; ``math.inf`` for zero."""
        if self.is_zero():
            return INF
        idx = _INDEX[name]
        return _min_exponent(self._num, idx) - _min_exponent(self._den, idx)

    def at_zero(self, name):
        """Value at ``name = 0``; the result must be finite."""
        d = self._den.subs({name: 0})
        if d.is_zero():
            raise DivisionByZero(f"{self} has a pole at {name} = 0")
        return Scalar(self._num.subs({name: 0}), d)

    def coefficients(self, name):
        """Numerator and denominator as dicts ``{power: Scalar}`` in ``name``."""
        return _poly_coefficients(self._num, name), _poly_coefficients(self._den, name)

    def laurent(self, name, count):
        """First ``count`` Laurent coefficients at ``name = 0``.

        Returns ``(v, [a_v, a_{v+1}, ...])`` with ``self = sum a_k name^k``;
        coefficients are free of ``name``.
        """
        if self.is_zero():
            return 0, [ZERO] * count
        nc, dc = self.coefficients(name)
        a, b = min(nc), min(dc)
        d0 = dc[b]
        inv0 = d0.inverse()
        out = []
        for k in range(count):
            s = nc.get(a + k, ZERO)
            for j in range(1, k + 1):
                dj = dc.get(b + j)
                if dj is not None:
                    s = s - dj * out[k - j]
            out.append(s * inv0)
        return a - b, out

    def leading_coefficient(self, name):
        """Coefficient of name^ord in the Laurent expansion at name = 0."""
        return self.laurent(name, 1)[1][0]

    def subs(self, mapping):
        """Simultaneous substitution ``{name: Scalar}``."""
        if not mapping:
            return self
        mapping = {k: Scalar._coerce(v) for k, v in mapping.items()}
        if all(v.is_polynomial() and v._den.is_one() for v in mapping.values()):
            polys = [mapping[n]._num if n in mapping else g for n, g in zip(VARIABLES, _CTX.gens())]
            return Scalar(self._num.compose(*polys), self._den.compose(*polys))
        degs = {}
        for name in mapping:
            dn, dd = self.degree(name)
            degs[name] = max(dn, dd)
        return Scalar(_hom_subs(self._num, mapping, degs), _hom_subs(self._den, mapping, degs))


def _hom_subs(p, mapping, degs):
    """Substitute rational values and multiply by prod den_i^deg_i."""
    idx = {name: _INDEX[name] for name in mapping}
    powers = {}

    def pw(poly, k, key):
        if (key, k) not in powers:
            powers[(key, k)] = poly**k
        return powers[(key, k)]

    out = _P0
    for monom, coeff in zip(p.monoms(), p.coeffs()):
        rest = list(monom)
        term = _P1
        for name, i in idx.items():
            e = monom[i]
            rest[i] = 0
            v = mapping[name]
            term = term * pw(v._num, e, (name, "n")) * pw(v._den, degs[name] - e, (name, "d"))
        out = out + term * _CTX.from_dict({tuple(rest): int(coeff)})
    return out


def _poly_coefficients(p, name):
    idx = _INDEX[name]
    groups = {}
    for monom, coeff in zip(p.monoms(), p.coeffs()):
        k = int(monom[idx])
        m = [int(e) for e in monom]
        m[idx] = 0
        groups.setdefault(k, {})[tuple(m)] = int(coeff)
    return {k: Scalar(_CTX.from_dict(v), _P1, _reduced=True) for k, v in groups.items()}


ZERO = Scalar(_P0, _P1, _reduced=True)
ONE = Scalar(_P1, _P1, _reduced=True)


def S(value):
    """Coerce an int, Fraction, str or Scalar to a Scalar."""
    if isinstance(value, Scalar):
        return value
    if isinstance(value, str):
        return parse(value)
    out = Scalar._coerce(value)
    if out is NotImplemented:
        raise TypeError(f"cannot make a Scalar from {value!r}")
    return out


X = Scalar.var("x")
Y = Scalar.var("y")


def arith(a, b, op):
    """Field operation by symbol: one of ``+ - * /``."""
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def theta(f, name):
    return f.theta(name)


def ord_(f, name):
    return f.ord(name)


# polynomial helpers -------------------------------------------------------
def gcd(a, b):
    """Gcd of two polynomial Scalars (primitive, positive leading coefficient)."""
    g = a.num.gcd(b.num)
    return Scalar(g)


def exact_quotient(a, b):
    q = a / b
    if not q.is_polynomial():
        raise ValueError(f"{b} does not divide {a}")
    return q


def factor(p):
    """Irreducible factors of a polynomial Scalar over Q: ``(unit, [(f, k), ...])``.

    Factors are primitive with positive leading coefficient and sorted by
    their printed form, so the output is deterministic.
    """
    if not p.is_polynomial():
        raise ValueError(f"{p} is not a polynomial")
    unit, facs = p.num.factor()
    out = []
    for f, k in facs:
        s = Scalar(f)
        if f.leading_coefficient() < 0:
            s = -s
            unit = unit * (-1) ** int(k)
        out.append((s, int(k)))
    out.sort(key=lambda fk: (str(fk[0]), fk[1]))
    return Fraction(int(unit)) / int(p.den.leading_coefficient()), out


def valuation_at(f, place):
    """Order of ``f`` along the irreducible polynomial ``place``."""
    if f.is_zero():
        return INF
    q = place.num
    v = 0
    for poly, sign in ((f.num, 1), (f.den, -1)):
        while not poly.is_constant():
            try:
                poly = poly / q
            except DomainError:
                break
            v += sign
    return v


# parser -------------------------------------------------------------------
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            if m.group(3) not in "+-*/^()":
                raise ParseError(f"unexpected character {m.group(3)!r}", text, m.start(3))
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, aliases):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.aliases = aliases

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg + (f" near {tok[1]!r}" if tok[1] else ""), self.text, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] != "op":
            self.fail(f"expected {value!r}", tok)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op_tok = self.take()
            rhs = self.unary()
            if op_tok[1] == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, op_tok[2])
                value = value / rhs
        return value

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] == "int":
                k = int(tok[1])
            elif tok[:2] == ("op", "("):
                neg = 1
                if self.peek()[:2] == ("op", "-"):
                    self.take()
                    neg = -1
                t2 = self.take()
                if t2[0] != "int":
                    self.fail("exponent must be an integer", t2)
                self.expect(")")
                k = neg * int(t2[1])
            else:
                self.fail("exponent must be an integer", tok)
            k *= sign
            if k > MAX_DEGREE:
                raise SizeLimit(f"exponent {k} exceeds {MAX_DEGREE}")
            if k < 0 and base.is_zero():
                raise ParseError("division by zero", self.text, tok[2])
            return base**k
        return base

    def atom(self):
        tok = self.take()
        kind, value, _ = tok
        if kind == "int":
            return Scalar(_const(int(value)), _P1, _reduced=True)
        if kind == "ident":
            name = self.aliases.get(value, value)
            if name not in _INDEX:
                self.fail(f"unknown identifier {value!r}", tok)
            return Scalar.var(name)
        if tok[:2] == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail("expected a number, identifier or '('", tok)


def parse(text, aliases=None):
    """Parse a Scalar from the shared expression grammar."""
    value = _Parser(text, aliases or {}).parse()
    return value.check_size()
