import os
import sys

import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from regcrit.scalar import ONE, ZERO, S, Scalar, X, Y  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SX, SY, SC1, SC2 = sympy.symbols("x y c1 c2")
SYMS = {"x": SX, "y": SY, "c1": SC1, "c2": SC2}


def to_sympy(s):
    """Independent reading of a Scalar through its printed form."""
    return sympy.sympify(str(s).replace("^", "**"), locals=SYMS)


def same(s, expr):
    return sympy.simplify(to_sympy(s) - expr) == 0


small_ints = st.integers(min_value=-4, max_value=4)
atoms = st.sampled_from([X, Y, Scalar.var("c1"), Scalar.var("c2")])


@st.composite
def polys(draw, max_terms=3, max_deg=2):
    out = ZERO
    for _ in range(draw(st.integers(1, max_terms))):
        term = S(draw(small_ints))
        for _ in range(draw(st.integers(0, max_deg))):
            term = term * draw(atoms)
        out = out + term
    return out


@st.composite
def scalars(draw):
    num = draw(polys())
    den = draw(polys())
    if den.is_zero():
        den = ONE
    return num / den


@st.composite
def nonzero_scalars(draw):
    s = draw(scalars())
    return s if s else ONE + X


# acceptance summary lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
