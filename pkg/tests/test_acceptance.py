"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly::

    python3 tests/test_acceptance.py
"""

import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import corpus  # noqa: E402
from conftest import ACCEPTANCE_LINES  # noqa: E402
from regcrit import linalg  # noqa: E402
from regcrit.connection import ModelBlock, NiceFormalModel, assemble_nice_model, pullback_curve  # noqa: E402
from regcrit.criterion import (  # noqa: E402
    ExponentLedger,
    lemma5_bounds,
    local_component_reports,
    positivity_lemma,
    qspan_check,
    verify_theorem,
)
from regcrit.diffmod import (  # noqa: E402
    DiffModule,
    Exponent,
    gauge,
    is_regular,
    katz_rank,
    saturation_oracle,
    slope_data,
)
from regcrit.errors import PrerequisiteFailed  # noqa: E402
from regcrit.fixtures import load_fixture  # noqa: E402
from regcrit.resolution import CurveGerm, embedded_resolution, intersection_matrix  # noqa: E402
from regcrit.scalar import ONE, Scalar, X, Y, parse  # noqa: E402

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
VERIFY = os.path.join(ROOT, "fixtures", "verify")
C1, C2, C3 = (Scalar.var(f"c{i}") for i in (1, 2, 3))

MONOMIAL_FIXTURES = sorted(f for f in os.listdir(VERIFY) if f.startswith("monomial_"))


@contextmanager
def criterion(number, title, budget=None):
    """Record one summary line; fail on exceptions and on a blown time budget."""
    info = {"detail": ""}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        in_time = budget is None or elapsed < budget
        limit = "" if budget is None else f" / {budget}s"
        status = "PASS" if ok and in_time else "FAIL"
        line = f"criterion {number}: {status}  {title}  [{elapsed:.2f}s{limit}]"
        if info["detail"]:
            line += f"  {info['detail']}"
        ACCEPTANCE_LINES.append(line)
    assert in_time, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"


def test_criterion_01_rank_one_exactness():
    with criterion(1, "rank-1 Katz rank and leading polynomial", budget=5) as info:
        rng = random.Random(1)
        for k in range(50):
            r = k % 6
            f, lead = corpus.rank_one(rng, r)
            cert = katz_rank(DiffModule(((f,),)))
            assert cert.rho == r, (f, cert.rho)
            # r = 0 is the regular case: leading polynomial 1
            assert cert.leading_poly == (X**r - lead if r else ONE), (f, cert.leading_poly)
        info["detail"] = "50 modules, r = 0..5"


def test_criterion_02_newton_vs_saturation():
    with criterion(2, "is_regular agrees with saturation_oracle", budget=60) as info:
        rng = random.Random(2)
        regular = 0
        ranks = {}
        for _ in range(120):
            m = corpus.oracle_module(rng)
            a = is_regular(m)
            assert a == saturation_oracle(m), str(m)
            regular += a
            ranks[m.rank] = ranks.get(m.rank, 0) + 1
        info["detail"] = f"120 modules, {regular} regular, ranks {dict(sorted(ranks.items()))}"


def test_criterion_03_gauge_invariance():
    with criterion(3, "SlopeData and rho are gauge invariant") as info:
        rng = random.Random(3)
        for _ in range(50):
            m = corpus.random_module(rng, max_rank=3)
            g = gauge(m, corpus.random_gauge(rng, m.rank))
            assert slope_data(g) == slope_data(m), str(m)
            assert katz_rank(g).rho == katz_rank(m).rho
        info["detail"] = "50 pairs"


def test_criterion_04_cusp_golden():
    with criterion(4, "cusp resolution golden values", budget=1):
        tree = embedded_resolution([CurveGerm("C", parse("y^2 - x^3"))])
        assert len(tree.events) == 3
        assert tuple(c.self_intersection for c in tree.components) == (-3, -2, -1)
        a = intersection_matrix(tree)
        assert a == ((-3, 0, 1), (0, -2, 1), (1, 1, -1))
        assert linalg.is_negative_definite(a)


def definiteness_corpus():
    rng = random.Random(5)
    eqs = list(corpus.BASIC_GERMS.values()) + corpus.random_products(rng, 20)
    out = []
    for i, eq in enumerate(eqs):
        germs = [CurveGerm(f"G{i}", parse(eq))]
        out.append((eq, intersection_matrix(embedded_resolution(germs))))
    return out


def test_criterion_05_definiteness_corpus():
    with criterion(5, "intersection matrices are negative definite", budget=30) as info:
        mats = definiteness_corpus()
        for eq, a in mats:
            assert linalg.is_negative_definite(a), eq
        info["detail"] = f"{len(mats)} configurations, sizes {min(len(a) for _, a in mats)}..{max(len(a) for _, a in mats)}"


def test_criterion_06_end_to_end():
    with criterion(6, "cusp and monomial curves certified regular", budget=30) as info:
        names = ["cusp_c1_c2.fix"] + MONOMIAL_FIXTURES
        for name in names:
            fx = load_fixture(os.path.join(VERIFY, name))
            cert = verify_theorem(fx.connection, fx.germs, fx.curve, fx.declared_regular)
            p, q = (int(fx.curve[0].degree("x")[0]), int(fx.curve[1].degree("x")[0]))
            assert cert.verdict == "regular", name
            assert all(r == 0 for r in cert.rho), name
            assert cert.pullback_rho == 0 and cert.pullback_slopes == ((0, 1),), name
            assert cert.exponents.pullback == (Exponent.from_scalar(p * C1 + q * C2),), name
        assert len(MONOMIAL_FIXTURES) == 10
        info["detail"] = f"{len(names)} fixtures"


def test_criterion_07_negative_control():
    with criterion(7, "irregular along Z is refused; pullback along (t, 1) has rho = 1"):
        fx = load_fixture(os.path.join(VERIFY, "negative_control.fix"))
        with pytest.raises(PrerequisiteFailed):
            verify_theorem(fx.connection, fx.germs, fx.curve, fx.declared_regular)
        pulled = pullback_curve(fx.connection, (X, ONE))
        assert katz_rank(pulled).rho == 1
        assert not is_regular(pulled)


def test_criterion_08_crossing_bound():
    with criterion(8, "1/(x*y) model attains the crossing bound") as info:
        f = 1 / (X * Y)
        conn = assemble_nice_model(NiceFormalModel((ModelBlock(f.theta("x"), f.theta("y")),)))
        reports = {r.label: r for r in local_component_reports(conn, {"Ex": X, "Ey": Y})}
        ex = reports["Ex"]
        (rec,) = ex.crossings
        ranks = {label: r.rho for label, r in reports.items()}
        assert rec.multiplicity == 1 == ex.mu_rho * ranks["Ey"]
        assert lemma5_bounds(ex, ranks).ok
        broken = lemma5_bounds(ex, {"Ey": 0})
        assert [e.other for e in broken.failures()] == ["Ey"]
        info["detail"] = "multiplicity 1 = 1 * 1"


def test_criterion_09_positivity_brute_force():
    import itertools

    with criterion(9, "positivity lemma holds exhaustively on v in {0..3}^n", budget=10) as info:
        mats = {a for _, a in definiteness_corpus() if len(a) <= 4}
        for name in ["cusp_c1_c2.fix"] + MONOMIAL_FIXTURES:
            fx = load_fixture(os.path.join(VERIFY, name))
            tree = embedded_resolution(list(fx.germs) + [CurveGerm("C", _curve_eq(fx))])
            a = intersection_matrix(tree)
            if 0 < len(a) <= 4:
                mats.add(a)
        checked = 0
        for a in sorted(mats):
            assert linalg.is_negative_definite(a)
            for v in itertools.product(range(4), repeat=len(a)):
                av = linalg.int_matvec(a, v)
                if all(t >= 0 for t in av):
                    assert not any(v), (a, v)
                assert positivity_lemma(a, v)
                checked += 1
        info["detail"] = f"{len(mats)} matrices, {checked} vectors"


def _curve_eq(fx):
    from regcrit.resolution import implicitize

    return implicitize(fx.curve)


def test_criterion_10_qspan():
    with criterion(10, "pullback exponents lie in span(c1, c2) mod Q; c3 ledger rejected") as info:
        for name in ["cusp_c1_c2.fix"] + MONOMIAL_FIXTURES:
            fx = load_fixture(os.path.join(VERIFY, name))
            cert = verify_theorem(fx.connection, fx.germs, fx.curve, fx.declared_regular)
            assert cert.qspan is True, name
            assert qspan_check(cert.exponents)
        z = (("Z1", (Exponent.from_scalar(C1),)), ("Z2", (Exponent.from_scalar(C2),)))
        assert not qspan_check(ExponentLedger(z, (Exponent.from_scalar(C3),)))
        assert not qspan_check(ExponentLedger(z, (Exponent.from_scalar(C1 + C3 / 2 + Fraction(1, 2)),)))
        info["detail"] = "11 fixtures + broken ledger"


def test_criterion_11_determinism():
    with criterion(11, "two verify runs over the corpus are byte-identical") as info:
        runs = []
        for flag in ([], ["--json"]):
            for _ in range(2):
                res = subprocess.run(
                    [sys.executable, "-m", "regcrit", "verify", *flag, "--corpus", VERIFY],
                    capture_output=True,
                    cwd=ROOT,
                )
                runs.append(res.stdout)
        assert runs[0] == runs[1] and runs[2] == runs[3]
        assert runs[0] and runs[2]
        count = runs[0].count(b"== ")
        info["detail"] = f"{count} fixtures, text and JSON"


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except Exception:  # noqa: BLE001 - the line is already recorded
                failed += 1
    for line in ACCEPTANCE_LINES:
        print(line)
    sys.exit(1 if failed else 0)
