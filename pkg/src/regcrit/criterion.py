"""Regularity certificates for pullbacks of flat connections to curves.

Two independent routes are run for every input.  The inequality route
resolves the divisor, computes the Katz rank of the connection along every
exceptional curve, bounds the behaviour of the leading divisors at the
crossings and feeds the resulting inequalities to the negative definite
intersection matrix.  The direct route pulls the connection back to the
curve and computes its slopes.  A certificate says "regular" only when both
routes agree.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .connection import (
    pull_through_chart,
    pullback_curve,
    restrict_to_component,
    substitute,
    translate,
)
from .diffmod import Exponent, katz_rank, leading_divisor, residue_exponents
from .errors import (
    ComponentNotInChart,
    IrrationalExponents,
    NotNegativeDefinite,
    PrerequisiteFailed,
    RoutesDisagree,
)
from .resolution import CurveGerm, embedded_resolution, implicitize, intersection_matrix
from .scalar import CONSTANTS, ZERO, S, X, Y, factor, valuation_at

EXCEPTIONAL = "exceptional"
REGULAR_LOCUS = "regular-locus"
TEST_CURVE = "test-curve"
POLAR = "polar"


def _is_exceptional(label):
    return label.startswith("E") and label[1:].isdigit()


def _frac(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# component reports ------------------------------------------------------------
@dataclass(frozen=True)
class CrossingRecord:
    other: str
    kind: str
    chart: str
    place: str
    multiplicity: int


@dataclass(frozen=True)
class ComponentReport:
    label: str
    rho: Fraction
    mu_rho: int
    phi: object
    chart: str
    crossings: tuple = ()

    @property
    def degree(self):
        return self.mu_rho * self.rho


def infinity_multiplicity(module, place, rho=None):
    """Intersection multiplicity of the closure of ``D`` with the section at infinity.

    ``place`` is an irreducible polynomial in ``y`` cutting the crossing on the
    component.  With ``phi(x) = prod (x^rho - phi_j)^mu_j`` the multiplicity is
    ``max(0, -sum_j mu_j ord(phi_j))``, read off the constant term of ``phi``.
    """
    if rho is None:
        rho = katz_rank(module).rho
    if rho == 0:
        return 0
    phi = leading_divisor(module).phi
    const = phi.subs({"x": ZERO})
    return max(0, -int(valuation_at(const, place)))


def _kind(label, roles):
    if _is_exceptional(label):
        return EXCEPTIONAL
    return roles.get(label, POLAR)


def _local_report(label, generic, chart_name, crossings, roles):
    """``crossings`` lists ``(other, chart, module, place)``."""
    cert = katz_rank(generic)
    rho = cert.rho
    phi = leading_divisor(generic).phi if rho else cert.leading_poly
    records = []
    for other, chart, module, place in crossings:
        local_rho = katz_rank(module).rho
        if local_rho != rho:
            raise ArithmeticError(f"Katz rank of {label} is {rho} generically but {local_rho} in {chart}")
        mult = infinity_multiplicity(module, place, rho)
        records.append(CrossingRecord(other, _kind(other, roles), chart, str(place), mult))
    records.sort(key=lambda r: (r.other, r.chart, r.place))
    return ComponentReport(label, rho, cert.slopes.multiplicity(rho), phi, chart_name, tuple(records))


class _ChartCache:
    def __init__(self, conn, tree):
        self.conn = conn
        self.tree = tree
        self._pulled = {}

    def __call__(self, name):
        if name not in self._pulled:
            self._pulled[name] = pull_through_chart(self.conn, self.tree.chart(name))
        return self._pulled[name]


def component_report(conn, tree, label, roles=None, _cache=None):
    """Katz data of ``conn`` along ``E_i`` and its crossings with the other curves."""
    roles = roles or {}
    cache = _cache or _ChartCache(conn, tree)
    birth = tree.birth_chart(label)
    generic = restrict_to_component(cache(birth.name), X)
    crossings = []
    for p in tree.crossings(label):
        chart = tree.chart(p.chart)
        eq = chart.curve(label).equation
        if eq == X:
            axis = "x"
        elif eq == Y:
            axis = "y"
        else:
            raise ComponentNotInChart(f"{label} is not a coordinate line in {chart.name}")
        if p.point is None:
            place = p.place
        else:
            along = p.point[1] if axis == "x" else p.point[0]
            place = Y - along
        module = restrict_to_component(cache(chart.name), eq)
        for other in tree.point_labels(p):
            if other != label:
                crossings.append((other, chart.name, module, place))
    return _local_report(label, generic, birth.name, crossings, roles)


def local_component_reports(conn, components, roles=None):
    """Reports for coordinate lines of a single chart, e.g. ``{"Ex": x, "Ey": y}``.

    Every pair of perpendicular lines crosses once; that crossing is recorded
    on both lines.
    """
    roles = roles or {}
    lines = {}
    for label, eq in components.items():
        eq = S(eq)
        if eq.is_polynomial() and eq.degree("x")[0] == 1 and eq.free_of("y"):
            lines[label] = ("x", -eq.coefficients("x")[0].get(0, ZERO) / eq.coefficients("x")[0][1], eq)
        elif eq.is_polynomial() and eq.degree("y")[0] == 1 and eq.free_of("x"):
            lines[label] = ("y", -eq.coefficients("y")[0].get(0, ZERO) / eq.coefficients("y")[0][1], eq)
        else:
            raise ComponentNotInChart(f"{label}: {eq} is not a coordinate line")
    out = []
    for label in sorted(lines):
        axis, _, eq = lines[label]
        generic = restrict_to_component(conn, eq)
        crossings = []
        for other in sorted(lines):
            o_axis, o_off, _ = lines[other]
            if other == label or o_axis == axis:
                continue
            crossings.append((other, "R", generic, Y - o_off))
        out.append(_local_report(label, generic, "R", crossings, roles))
    return tuple(out)


# crossing bounds -------------------------------------------------------------------
@dataclass(frozen=True)
class BoundEntry:
    other: str
    chart: str
    place: str
    multiplicity: int
    bound: Fraction
    ok: bool
    excluded: bool = False


@dataclass(frozen=True)
class CrossingBounds:
    label: str
    entries: tuple

    @property
    def ok(self):
        return all(e.ok for e in self.entries)

    def __bool__(self):
        return self.ok

    def failures(self):
        return tuple(e for e in self.entries if not e.ok)


def lemma5_bounds(report, neighbor_ranks):
    """Check ``mult <= mu_(rho_i) * rho_i'`` at every crossing of ``E_i``.

    Neighbours on the regular locus get rank 0 whatever ``neighbor_ranks``
    says; crossings with the test curve are listed but not checked.
    """
    entries = []
    for rec in report.crossings:
        if rec.kind == TEST_CURVE:
            entries.append(BoundEntry(rec.other, rec.chart, rec.place, rec.multiplicity, None, True, True))
            continue
        if rec.kind == REGULAR_LOCUS:
            other_rho = Fraction(0)
        elif rec.other in neighbor_ranks:
            other_rho = Fraction(neighbor_ranks[rec.other])
        else:
            raise KeyError(f"no rank known for {rec.other}")
        bound = report.mu_rho * other_rho
        entries.append(BoundEntry(rec.other, rec.chart, rec.place, rec.multiplicity, bound, rec.multiplicity <= bound))
    return CrossingBounds(report.label, tuple(entries))


# slope inequality and positivity --------------------------------------------------
@dataclass(frozen=True)
class InequalityLedger:
    labels: tuple
    rho: tuple
    rows: tuple  # sum_j A_ij rho_j
    minors: tuple
    negative_definite: bool
    hypotheses_met: bool
    verdict: str  # "regular" or "inconclusive"

    @property
    def concludes_zero(self):
        return self.verdict == "regular"


def _sign(q):
    return ">= 0" if q >= 0 else "< 0"


def slope_inequality(a, reports):
    """Evaluate ``sum_j A_ij rho_j >= 0`` for every i and apply the positivity lemma."""
    rho = tuple(Fraction(getattr(r, "rho", r)) for r in reports)
    labels = tuple(getattr(r, "label", f"E{i + 1}") for i, r in enumerate(reports))
    if len(a) != len(rho):
        raise ValueError("matrix and reports disagree in size")
    rows = tuple(sum((Fraction(a_ij) * r for a_ij, r in zip(row, rho)), Fraction(0)) for row in a)
    minors = tuple(linalg.leading_minors(a)) if a else ()
    definite = linalg.is_negative_definite(a) if a else True
    met = all(v >= 0 for v in rows) and all(r >= 0 for r in rho)
    regular = (definite and met and positivity_lemma(a, rho)) if a else True
    return InequalityLedger(labels, rho, rows, minors, definite, met, "regular" if regular else "inconclusive")


def positivity_lemma(a, v):
    """For negative definite ``a`` and ``v >= 0``: ``a v >= 0`` forces ``v = 0``."""
    if not linalg.is_negative_definite(a):
        raise NotNegativeDefinite(f"{a} is not negative definite")
    v = [Fraction(t) for t in v]
    if any(t < 0 for t in v):
        raise ValueError("v must be componentwise nonnegative")
    av = [sum((Fraction(x) * t for x, t in zip(row, v)), Fraction(0)) for row in a]
    if any(t < 0 for t in av):
        return True
    return all(t == 0 for t in v)


def positivity_counterexamples(a, bound=3):
    """All nonzero ``v`` in ``{0..bound}^n`` with ``a v >= 0`` (brute force)."""
    n = len(a)
    out = []
    for v in itertools.product(range(bound + 1), repeat=n):
        if any(v) and all(t >= 0 for t in linalg.int_matvec(a, v)):
            out.append(v)
    return out


# exponents ------------------------------------------------------------------------
@dataclass(frozen=True)
class ExponentLedger:
    z_exponents: tuple  # (label, tuple of Exponent)
    pullback: tuple  # Exponent

    def z_map(self):
        return dict(self.z_exponents)


def _coords(e):
    if isinstance(e, Exponent):
        return e.coeffs
    try:
        return Exponent.from_scalar(S(e)).coeffs
    except IrrationalExponents:
        raise
    except Exception as exc:
        raise IrrationalExponents(f"{e} is not in the span of 1, c1..c9") from exc


def qspan_check(ledger):
    """Every pullback exponent lies in the Q-span of the Z exponents modulo Q."""
    gens = [_coords(e) for _, es in ledger.z_exponents for e in es]
    targets = [_coords(e) for e in ledger.pullback]
    n = len(CONSTANTS)
    for t in targets:
        if not any(t):
            continue
        rows = [[g[i] for g in gens] for i in range(n)]
        if not gens or linalg.rational_solve(rows, list(t)) is None:
            return False
    return True


# the theorem ---------------------------------------------------------------------
@dataclass(frozen=True)
class RegularityCertificate:
    base_point: tuple
    germs: tuple  # (label, equation, role)
    events: tuple  # (index, chart, center)
    components: tuple  # (label, birth, self-intersection)
    matrix: tuple
    reports: tuple
    bounds: tuple
    inequality: InequalityLedger
    pullback_slopes: tuple
    pullback_rho: Fraction
    exponents: ExponentLedger = None
    qspan: bool = None
    verdict: str = "inconclusive"
    notes: tuple = field(default=())

    @property
    def rho(self):
        return tuple(r.rho for r in self.reports)

    def to_dict(self):
        def pt(p):
            return [str(c) for c in p]

        return {
            "resolution": {
                "base_point": pt(self.base_point),
                "germs": [{"label": l, "equation": str(e), "role": r} for l, e, r in self.germs],
                "events": [{"index": i, "chart": c, "center": pt(p)} for i, c, p in self.events],
                "components": [{"label": l, "birth": b, "self_intersection": s} for l, b, s in self.components],
                "intersection_matrix": [list(row) for row in self.matrix],
            },
            "components": [
                {
                    "label": r.label,
                    "rho": _frac(r.rho),
                    "mu_rho": r.mu_rho,
                    "phi": str(r.phi),
                    "chart": r.chart,
                    "crossings": [
                        {
                            "other": e.other,
                            "kind": c.kind,
                            "chart": e.chart,
                            "place": e.place,
                            "multiplicity": e.multiplicity,
                            "bound": None if e.bound is None else _frac(e.bound),
                            "ok": e.ok,
                            "excluded": e.excluded,
                        }
                        for c, e in zip(r.crossings, l5.entries)
                    ],
                }
                for r, l5 in zip(self.reports, self.bounds)
            ],
            "inequalities": [
                {"component": l, "value": _frac(v), "sign": _sign(v)}
                for l, v in zip(self.inequality.labels, self.inequality.rows)
            ],
            "definiteness": {
                "minors": list(self.inequality.minors),
                "signs": ["+" if m > 0 else "-" for m in self.inequality.minors],
                "negative_definite": self.inequality.negative_definite,
                "hypotheses_met": self.inequality.hypotheses_met,
                "conclusion": "rho = 0" if self.inequality.concludes_zero else "not concluded",
            },
            "pullback": {
                "slopes": [[_frac(s), m] for s, m in self.pullback_slopes],
                "rho": _frac(self.pullback_rho),
                "exponents": None
                if self.exponents is None
                else [str(e) for e in self.exponents.pullback],
                "z_exponents": None
                if self.exponents is None
                else {l: [str(e) for e in es] for l, es in self.exponents.z_exponents},
                "qspan": self.qspan,
            },
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def render(self):
        d = self.to_dict()
        out = ["[resolution]"]
        res = d["resolution"]
        out.append(f"base_point = ({', '.join(res['base_point'])})")
        for g in res["germs"]:
            out.append(f"germ {g['label']} = {g['equation']}  ({g['role']})")
        for e in res["events"]:
            out.append(f"event {e['index']}: blow up ({', '.join(e['center'])}) in chart {e['chart']}")
        for c in res["components"]:
            out.append(f"component {c['label']}: birth {c['birth']}, self-intersection {c['self_intersection']}")
        out.append("intersection_matrix = " + json.dumps(res["intersection_matrix"]))
        out.append("")
        out.append("[components]")
        for c in d["components"]:
            out.append(f"{c['label']}: rho = {c['rho']}, mu_rho = {c['mu_rho']}, phi = {c['phi']}  (chart {c['chart']})")
            for x in c["crossings"]:
                bound = "excluded" if x["excluded"] else f"<= {x['bound']} {'ok' if x['ok'] else 'FAIL'}"
                out.append(
                    f"  meets {x['other']} ({x['kind']}) in {x['chart']} at {x['place']}: "
                    f"multiplicity {x['multiplicity']} {bound}"
                )
        out.append("")
        out.append("[inequalities]")
        for row in d["inequalities"]:
            out.append(f"sum_j A[{row['component']}][j] * rho_j = {row['value']} {row['sign']}")
        out.append("")
        out.append("[definiteness]")
        df = d["definiteness"]
        out.append(f"minors = {df['minors']}")
        out.append(f"signs = {' '.join(df['signs'])}")
        out.append(f"negative_definite = {str(df['negative_definite']).lower()}")
        out.append(f"hypotheses_met = {str(df['hypotheses_met']).lower()}")
        out.append(f"conclusion = {df['conclusion']}")
        out.append("")
        out.append("[pullback]")
        pb = d["pullback"]
        out.append("slopes = " + ", ".join(f"({s}, {m})" for s, m in pb["slopes"]))
        out.append(f"rho = {pb['rho']}")
        if pb["exponents"] is not None:
            out.append("exponents = " + ", ".join(pb["exponents"]))
            for l, es in pb["z_exponents"].items():
                out.append(f"exponents[{l}] = " + ", ".join(es))
        out.append(f"qspan = {'n/a' if pb['qspan'] is None else str(pb['qspan']).lower()}")
        out.append("")
        out.append("[verdict]")
        out.append(self.verdict)
        for n in d["notes"]:
            out.append(f"note: {n}")
        return "\n".join(out) + "\n"


def _graph_chart(f):
    """Coordinate change straightening ``f = 0`` to a coordinate line.

    Returns ``(sigma, line)``: pulling back along ``sigma`` turns the zero set
    of ``f`` into ``line``.  Only graphs ``y = h(x)`` and ``x = h(y)`` are
    supported.
    """
    for axis, other, var in (("y", "x", Y), ("x", "y", X)):
        if f.is_polynomial() and f.degree(axis)[0] == 1:
            coeffs, _ = f.coefficients(axis)
            lead = coeffs[1]
            if lead.free_of("x", "y"):
                h = -coeffs.get(0, ZERO) / lead
                if axis == "y":
                    return (X, Y + h), Y
                return (X + h.subs({"y": Y}), Y), X
    raise ComponentNotInChart(f"{f} is not a graph over a coordinate axis")


def _branches(f):
    """Irreducible factors of ``f`` through the origin."""
    return [q for q, _ in factor(S(f))[1] if not q.free_of("x", "y") and q.subs({"x": ZERO, "y": ZERO}).is_zero()]


def _along(conn, f):
    """Module of the connection along the smooth curve ``f = 0``."""
    sigma, line = _graph_chart(f)
    return restrict_to_component(substitute(conn, sigma), line)


def verify_theorem(conn, germs, param, declared_regular, curve_label="C", max_steps=None, cap=None):
    """Certify that ``conn`` pulled back to the curve ``param`` is regular at its base point."""
    from .resolution import DEFAULT_MAX_STEPS

    max_steps = DEFAULT_MAX_STEPS if max_steps is None else max_steps
    xt, yt = (S(p) for p in param)
    base = (xt.subs({"x": ZERO}), yt.subs({"x": ZERO}))
    a, b = base
    conn0 = translate(conn, base)
    shift = {"x": X + a, "y": Y + b}
    germs0 = [CurveGerm(g.label, g.equation.subs(shift)) for g in germs]
    param0 = (xt - a, yt - b)
    declared = tuple(declared_regular)
    labels = {g.label for g in germs0}
    for lbl in declared:
        if lbl not in labels:
            raise ValueError(f"declared component {lbl} is not among the germs")
    notes = []

    # prerequisites, branch by branch through the base point
    z_exps = []
    branches = []
    for g in germs0:
        if g.label not in declared:
            continue
        local = _branches(g.equation)
        for k, f in enumerate(local, start=1):
            name = g.label if len(local) == 1 else f"{g.label}.{k}"
            branches.append(f)
            module = _along(conn0, f)
            if katz_rank(module).rho != 0:
                raise PrerequisiteFailed(f"connection is irregular along {name} = {{{f} = 0}}")
            try:
                z_exps.append((name, residue_exponents(module, cap)))
            except IrrationalExponents as exc:
                notes.append(f"exponents along {name} skipped: {exc}")
    for pole in conn0.polar_locus:
        for f in _branches(pole):
            if not any((z / f).free_of("x", "y") for z in branches):
                raise PrerequisiteFailed(f"pole along {f} = 0 is not a declared regular component")

    # direct route first: it also rejects curves inside the polar locus
    pulled = pullback_curve(conn0, param0)
    pcert = katz_rank(pulled)

    roles = {lbl: REGULAR_LOCUS for lbl in declared}
    roles[curve_label] = TEST_CURVE
    if curve_label not in labels:
        germs0.append(CurveGerm(curve_label, implicitize(param0)))
    tree = embedded_resolution(germs0, max_steps=max_steps)
    cache = _ChartCache(conn0, tree)
    reports = tuple(component_report(conn0, tree, c.label, roles, cache) for c in tree.components)
    ranks = {r.label: r.rho for r in reports}
    l5 = tuple(lemma5_bounds(r, ranks) for r in reports)
    a_mat = intersection_matrix(tree)
    ineq = slope_inequality(a_mat, reports)

    exps = None
    qspan = None
    if pcert.rho == 0:
        try:
            exps = ExponentLedger(tuple(z_exps), residue_exponents(pulled, cap))
            qspan = qspan_check(exps)
        except IrrationalExponents as exc:
            notes.append(f"pullback exponents skipped: {exc}")

    route_a = ineq.concludes_zero and all(l5)
    route_b = pcert.rho == 0
    if route_a and not route_b:
        raise RoutesDisagree(f"inequalities give rho = 0 but the pullback has rank {pcert.rho}")
    verdict = "regular" if route_a and route_b else ("inconclusive" if route_b else "irregular")

    def role(lbl):
        return roles.get(lbl, POLAR)

    return RegularityCertificate(
        base_point=base,
        germs=tuple((g.label, g.equation, role(g.label)) for g in tree.germs),
        events=tuple((e.index, e.chart, e.center) for e in tree.events),
        components=tuple((c.label, c.birth, c.self_intersection) for c in tree.components),
        matrix=a_mat,
        reports=reports,
        bounds=l5,
        inequality=ineq,
        pullback_slopes=pcert.slopes.pairs,
        pullback_rho=pcert.rho,
        exponents=exps,
        qspan=qspan,
        verdict=verdict,
        notes=tuple(notes),
    )


def pullback_exponents(conn, param, cap=None):
    """Exponents mod Z of the pullback of ``conn`` to ``param`` at ``t = 0``."""
    return residue_exponents(pullback_curve(conn, param), cap)


def z_exponents(conn, equation, cap=None):
    return residue_exponents(_along(conn, S(equation)), cap)

