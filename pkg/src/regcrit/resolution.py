"""Embedded resolution of plane curve germs at the origin by point blow-ups.

Every blow-up of a point ``p = (a, b)`` of a chart with coordinates
``(x, y)`` creates two charts:

* ``a``: ``(x, y) = (a + u, b + u*v)``, new exceptional curve ``u = 0``;
* ``b``: ``(x, y) = (a + u*v, b + v)``, new exceptional curve ``v = 0``.

The new exceptional curve is the line ``u = 0`` of chart ``a`` together
with the origin of chart ``b``; those are the only places where new
normal-crossing violations can appear, so each chart only keeps the curves
through its parent center and is only scanned along its exceptional line.
All charts reuse the names ``x, y`` for their coordinates.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from . import linalg
from .errors import CenterNotOnLocus, IrrationalCenter, StepLimitExceeded
from .scalar import ONE, ZERO, S, Scalar, X, Y, factor, gcd

DEFAULT_MAX_STEPS = 64


@dataclass(frozen=True)
class CurveGerm:
    label: str
    equation: Scalar

    def __post_init__(self):
        f = S(self.equation)
        if f.is_zero() or not f.denominator().free_of("x", "y"):
            raise ValueError(f"germ {self.label}: {f} is not a nonzero polynomial in x, y")
        if f.free_of("x", "y"):
            raise ValueError(f"germ {self.label}: {f} is constant")
        common = gcd(gcd(f.numerator(), f.derivative("x").numerator()), f.derivative("y").numerator())
        if not common.free_of("x", "y"):
            raise ValueError(f"germ {self.label}: {f} is not square-free (repeated factor {common})")
        object.__setattr__(self, "equation", f)

    @property
    def through_origin(self):
        return self.equation.subs({"x": ZERO, "y": ZERO}).is_zero()


@dataclass(frozen=True)
class ChartCurve:
    label: str
    equation: Scalar
    exceptional: bool


@dataclass(frozen=True)
class Chart:
    name: str
    parent: Optional[str]
    kind: str  # "root", "a" or "b"
    center: Optional[tuple]  # center in parent coordinates
    to_root: tuple  # root coordinates (X, Y) as functions of this chart's (x, y)
    birth: int
    curves: tuple  # ChartCurve, the ones relevant near the exceptional locus

    def curve(self, label):
        for c in self.curves:
            if c.label == label:
                return c
        return None

    @property
    def exceptional_label(self):
        return None if self.kind == "root" else f"E{self.birth}"

    def exceptional_axis(self):
        """``"x"`` if the new exceptional curve is ``x = 0``, ``"y"`` if ``y = 0``."""
        return {"a": "x", "b": "y"}.get(self.kind)


@dataclass(frozen=True)
class CrossingPoint:
    """A point on the exceptional locus (or the root origin) met by several curves.

    ``place`` is an irreducible polynomial in the chart's free coordinate
    cutting the point on the scanned line (``x = 0`` in an ``a`` chart), or
    ``None`` for a chart origin.  ``point`` holds exact coordinates when they
    lie in Q(c).  ``curves`` lists ``(label, intersection multiplicity with the
    scanned line)``; for root-chart points it lists ``(label, multiplicity)``.
    """

    chart: str
    place: Optional[Scalar]
    point: Optional[tuple]
    curves: tuple
    violation: bool

    @property
    def labels(self):
        return tuple(lbl for lbl, _ in self.curves)

    def key(self):
        return (self.chart, None if self.point is None else tuple(str(c) for c in self.point), str(self.place))


@dataclass(frozen=True)
class BlowUp:
    index: int
    chart: str
    center: tuple
    through: tuple  # labels of the curves through the center
    multiplicities: tuple  # (label, multiplicity at the center)


@dataclass(frozen=True)
class Component:
    label: str
    birth: int
    self_intersection: int


@dataclass(frozen=True)
class ResolutionTree:
    germs: tuple
    charts: tuple  # Chart, in creation order
    events: tuple  # BlowUp
    components: tuple  # Component
    points: tuple  # CrossingPoint candidates, in scan order

    def chart(self, name):
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def component(self, label):
        for c in self.components:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def root(self):
        return self.charts[0]

    def blown_up(self):
        return {(e.chart, tuple(str(c) for c in e.center)) for e in self.events}

    def final_points(self):
        """Candidate points that were never used as centers."""
        done = self.blown_up()
        return tuple(
            p for p in self.points if p.point is None or (p.chart, tuple(str(c) for c in p.point)) not in done
        )

    def crossings(self, label=None):
        """Final points met by at least two curves, optionally only those on ``label``."""
        out = []
        for p in self.final_points():
            if len(p.curves) + (0 if self.chart(p.chart).kind == "root" else 1) < 2:
                continue
            labels = self.point_labels(p)
            if label is None or label in labels:
                out.append(p)
        return tuple(out)

    def point_labels(self, p):
        chart = self.chart(p.chart)
        own = () if chart.kind == "root" else (chart.exceptional_label,)
        return own + p.labels

    def birth_chart(self, label):
        k = int(label[1:])
        return self.chart(f"C{k}a")

    def adjacency(self):
        """Sorted ``(label, label)`` pairs of curves meeting at a final point (with repeats)."""
        pairs = []
        for p in self.crossings():
            labels = self.point_labels(p)
            for i in range(len(labels)):
                for j in range(i + 1, len(labels)):
                    pairs.append(tuple(sorted((labels[i], labels[j]), key=_label_key)))
        return tuple(sorted(pairs, key=lambda pr: (_label_key(pr[0]), _label_key(pr[1]))))


def _label_key(label):
    if label.startswith("E") and label[1:].isdigit():
        return (0, int(label[1:]), "")
    return (1, 0, label)


# local algebra ------------------------------------------------------------------
def multiplicity_at(f, point):
    """Order of vanishing of ``f`` at ``point`` (lowest total degree after translation)."""
    a, b = point
    g = f.subs({"x": X + a, "y": Y + b})
    if g.is_zero():
        raise ValueError("zero polynomial")
    n = g.numerator().num
    ix, iy = 10, 9
    return int(min(m[ix] + m[iy] for m in n.monoms()))


def _linear_part(f, point):
    a, b = point
    g = f.subs({"x": X + a, "y": Y + b})
    return g.derivative("x").subs({"x": ZERO, "y": ZERO}), g.derivative("y").subs({"x": ZERO, "y": ZERO})


def _strict(f, center, kind, mult):
    a, b = center
    if kind == "a":
        sub = {"x": X + a, "y": Y * X + b}
        div = X
    else:
        sub = {"x": X * Y + a, "y": Y + b}
        div = Y
    g = f.subs(sub) / div**mult
    if not g.denominator().free_of("x", "y"):
        raise ArithmeticError(f"strict transform of {f} is not a polynomial")
    return g


def _places_on_line(curves, axis):
    """Group the curves meeting the line ``axis = 0`` by irreducible place.

    Returns ``[(place, [(label, multiplicity), ...]), ...]``, where ``place``
    is an irreducible polynomial in the other coordinate.
    """
    other = "y" if axis == "x" else "x"
    groups = {}
    for c in curves:
        h = c.equation.subs({axis: ZERO})
        if h.is_zero():
            raise ArithmeticError(f"curve {c.label} contains the exceptional line")
        _, facs = factor(h.numerator())
        for q, k in facs:
            if q.depends_on(other):
                groups.setdefault(q, []).append((c.label, k))
    return sorted(groups.items(), key=lambda item: str(item[0]))


def _rational_root(q, var):
    deg = q.degree(var)[0]
    if deg != 1:
        return None
    coeffs, _ = q.coefficients(var)
    return -coeffs.get(0, ZERO) / coeffs[1]


def _scan_chart(chart):
    """Candidate points of a freshly created chart."""
    if chart.kind == "root":
        curves = [c for c in chart.curves if c.equation.subs({"x": ZERO, "y": ZERO}).is_zero()]
        if not curves:
            return []
        origin = (ZERO, ZERO)
        mults = [(c.label, multiplicity_at(c.equation, origin)) for c in curves]
        violation = len(curves) >= 3 or any(m > 1 for _, m in mults)
        if not violation and len(curves) == 2:
            l1 = _linear_part(curves[0].equation, origin)
            l2 = _linear_part(curves[1].equation, origin)
            violation = (l1[0] * l2[1] - l1[1] * l2[0]).is_zero()
        return [CrossingPoint(chart.name, None, origin, tuple(mults), violation)]
    others = [c for c in chart.curves if c.label != chart.exceptional_label]
    if chart.kind == "a":
        out = []
        for q, members in _places_on_line(others, "x"):
            root = _rational_root(q, "y")
            point = None if root is None else (ZERO, root)
            violation = len(members) >= 2 or members[0][1] >= 2
            out.append(CrossingPoint(chart.name, q, point, tuple(members), violation))
        return out
    members = []
    for c in others:
        h = c.equation.subs({"y": ZERO})
        k = h.ord("x")
        if k >= 1:
            members.append((c.label, int(k)))
    if not members:
        return []
    violation = len(members) >= 2 or members[0][1] >= 2
    return [CrossingPoint(chart.name, None, (ZERO, ZERO), tuple(members), violation)]


# public operations ----------------------------------------------------------------
def start_tree(germs):
    """Tree with no blow-ups: the root chart holding the input germs."""
    germs = tuple(germs)
    labels = [g.label for g in germs]
    if len(set(labels)) != len(labels):
        raise ValueError("germ labels must be unique")
    for lbl in labels:
        if lbl.startswith("E") and lbl[1:].isdigit():
            raise ValueError(f"label {lbl} is reserved for exceptional curves")
    eqs = [g.equation for g in germs]
    for i in range(len(eqs)):
        for j in range(i + 1, len(eqs)):
            if (eqs[i] / eqs[j]).free_of("x", "y"):
                raise ValueError(f"germs {labels[i]} and {labels[j]} coincide")
    curves = tuple(ChartCurve(g.label, g.equation, False) for g in germs)
    root = Chart("R", None, "root", None, (X, Y), 0, curves)
    return ResolutionTree(germs, (root,), (), (), tuple(_scan_chart(root)))


def snc_violations(tree):
    """Points of the reduced total transform where normal crossings fail.

    Sorted by (chart birth index, chart name, coordinates).  A violating point
    whose coordinates are not in Q(c) raises :class:`IrrationalCenter`.
    """
    done = tree.blown_up()
    out = []
    for p in tree.points:
        if not p.violation:
            continue
        if p.point is None:
            raise IrrationalCenter(
                f"violation on chart {p.chart} at the roots of {p.place}, which are not in Q(c)"
            )
        if (p.chart, tuple(str(c) for c in p.point)) in done:
            continue
        out.append((tree.chart(p.chart), p.point))
    out.sort(key=lambda cp: (cp[0].birth, cp[0].name, tuple(str(c) for c in cp[1])))
    return out


def blowup_point(tree, chart, point):
    """Blow up ``point`` of ``chart`` (a chart name or :class:`Chart`)."""
    if isinstance(chart, str):
        chart = tree.chart(chart)
    point = (S(point[0]), S(point[1]))
    a, b = point
    if chart.kind == "a" and not a.is_zero():
        raise CenterNotOnLocus(f"chart {chart.name} only owns points with x = 0")
    if chart.kind == "b" and not (a.is_zero() and b.is_zero()):
        raise CenterNotOnLocus(f"chart {chart.name} only owns its origin")
    key = (chart.name, tuple(str(c) for c in point))
    if key in tree.blown_up():
        raise CenterNotOnLocus(f"{point} of {chart.name} was already blown up")
    through = [c for c in chart.curves if c.equation.subs({"x": a, "y": b}).is_zero()]
    if not through:
        raise CenterNotOnLocus(f"no curve of chart {chart.name} passes through {tuple(map(str, point))}")
    index = len(tree.events) + 1
    label = f"E{index}"
    mults = [(c.label, multiplicity_at(c.equation, point)) for c in through]
    new_charts = []
    for kind in ("a", "b"):
        if kind == "a":
            sub = {"x": X + a, "y": Y * X + b}
            exc = ChartCurve(label, X, True)
        else:
            sub = {"x": X * Y + a, "y": Y + b}
            exc = ChartCurve(label, Y, True)
        to_root = tuple(u.subs(sub) for u in chart.to_root)
        curves = []
        for c, (_, m) in zip(through, mults):
            g = _strict(c.equation, point, kind, m)
            if not g.free_of("x", "y"):
                curves.append(ChartCurve(c.label, g, c.exceptional))
        curves.append(exc)
        new_charts.append(Chart(f"C{index}{kind}", chart.name, kind, point, to_root, index, tuple(curves)))
    passing = {c.label for c in through if c.exceptional}
    components = tuple(
        dataclasses.replace(c, self_intersection=c.self_intersection - 1) if c.label in passing else c
        for c in tree.components
    ) + (Component(label, index, -1),)
    points = tree.points + tuple(p for ch in new_charts for p in _scan_chart(ch))
    event = BlowUp(index, chart.name, point, tuple(c.label for c in through), tuple(mults))
    return ResolutionTree(tree.germs, tree.charts + tuple(new_charts), tree.events + (event,), components, points)


def embedded_resolution(germs, max_steps=DEFAULT_MAX_STEPS):
    """Blow up violations in order until the total transform has normal crossings."""
    tree = start_tree(germs)
    while True:
        todo = snc_violations(tree)
        if not todo:
            return tree
        if len(tree.events) >= max_steps:
            raise StepLimitExceeded(f"no normal crossings after {max_steps} blow-ups")
        chart, point = todo[0]
        tree = blowup_point(tree, chart, point)


def intersection_matrix(tree):
    """``A[i][j] = (E_i, E_j)`` over the exceptional components."""
    labels = [c.label for c in tree.components]
    pos = {lbl: i for i, lbl in enumerate(labels)}
    n = len(labels)
    mat = [[0] * n for _ in range(n)]
    for c in tree.components:
        mat[pos[c.label]][pos[c.label]] = c.self_intersection
    for u, v in tree.adjacency():
        if u in pos and v in pos:
            mat[pos[u]][pos[v]] += 1
            mat[pos[v]][pos[u]] += 1
    return tuple(tuple(row) for row in mat)


def dual_graph(tree):
    """Edges ``(E_i, E_j)`` and ``(E_i, germ)`` of the final configuration."""
    return tuple(pr for pr in tree.adjacency() if pr[0].startswith("E") and pr[0][1:].isdigit())


def is_negative_definite_tree(tree):
    return linalg.is_negative_definite(intersection_matrix(tree)) if tree.components else True


def implicitize(param):
    """Square-free implicit equation of a polynomial curve ``t -> (x(t), y(t))``.

    ``param`` holds Scalars in the variable ``x`` (standing for t).  The curve
    is the square-free part of ``Res_t(X - x(t), Y - y(t))``.
    """
    xt, yt = (S(p) for p in param)
    if not (xt.is_polynomial() and yt.is_polynomial()):
        raise ValueError("implicitization needs polynomial parametrizations")
    # t borrows the constant slot c9 while the resultant is taken
    t = Scalar.var("c9")
    if xt.depends_on("c9") or yt.depends_on("c9"):
        raise ValueError("the constant c9 is reserved during implicitization")
    fx = X - xt.subs({"x": t})
    fy = Y - yt.subs({"x": t})
    res = fx.num.resultant(fy.num, "c9")
    f = Scalar(res)
    _, facs = factor(f)
    out = ONE
    for q, _k in facs:
        if not q.free_of("x", "y"):
            out = out * q
    return out
