"""Fixture files: an INI-style text format, with JSON accepted as well.

Example::

    [connection]
    rank = 1
    A_x = c1/x
    A_y = c2/y
    polar_locus = x; y

    [germs]
    Z1 = x
    Z2 = y

    [curve]
    x = t^2
    y = t^3

    [declared_regular]
    labels = Z1, Z2

Matrix rows are separated by ``;`` and entries by ``,``.  A ``[module]``
section (``rank``, ``theta``, optional ``coefficient``) describes a single
differential module for the ``katz`` and ``exponents`` commands.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass

from .connection import PlaneConnection
from .diffmod import DiffModule
from .errors import ParseError
from .resolution import CurveGerm
from .scalar import parse

CURVE_ALIASES = {"t": "x"}
OPTION_KEYS = ("max_steps", "saturation_cap", "curve_label")


@dataclass(frozen=True)
class Fixture:
    connection: PlaneConnection = None
    germs: tuple = ()
    curve: tuple = None
    declared_regular: tuple = ()
    options: tuple = ()  # sorted (key, value) pairs
    module: DiffModule = None

    def option(self, key, default=None):
        return dict(self.options).get(key, default)


def _scalar(text, where, aliases=None):
    try:
        return parse(text, aliases)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc.detail}", text, exc.position) from None


def _matrix(text, rank, where):
    rows = [r for r in text.split(";")]
    mat = []
    for i, row in enumerate(rows):
        mat.append(tuple(_scalar(u.strip(), f"{where} row {i + 1}") for u in row.split(",")))
    if rank is not None and (len(mat) != rank or any(len(r) != rank for r in mat)):
        raise ParseError(f"{where}: expected a {rank}x{rank} matrix")
    return tuple(mat)


def _int(text, where):
    try:
        return int(str(text).strip())
    except ValueError:
        raise ParseError(f"{where}: {text!r} is not an integer") from None


def _build(conn, germs, curve, declared, options, module):
    labels = [g.label for g in germs]
    if len(set(labels)) != len(labels):
        raise ParseError("germ labels must be unique")
    for lbl in declared:
        if lbl not in labels:
            raise ParseError(f"declared_regular refers to unknown germ {lbl!r}")
    for key in dict(options):
        if key not in OPTION_KEYS:
            raise ParseError(f"unknown option {key!r}")
    return Fixture(conn, tuple(germs), curve, tuple(declared), tuple(sorted(options)), module)


def _germ(label, eq):
    try:
        return CurveGerm(label, eq)
    except ValueError as exc:
        raise ParseError(f"germ {label}: {exc}") from None


def _parse_ini(text):
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"malformed fixture: {exc}") from None
    known = {"connection", "germs", "curve", "declared_regular", "options", "module"}
    for sec in cp.sections():
        if sec not in known:
            raise ParseError(f"unknown section [{sec}]")
    conn = None
    if cp.has_section("connection"):
        s = cp["connection"]
        rank = _int(s.get("rank", "1"), "connection.rank")
        for key in ("A_x", "A_y"):
            if key not in s:
                raise ParseError(f"connection.{key} is missing")
        a_x = _matrix(s["A_x"], rank, "connection.A_x")
        a_y = _matrix(s["A_y"], rank, "connection.A_y")
        polar = None
        if s.get("polar_locus", "").strip():
            polar = tuple(_scalar(p.strip(), "connection.polar_locus") for p in s["polar_locus"].split(";"))
        conn = _connection(a_x, a_y, polar)
    germs = []
    if cp.has_section("germs"):
        for label, value in cp["germs"].items():
            germs.append(_germ(label, _scalar(value, f"germs.{label}")))
    curve = None
    if cp.has_section("curve"):
        s = cp["curve"]
        if set(s) != {"x", "y"}:
            raise ParseError("curve needs exactly the keys x and y")
        curve = tuple(_scalar(s[k], f"curve.{k}", CURVE_ALIASES) for k in ("x", "y"))
    declared = []
    if cp.has_section("declared_regular"):
        raw = cp["declared_regular"].get("labels", "")
        declared = [p.strip() for p in raw.split(",") if p.strip()]
    options = []
    if cp.has_section("options"):
        for key, value in cp["options"].items():
            options.append((key, value.strip() if key == "curve_label" else _int(value, f"options.{key}")))
    module = None
    if cp.has_section("module"):
        s = cp["module"]
        rank = _int(s.get("rank", "1"), "module.rank")
        if "theta" not in s:
            raise ParseError("module.theta is missing")
        coeff = s.get("coefficient", "y").strip() or None
        if coeff not in (None, "y", "none"):
            raise ParseError(f"module.coefficient must be y or none, not {coeff!r}")
        module = DiffModule.of(_matrix(s["theta"], rank, "module.theta"), None if coeff == "none" else coeff)
    return _build(conn, germs, curve, declared, options, module)


def _connection(a_x, a_y, polar):
    try:
        # flatness is the business of the commands, not of the parser
        return PlaneConnection(a_x, a_y, polar, verify=False)
    except ValueError as exc:
        raise ParseError(f"connection: {exc}") from None


def _json_matrix(rows, where):
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of rows")
    return tuple(tuple(_scalar(str(u), f"{where} row {i + 1}") for u in row) for i, row in enumerate(rows))


def _parse_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", text, exc.pos) from None
    conn = None
    if "connection" in data:
        c = data["connection"]
        polar = c.get("polar_locus")
        polar = None if polar is None else tuple(_scalar(p, "connection.polar_locus") for p in polar)
        conn = _connection(_json_matrix(c["A_x"], "connection.A_x"), _json_matrix(c["A_y"], "connection.A_y"), polar)
        if conn.rank != c.get("rank", conn.rank):
            raise ParseError("connection.rank does not match the matrices")
    germs = [_germ(l, _scalar(v, f"germs.{l}")) for l, v in data.get("germs", {}).items()]
    curve = None
    if data.get("curve") is not None:
        cx, cy = data["curve"]
        curve = (_scalar(cx, "curve.x", CURVE_ALIASES), _scalar(cy, "curve.y", CURVE_ALIASES))
    options = list(data.get("options", {}).items())
    module = None
    if "module" in data:
        m = data["module"]
        module = DiffModule.of(_json_matrix(m["theta_matrix"], "module.theta_matrix"), m.get("coefficient", "y"))
    return _build(conn, germs, curve, data.get("declared_regular", []), options, module)


def parse_fixture(text):
    if text.lstrip().startswith("{"):
        return _parse_json(text)
    return _parse_ini(text)


def load_fixture(path):
    with open(path, encoding="utf-8") as fh:
        return parse_fixture(fh.read())


def _fmt_matrix(m):
    return "; ".join(", ".join(str(u) for u in row) for row in m)


def print_fixture(fx):
    """Canonical INI text of a fixture."""
    out = []
    if fx.connection is not None:
        c = fx.connection
        out += ["[connection]", f"rank = {c.rank}", f"A_x = {_fmt_matrix(c.a_x)}", f"A_y = {_fmt_matrix(c.a_y)}"]
        if c.polar_locus:
            out.append("polar_locus = " + "; ".join(str(p) for p in c.polar_locus))
        out.append("")
    if fx.germs:
        out.append("[germs]")
        out += [f"{g.label} = {g.equation}" for g in fx.germs]
        out.append("")
    if fx.curve is not None:
        # the parameter prints as x, which the curve section reads as t
        out += ["[curve]", f"x = {fx.curve[0]}", f"y = {fx.curve[1]}", ""]
    if fx.declared_regular:
        out += ["[declared_regular]", "labels = " + ", ".join(fx.declared_regular), ""]
    if fx.options:
        out.append("[options]")
        out += [f"{k} = {v}" for k, v in fx.options]
        out.append("")
    if fx.module is not None:
        m = fx.module
        out += ["[module]", f"rank = {m.rank}", f"theta = {_fmt_matrix(m.theta_matrix)}"]
        out.append(f"coefficient = {m.coefficient or 'none'}")
        out.append("")
    return "\n".join(out)


def fixture_to_json(fx):
    data = {}
    if fx.connection is not None:
        c = fx.connection
        data["connection"] = {
            "rank": c.rank,
            "A_x": [[str(u) for u in row] for row in c.a_x],
            "A_y": [[str(u) for u in row] for row in c.a_y],
            "polar_locus": [str(p) for p in c.polar_locus],
        }
    if fx.germs:
        data["germs"] = {g.label: str(g.equation) for g in fx.germs}
    if fx.curve is not None:
        data["curve"] = [str(p) for p in fx.curve]
    if fx.declared_regular:
        data["declared_regular"] = list(fx.declared_regular)
    if fx.options:
        data["options"] = dict(fx.options)
    if fx.module is not None:
        data["module"] = {
            "rank": fx.module.rank,
            "theta_matrix": [[str(u) for u in row] for row in fx.module.theta_matrix],
            "coefficient": fx.module.coefficient,
        }
    return json.dumps(data, indent=2)

