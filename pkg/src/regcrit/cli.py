"""Command-line front end.

Exit codes depend only on the error class::

    0  success (verdict regular for ``verify``)
    1  verdict not regular, or a connection that is not flat for ``flatness``
    2  parse error
    3  computation error
    4  step limit exceeded during resolution
    5  prerequisite failed (connection irregular along a declared component)
    6  the two routes of ``verify`` disagree
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import linalg
from .connection import check_flatness
from .criterion import pullback_exponents, qspan_check, verify_theorem, z_exponents, ExponentLedger
from .diffmod import katz_rank, leading_divisor, residue_exponents, saturation_oracle
from .errors import (
    NotFlat,
    ParseError,
    PrerequisiteFailed,
    RegcritError,
    RoutesDisagree,
    StepLimitExceeded,
)
from .fixtures import load_fixture
from .resolution import dual_graph, embedded_resolution, intersection_matrix

EXIT_OK = 0
EXIT_NOT_REGULAR = 1
EXIT_PARSE = 2
EXIT_COMPUTE = 3
EXIT_STEPS = 4
EXIT_PREREQ = 5
EXIT_DISAGREE = 6

COMMANDS = ("katz", "resolve", "verify", "exponents", "flatness")
FIXTURE_SUFFIXES = (".fix", ".ini", ".json")


def exit_code(exc):
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, StepLimitExceeded):
        return EXIT_STEPS
    if isinstance(exc, PrerequisiteFailed):
        return EXIT_PREREQ
    if isinstance(exc, RoutesDisagree):
        return EXIT_DISAGREE
    return EXIT_COMPUTE


def _frac(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _need(fx, what, section):
    if getattr(fx, what) in (None, ()):
        raise ParseError(f"fixture has no [{section}] section")


def _render(data, as_json, title):
    if as_json:
        return json.dumps(data, indent=2) + "\n"
    lines = [f"[{title}]"]
    for key, value in data.items():
        if isinstance(value, (list, dict)):
            value = json.dumps(value)
        elif isinstance(value, bool):
            value = str(value).lower()
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def run_katz(fx, args):
    _need(fx, "module", "module")
    cert = katz_rank(fx.module)
    data = {
        "rank": fx.module.rank,
        "slopes": [[_frac(s), m] for s, m in cert.slopes.pairs],
        "rho": _frac(cert.rho),
        "ramification": cert.ramification,
        "cyclic_vector": [str(u) for u in cert.cyclic_vector],
        "H0": None if cert.H0 is None else [[str(u) for u in row] for row in cert.H0],
        "leading_poly": str(cert.leading_poly),
    }
    if cert.rho == 0:
        data["divisor"] = "0"
    else:
        div = leading_divisor(fx.module)
        data["divisor"] = str(div.phi)
        data["degree"] = _frac(div.degree)
    return _render(data, args.json, "katz"), EXIT_OK


def run_resolve(fx, args):
    _need(fx, "germs", "germs")
    steps = args.max_steps or fx.option("max_steps")
    tree = embedded_resolution(fx.germs, **({"max_steps": steps} if steps else {}))
    mat = intersection_matrix(tree)
    minors = linalg.leading_minors(mat) if mat else []
    data = {
        "events": [
            {"index": e.index, "chart": e.chart, "center": [str(c) for c in e.center], "through": list(e.through)}
            for e in tree.events
        ],
        "components": [
            {"label": c.label, "birth": c.birth, "self_intersection": c.self_intersection} for c in tree.components
        ],
        "intersection_matrix": [list(r) for r in mat],
        "dual_graph": [list(e) for e in dual_graph(tree)],
        "minors": minors,
        "negative_definite": linalg.is_negative_definite(mat) if mat else True,
    }
    if args.json:
        return json.dumps(data, indent=2) + "\n", EXIT_OK
    out = ["[resolve]"]
    for e in data["events"]:
        out.append(
            f"event {e['index']}: blow up ({', '.join(e['center'])}) in chart {e['chart']}"
            f" through {', '.join(e['through'])}"
        )
    for c in data["components"]:
        out.append(f"component {c['label']}: birth {c['birth']}, self-intersection {c['self_intersection']}")
    out.append("intersection_matrix = " + json.dumps(data["intersection_matrix"]))
    out.append("dual_graph = " + ", ".join(f"{u}-{v}" for u, v in data["dual_graph"]))
    out.append(f"minors = {minors}")
    out.append(f"negative_definite = {str(data['negative_definite']).lower()}")
    return "\n".join(out) + "\n", EXIT_OK


def _flat_connection(fx):
    _need(fx, "connection", "connection")
    if not check_flatness(fx.connection):
        raise NotFlat("connection is not flat")
    return fx.connection


def run_verify(fx, args):
    conn = _flat_connection(fx)
    _need(fx, "curve", "curve")
    steps = args.max_steps or fx.option("max_steps")
    cap = args.saturation_cap or fx.option("saturation_cap")
    cert = verify_theorem(
        conn,
        fx.germs,
        fx.curve,
        fx.declared_regular,
        curve_label=fx.option("curve_label", "C"),
        max_steps=steps,
        cap=cap,
    )
    text = cert.to_json() + "\n" if args.json else cert.render()
    return text, EXIT_OK if cert.verdict == "regular" else EXIT_NOT_REGULAR


def run_exponents(fx, args):
    cap = args.saturation_cap or fx.option("saturation_cap")
    if fx.module is not None:
        if cap is not None:
            saturation_oracle(fx.module, cap)
        exps = residue_exponents(fx.module, cap)
        return _render({"exponents": [str(e) for e in exps]}, args.json, "exponents"), EXIT_OK
    conn = _flat_connection(fx)
    _need(fx, "curve", "curve")
    zs = tuple((g.label, z_exponents(conn, g.equation, cap)) for g in fx.germs if g.label in fx.declared_regular)
    pb = pullback_exponents(conn, fx.curve, cap)
    ledger = ExponentLedger(zs, pb)
    data = {
        "z_exponents": {l: [str(e) for e in es] for l, es in zs},
        "pullback": [str(e) for e in pb],
        "qspan": qspan_check(ledger),
    }
    return _render(data, args.json, "exponents"), EXIT_OK


def run_flatness(fx, args):
    _need(fx, "connection", "connection")
    flat = check_flatness(fx.connection)
    data = {"rank": fx.connection.rank, "flat": flat}
    return _render(data, args.json, "flatness"), EXIT_OK if flat else EXIT_NOT_REGULAR


RUNNERS = {
    "katz": run_katz,
    "resolve": run_resolve,
    "verify": run_verify,
    "exponents": run_exponents,
    "flatness": run_flatness,
}


def run_file(command, path, args):
    """``(stdout text, stderr text, exit code)`` for one fixture."""
    try:
        fx = load_fixture(path)
        text, code = RUNNERS[command](fx, args)
        return text, "", code
    except OSError as exc:
        return "", f"regcrit {command}: cannot read {path}: {exc.strerror}\n", EXIT_PARSE
    except ParseError as exc:
        return "", f"regcrit {command}: parse error in {path}: {exc}\n", EXIT_PARSE
    except (RegcritError, ArithmeticError, ValueError, KeyError) as exc:
        kind = type(exc).__name__
        return "", f"regcrit {command}: {kind} in {path}: {exc}\n", exit_code(exc)


def _corpus_files(directory):
    return sorted(
        os.path.join(directory, name)
        for name in os.listdir(directory)
        if name.endswith(FIXTURE_SUFFIXES)
    )


def _run_one(job):
    command, path, args = job
    return run_file(command, path, args)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--max-steps", type=int, default=None, help="blow-up step limit")
    common.add_argument("--saturation-cap", type=int, default=None, help="lattice saturation cap")
    common.add_argument("--corpus", metavar="DIR", default=None, help="process every fixture in DIR")
    parser = argparse.ArgumentParser(prog="regcrit", description="Exact regularity certificates for flat connections.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file", nargs="?", help="fixture file")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.corpus is None and args.file is None:
        sys.stderr.write(f"regcrit {args.command}: a fixture file or --corpus DIR is required\n")
        return EXIT_PARSE
    if args.corpus is None:
        text, err, code = run_file(args.command, args.file, args)
        sys.stdout.write(text)
        sys.stderr.write(err)
        return code
    try:
        files = _corpus_files(args.corpus)
    except OSError as exc:
        sys.stderr.write(f"regcrit {args.command}: cannot list {args.corpus}: {exc.strerror}\n")
        return EXIT_PARSE
    jobs = [(args.command, f, args) for f in files]
    with ProcessPoolExecutor() as pool:
        results = list(pool.map(_run_one, jobs))
    worst = EXIT_OK
    for path, (text, err, code) in zip(files, results):
        sys.stdout.write(f"== {os.path.basename(path)} (exit {code}) ==\n{text}")
        sys.stderr.write(err)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
