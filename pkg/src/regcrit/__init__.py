"""Exact regularity certificates for flat connections on the plane.

The package is layered: :mod:`regcrit.scalar` and :mod:`regcrit.linalg` give
exact arithmetic in Q(c1..c9)(y)(x); :mod:`regcrit.diffmod` computes slopes,
Katz ranks and exponents of formal differential modules;
:mod:`regcrit.resolution` resolves plane curve germs; :mod:`regcrit.connection`
handles flat connections; :mod:`regcrit.criterion` assembles certificates.
"""

from .connection import (
    ModelBlock,
    NiceFormalModel,
    PlaneConnection,
    assemble_nice_model,
    check_flatness,
    pull_through_chart,
    pullback_curve,
    restrict_to_component,
    varpi_projection,
)
from .criterion import (
    ComponentReport,
    ExponentLedger,
    RegularityCertificate,
    component_report,
    lemma5_bounds,
    positivity_lemma,
    qspan_check,
    slope_inequality,
    verify_theorem,
)
from .diffmod import (
    DiffModule,
    SlopeData,
    cyclic_vector,
    is_regular,
    katz_rank,
    leading_divisor,
    newton_polygon,
    ramify,
    residue_exponents,
    saturation_oracle,
    to_operator,
)
from .linalg import charpoly, is_negative_definite
from .resolution import (
    CurveGerm,
    blowup_point,
    embedded_resolution,
    intersection_matrix,
    snc_violations,
    start_tree,
)
from .scalar import Scalar, arith, ord_, parse, theta

__version__ = "0.1.0"

__all__ = [
    "ComponentReport",
    "CurveGerm",
    "DiffModule",
    "ExponentLedger",
    "ModelBlock",
    "NiceFormalModel",
    "PlaneConnection",
    "RegularityCertificate",
    "Scalar",
    "SlopeData",
    "arith",
    "assemble_nice_model",
    "blowup_point",
    "charpoly",
    "check_flatness",
    "component_report",
    "cyclic_vector",
    "embedded_resolution",
    "intersection_matrix",
    "is_negative_definite",
    "is_regular",
    "katz_rank",
    "leading_divisor",
    "lemma5_bounds",
    "newton_polygon",
    "ord_",
    "parse",
    "positivity_lemma",
    "pull_through_chart",
    "pullback_curve",
    "qspan_check",
    "ramify",
    "residue_exponents",
    "restrict_to_component",
    "saturation_oracle",
    "slope_inequality",
    "snc_violations",
    "start_tree",
    "theta",
    "to_operator",
    "varpi_projection",
    "verify_theorem",
]
