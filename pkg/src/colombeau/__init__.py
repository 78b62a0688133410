"""Numerical laboratory for the Colombeau algebra of generalized functions on R.

Builds moment-vanishing mollifier classes, embeds distributions and smooth
functions as function-valued functionals, combines them with sums, products
and derivatives, and measures their behavior under test-function scaling to
produce empirical moderate/null/equivalence verdicts.
"""

from .asymptotics import (
    BoundWitness,
    ClassificationReport,
    EpsSchedule,
    OrderEstimate,
    check_bound,
    classify,
    default_bases,
    equivalent,
    estimate_order,
    sup_norm,
)
from .exprlang import FunctionRegistry, ParseError, dag_to_text, parse, to_dag
from .genfunc import (
    DeltaBar,
    Derivative,
    EvaluationError,
    HeavisideBar,
    NullExample,
    Product,
    RegularBar,
    Scalar,
    Sum,
    Tilde,
    evaluate,
    evaluate_derivative,
    evaluate_grid,
)
from .jets import (
    Bump,
    Exponential,
    Gaussian,
    Jet,
    Polynomial,
    Sine,
    SmoothPrimitive,
    TanhScaled,
    eval_jet,
    jet_arith,
)
from .mollifier import (
    ConstructionError,
    ScaledTestFunction,
    TestFunction,
    construct_Aq,
    make_bump,
    moments,
    scale,
    translate,
)
from .quadrature import Integrand, QuadResult, QuadratureError, integrate

__version__ = "0.1.0"

__all__ = [
    "BoundWitness",
    "Bump",
    "ClassificationReport",
    "ConstructionError",
    "DeltaBar",
    "Derivative",
    "EpsSchedule",
    "EvaluationError",
    "Exponential",
    "FunctionRegistry",
    "Gaussian",
    "HeavisideBar",
    "Integrand",
    "Jet",
    "NullExample",
    "OrderEstimate",
    "ParseError",
    "Polynomial",
    "Product",
    "QuadResult",
    "QuadratureError",
    "RegularBar",
    "Scalar",
    "ScaledTestFunction",
    "Sine",
    "SmoothPrimitive",
    "Sum",
    "TanhScaled",
    "TestFunction",
    "Tilde",
    "check_bound",
    "classify",
    "construct_Aq",
    "dag_to_text",
    "default_bases",
    "equivalent",
    "estimate_order",
    "eval_jet",
    "evaluate",
    "evaluate_derivative",
    "evaluate_grid",
    "integrate",
    "jet_arith",
    "make_bump",
    "moments",
    "parse",
    "scale",
    "sup_norm",
    "to_dag",
    "translate",
]
