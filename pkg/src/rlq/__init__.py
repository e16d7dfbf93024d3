"""Lambda-quantiles and their worst/best values over uncertainty sets."""

from rlq.curves import MonotoneCurve, StepCurve, evaluate, generalized_inverse
from rlq.distributions import parse_distribution
from rlq.errors import DivergenceError, InvalidInputError, NumericalFailure, PreconditionError, RLQError
from rlq.lambda_core import QuantileKind, StepLambda, all_quantiles, lambda_quantile
from rlq.robust_engine import (
    EnvelopeSet,
    Exactness,
    FiniteSet,
    RobustResult,
    extremal_curve,
    parse_set,
    robust_lambda_quantile,
    robust_quantile,
)

__all__ = [
    "DivergenceError", "EnvelopeSet", "Exactness", "FiniteSet", "InvalidInputError", "MonotoneCurve",
    "NumericalFailure", "PreconditionError", "QuantileKind", "RLQError", "RobustResult", "StepCurve",
    "StepLambda", "all_quantiles", "evaluate", "extremal_curve", "generalized_inverse", "lambda_quantile",
    "parse_distribution", "parse_set", "robust_lambda_quantile", "robust_quantile",
]

__version__ = "0.1.0"
