"""Hausdorff contents, Choquet integrals and content-based maximal and Riesz operators on dyadic grids."""

__version__ = "0.1.0"

from .choquet import (  # noqa: E402
    DistributionFunction,
    choquet_integral,
    choquet_integral_power,
    distribution,
    quasi_norm,
)
from .content import (  # noqa: E402
    ContentParams,
    ContentResult,
    ball_content_exact_small,
    ball_content_upper,
    comparability_bracket,
    dyadic_content,
)
from .geometry import Ball, DyadicCube, GridFunction, GridSet  # noqa: E402
from .operators import (  # noqa: E402
    OperatorResult,
    RadiusLadder,
    classical_maximal,
    classical_riesz,
    maximal_centered,
    maximal_sharp,
    maximal_uncentered,
    riesz_potential,
)

__all__ = [
    "Ball",
    "ContentParams",
    "ContentResult",
    "DistributionFunction",
    "DyadicCube",
    "GridFunction",
    "GridSet",
    "OperatorResult",
    "RadiusLadder",
    "ball_content_exact_small",
    "ball_content_upper",
    "choquet_integral",
    "choquet_integral_power",
    "classical_maximal",
    "classical_riesz",
    "comparability_bracket",
    "distribution",
    "dyadic_content",
    "maximal_centered",
    "maximal_sharp",
    "maximal_uncentered",
    "quasi_norm",
    "riesz_potential",
]
