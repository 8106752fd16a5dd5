"""Geometry of logarithmic divergences and divergence-based PCA.

Submodules
----------
divergence  potentials, L-alpha divergences, alpha-Legendre duality
geometry    mixed-frame metric, frame changes, geodesics, dual complements
projection  primal/dual projections and the dual foliation
pca         alternating solver for PCA with logarithmic divergences
dirichlet   Dirichlet transport cost, simplex charts, Aitchison utilities
cli         command line front end (``logdiv``)
"""

from .divergence import (
    Frame,
    Point,
    Potential,
    alpha_conjugate_value,
    bregman_divergence,
    conjugate_potential,
    l_alpha_divergence,
    legendre_forward,
    legendre_inverse,
    self_dual_check,
    validate_potential,
)
from .dirichlet import DirichletInstance, dirichlet_cost
from .errors import (
    BoundaryError,
    ConvergenceError,
    DegenerateMetricError,
    DomainError,
    FrameError,
    GeometryError,
    LogDivError,
    ParameterError,
    PreconditionError,
    RankError,
    SingularTransformError,
)
from .geometry import (
    TangentVector,
    convert_frame,
    dual_complement_basis,
    geodesic,
    metric_matrix,
    mixed_inner_product,
    pullback_metric,
    pythagorean_gap,
    transform_jacobian,
)
from .pca import PcaConfig, PcaFit, aitchison_pca_baseline, fit
from .projection import (
    AffineSubspace,
    ProjectionConfig,
    dual_complement_at,
    dual_project,
    leaf_assign,
    primal_project,
)

__all__ = [
    "AffineSubspace",
    "aitchison_pca_baseline",
    "alpha_conjugate_value",
    "BoundaryError",
    "bregman_divergence",
    "conjugate_potential",
    "ConvergenceError",
    "convert_frame",
    "DegenerateMetricError",
    "dirichlet_cost",
    "DirichletInstance",
    "DomainError",
    "dual_complement_at",
    "dual_complement_basis",
    "dual_project",
    "fit",
    "Frame",
    "FrameError",
    "geodesic",
    "GeometryError",
    "l_alpha_divergence",
    "leaf_assign",
    "legendre_forward",
    "legendre_inverse",
    "LogDivError",
    "metric_matrix",
    "mixed_inner_product",
    "ParameterError",
    "PcaConfig",
    "PcaFit",
    "Point",
    "Potential",
    "PreconditionError",
    "primal_project",
    "ProjectionConfig",
    "pullback_metric",
    "pythagorean_gap",
    "RankError",
    "self_dual_check",
    "SingularTransformError",
    "TangentVector",
    "transform_jacobian",
    "validate_potential",
]

__version__ = "0.1.0"
