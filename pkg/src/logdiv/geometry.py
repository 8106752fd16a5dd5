"""Metric, frames, geodesics and orthogonal complements.

The Riemannian metric is handled in the mixed frame
``<d/dtheta_i, d/deta_j> = -delta_ij / Pi + alpha theta_j eta_i / Pi^2`` with
``Pi = 1 + alpha theta . eta``. As a matrix,

    G = -I / Pi + (alpha / Pi^2) eta theta^T,     <u, v> = a^T G b

for ``u = sum a_i d/dtheta_i`` and ``v = sum b_j d/deta_j``. Note the outer
product ``eta theta^T``: entry ``(i, j)`` carries ``eta_i theta_j``. The
same-frame metric is ``g = G J`` with ``J = d eta / d theta``, which agrees
with the divergence-induced metric ``-d^2 D / dtheta_i dtheta'_j``.

Primal (dual) geodesics are straight segments in ``theta`` (``eta``)
coordinates up to time reparameterization; segments here use the affine
parameterization of the flat frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .divergence import (
    Frame,
    Point,
    Potential,
    check_alpha,
    dual_coords,
    fd_jacobian,
    forward_jacobian,
    l_alpha_divergence,
    legendre_forward,
    legendre_inverse,
    primal_coords,
)
from .errors import (
    DegenerateMetricError,
    DomainError,
    FrameError,
    GeometryError,
    LogDivError,
    RankError,
)

__all__ = [
    "MetricMatrix",
    "TangentVector",
    "GeodesicSegment",
    "FiniteDifferenceWarning",
    "metric_matrix",
    "mixed_inner_product",
    "transform_jacobian",
    "convert_frame",
    "pullback_metric",
    "geodesic",
    "pythagorean_gap",
    "dual_complement_basis",
    "nullspace",
]

RANK_RTOL = 1e-12


class FiniteDifferenceWarning(UserWarning):
    """An analytic derivative was unavailable and central differences were used."""


@dataclass(frozen=True)
class MetricMatrix:
    """Mixed-frame metric matrix at a point."""

    G: np.ndarray
    Pi: float
    theta: np.ndarray
    eta: np.ndarray
    alpha: float

    @property
    def dim(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector components in the primal or dual coordinate frame.

    ``at`` holds the primal coordinates of the base point.
    """

    components: np.ndarray
    frame: Frame
    at: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))
        if self.at is not None:
            object.__setattr__(self, "at", np.asarray(self.at, dtype=float))


def metric_matrix(model: Potential, alpha, P) -> MetricMatrix:
    """Mixed-frame metric matrix ``G`` at ``P``."""
    alpha = check_alpha(alpha)
    theta = primal_coords(model, alpha, P)
    eta = dual_coords(model, alpha, P) if isinstance(P, Point) else legendre_forward(model, alpha, theta)
    Pi = 1.0 + alpha * float(theta @ eta)
    if Pi <= 1e-12:
        raise DegenerateMetricError(f"Pi = 1 + alpha theta . eta = {Pi:.3g} is not positive")
    G = -np.eye(theta.size) / Pi + (alpha / Pi**2) * np.outer(eta, theta)
    return MetricMatrix(G=G, Pi=Pi, theta=theta, eta=eta, alpha=alpha)


def _same_base(x, y):
    return x is None or y is None or np.allclose(x, y, rtol=1e-12, atol=1e-12)


def mixed_inner_product(Gm: MetricMatrix, u: TangentVector, v: TangentVector) -> float:
    """``a^T G b`` for ``u`` in the primal frame and ``v`` in the dual frame."""
    if u.frame is not Frame.PRIMAL or v.frame is not Frame.DUAL:
        raise FrameError(
            "mixed_inner_product needs u in the primal frame and v in the dual frame; "
            "use convert_frame first"
        )
    if not (_same_base(u.at, Gm.theta) and _same_base(v.at, Gm.theta)):
        raise FrameError("tangent vectors and metric live at different base points")
    return float(u.components @ Gm.G @ v.components)


def transform_jacobian(model: Potential, alpha, P) -> np.ndarray:
    """``J = d eta / d theta`` at ``P``.

    Assembled analytically from ``Dphi`` and ``D^2 phi``; falls back to central
    differences of the transform (with a :class:`FiniteDifferenceWarning`)
    when the model has no analytic Hessian.
    """
    alpha = check_alpha(alpha)
    theta = primal_coords(model, alpha, P)
    if model.has_hessian:
        return forward_jacobian(model, alpha, theta)
    warnings.warn(
        f"{model.name}: no analytic Hessian, using a finite-difference Jacobian",
        FiniteDifferenceWarning,
        stacklevel=2,
    )
    return fd_jacobian(lambda t: legendre_forward(model, alpha, t), theta)


def convert_frame(v: TangentVector, J: np.ndarray) -> TangentVector:
    """Re-express ``v`` in the other frame: ``b = J a`` or ``a = J^{-1} b``."""
    J = np.asarray(J, dtype=float)
    if v.frame is Frame.PRIMAL:
        return TangentVector(J @ v.components, Frame.DUAL, v.at)
    try:
        a = np.linalg.solve(J, v.components)
    except np.linalg.LinAlgError as exc:
        raise FrameError(f"frame conversion failed: singular Jacobian ({exc})") from exc
    return TangentVector(a, Frame.PRIMAL, v.at)


def pullback_metric(Gm: MetricMatrix, J: np.ndarray, return_defect=False):
    """Metric in the primal frame, ``g_ij = <d/dtheta_i, d/dtheta_j> = (G J)_ij``.

    Raises :class:`GeometryError` if ``G J`` is not symmetric to ``1e-8``
    (relative to its norm) or not positive definite; either signals an
    invalid potential.
    """
    g = Gm.G @ np.asarray(J, dtype=float)
    scale = max(1.0, float(np.abs(g).max()))
    defect = float(np.abs(g - g.T).max())
    if defect > 1e-8 * scale:
        raise GeometryError(f"pull-back metric not symmetric (defect {defect:.3g})")
    g = 0.5 * (g + g.T)
    lam = float(np.linalg.eigvalsh(g).min())
    if not lam > 0.0:
        raise GeometryError(f"pull-back metric not positive definite (min eigenvalue {lam:.3g})")
    return (g, defect) if return_defect else g


@dataclass(frozen=True)
class GeodesicSegment:
    """Primal or dual geodesic between two points, affine in its flat frame."""

    start: Point
    end: Point
    kind: Frame

    def coords(self, t):
        """Flat-frame coordinates at parameter(s) ``t``."""
        t = np.asarray(t, dtype=float)
        a, b = self.start.coords, self.end.coords
        return a + np.multiply.outer(t, b - a)

    def sample(self, t) -> Point:
        return Point(self.coords(float(t)), self.kind)

    @property
    def velocity(self) -> np.ndarray:
        """Initial velocity in the flat frame."""
        return self.end.coords - self.start.coords

    @property
    def length(self) -> float:
        """Euclidean length in the flat frame (zero iff the endpoints agree)."""
        return float(np.linalg.norm(self.velocity))


def _inside(model, alpha, x, kind):
    if kind is Frame.PRIMAL:
        return model.in_domain(x)
    flag = model.in_dual_domain(x)
    if flag is not None:
        return flag
    try:
        legendre_inverse(model, alpha, x)
    except LogDivError:
        return False
    return True


def geodesic(model: Potential, alpha, P, Q, kind=Frame.DUAL, checks=33) -> GeodesicSegment:
    """Geodesic from ``P`` to ``Q``; ``kind`` selects primal or dual.

    The segment is checked against the frame's domain at ``checks`` evenly
    spaced parameters; on exit a :class:`DomainError` is raised whose
    ``exit_parameter`` attribute brackets the first exit.
    """
    alpha = check_alpha(alpha)
    kind = Frame(kind)
    conv = primal_coords if kind is Frame.PRIMAL else dual_coords
    seg = GeodesicSegment(Point(conv(model, alpha, P), kind), Point(conv(model, alpha, Q), kind), kind)
    prev = 0.0
    for t in np.linspace(0.0, 1.0, max(2, int(checks))):
        if not _inside(model, alpha, seg.coords(t), kind):
            lo, hi = prev, float(t)
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if _inside(model, alpha, seg.coords(mid), kind):
                    lo = mid
                else:
                    hi = mid
            err = DomainError(f"{kind.value} geodesic leaves the domain near t={hi:.6g}")
            err.exit_parameter = hi
            raise err
        prev = float(t)
    return seg


def pythagorean_gap(model: Potential, alpha, P, Q, R):
    """Generalized Pythagorean defect at ``Q``.

    Returns ``(gap, orthogonality)`` with
    ``gap = D[Q:P] + D[R:Q] - D[R:P]`` and
    ``orthogonality = (theta_R - theta_Q)^T G(Q) (eta_P - eta_Q)``, the mixed
    inner product of the primal geodesic ``Q -> R`` and the dual geodesic
    ``Q -> P``. Here ``D[A:B] = L[theta_A : theta_B]``.
    """
    alpha = check_alpha(alpha)
    tp, tq, tr = (primal_coords(model, alpha, X) for X in (P, Q, R))
    Gq = metric_matrix(model, alpha, tq)
    ep = legendre_forward(model, alpha, tp)
    gap = (
        l_alpha_divergence(model, alpha, tq, tp)
        + l_alpha_divergence(model, alpha, tr, tq)
        - l_alpha_divergence(model, alpha, tr, tp)
    )
    orth = float((tr - tq) @ Gq.G @ (ep - Gq.eta))
    return float(gap), orth


def nullspace(M: np.ndarray, rtol=RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the right nullspace of ``M`` (SVD, relative threshold)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > rtol * s.max())) if s.size and s.max() > 0 else 0
    return Vt[rank:].T.copy()


def _matrix_rank(A, rtol=RANK_RTOL):
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > rtol * s.max())) if s.size and s.max() > 0 else 0


def dual_complement_basis(A0, Gm) -> np.ndarray:
    """Orthonormal basis of ``{b : a^T G b = 0 for all a in span(A0)}``."""
    G = Gm.G if isinstance(Gm, MetricMatrix) else np.asarray(Gm, dtype=float)
    d = G.shape[0]
    A0 = np.asarray(A0, dtype=float).reshape(d, -1)
    k = A0.shape[1]
    if k == 0:
        return np.eye(d)
    if _matrix_rank(A0) < k:
        raise RankError(f"A0 has rank {_matrix_rank(A0)} < {k} columns")
    if k == d:
        return np.zeros((d, 0))
    B0 = nullspace(A0.T @ G)
    if B0.shape[1] != d - k:
        raise RankError(f"complement has dimension {B0.shape[1]}, expected {d - k}")
    return B0
