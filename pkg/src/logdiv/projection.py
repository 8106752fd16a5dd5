"""Primal and dual projections onto autoparallel (flat) submanifolds.

A primal-flat submanifold ``E`` is an affine set in ``theta`` coordinates and
a dual-flat ``M`` is affine in ``eta`` coordinates; both are represented by
:class:`AffineSubspace`. The dual projection of ``P`` onto ``E`` minimizes
``D[Q : P]`` over ``Q`` in ``E``; at the minimizer the dual geodesic
``Q* -> P`` meets ``E`` orthogonally, i.e.
``a^T G(Q*) (eta_P - eta_Q*) = 0`` for every direction ``a`` of ``E``. That
residual certifies every returned solution.

The objective is minimized over subspace coordinates ``t`` with BFGS and a
line search that keeps iterates inside the domain, from several starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ._optimize import bfgs_minimize
from ._parallel import parallel_map
from .divergence import (
    Frame,
    Point,
    Potential,
    check_alpha,
    legendre_forward,
    legendre_inverse,
    primal_coords,
    dual_coords,
)
from .errors import (
    BoundaryError,
    ConvergenceError,
    LogDivError,
    ParameterError,
    PreconditionError,
)
from .geometry import dual_complement_basis, metric_matrix

__all__ = [
    "AffineSubspace",
    "ProjectionConfig",
    "ProjectionResult",
    "LeafAssignment",
    "dual_project",
    "primal_project",
    "dual_complement_at",
    "leaf_assign",
    "leaf_ids",
]


@dataclass(frozen=True)
class AffineSubspace:
    """``{base + basis @ t}`` in one coordinate frame; ``basis`` is orthonormal."""

    frame: Frame
    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        base = np.array(self.base, dtype=float).reshape(-1)
        basis = np.array(self.basis, dtype=float).reshape(base.size, -1)
        if basis.shape[1] > base.size:
            raise ParameterError("subspace dimension exceeds ambient dimension")
        if np.abs(basis.T @ basis - np.eye(basis.shape[1])).max(initial=0.0) > 1e-12:
            raise ParameterError("basis columns must be orthonormal (see AffineSubspace.spanning)")
        object.__setattr__(self, "frame", Frame(self.frame))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def spanning(cls, frame, base, directions):
        """Subspace through ``base`` spanned by the columns of ``directions``."""
        base = np.asarray(base, dtype=float).reshape(-1)
        D = np.asarray(directions, dtype=float).reshape(base.size, -1)
        if D.shape[1] == 0:
            return cls(frame, base, D)
        U, s, _ = np.linalg.svd(D, full_matrices=False)
        if s.min() <= 1e-12 * s.max():
            raise ParameterError("directions are linearly dependent")
        return cls(frame, base, U)

    @classmethod
    def through(cls, frame, points):
        """Smallest affine subspace through the given points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls.spanning(frame, pts[0], (pts[1:] - pts[0]).T)

    @property
    def d(self) -> int:
        return self.base.size

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def point(self, t) -> np.ndarray:
        return self.base + self.basis @ np.asarray(t, dtype=float).reshape(self.k)

    def coordinates(self, x) -> np.ndarray:
        """Least-squares subspace coordinates of ``x``."""
        return self.basis.T @ (np.asarray(x, dtype=float) - self.base)

    def distance(self, x) -> float:
        """Euclidean distance of ``x`` from the affine set."""
        r = np.asarray(x, dtype=float) - self.base
        return float(np.linalg.norm(r - self.basis @ (self.basis.T @ r)))

    def with_basis(self, basis) -> "AffineSubspace":
        return AffineSubspace(self.frame, self.base, basis)


@dataclass
class ProjectionConfig:
    """Solver settings shared by the projection routines."""

    tol: float = 1e-8
    gtol: float = 1e-10
    max_iter: int = 500
    n_starts: int = 3
    seed: int = 0
    start_scale: float = 1.0


@dataclass
class ProjectionResult:
    point: Point
    coordinates_in_subspace: np.ndarray
    divergence: float
    orthogonality_residual: float
    converged: bool
    iterations: int
    status: str = "converged"
    multistart_spread: float = 0.0
    starts: int = 1


def _starts(sub, x_flat, feasible, config, initial):
    """Feasible starting coordinates: supplied, base, least squares, random."""
    k = sub.k
    cands = []
    if initial is not None:
        cands.append(np.asarray(initial, dtype=float).reshape(k))
    cands.append(np.zeros(k))
    cands.append(sub.coordinates(x_flat))
    out = []
    for t in cands:
        if feasible(t) and not any(np.allclose(t, s, rtol=0, atol=1e-14) for s in out):
            out.append(t)
        if len(out) >= config.n_starts:
            return out
    rng = np.random.default_rng(config.seed)
    anchor = out[0] if out else sub.coordinates(x_flat)
    tries = 0
    while len(out) < config.n_starts and tries < 200:
        tries += 1
        t = anchor + config.start_scale * rng.standard_normal(k)
        for _ in range(30):
            if feasible(t):
                out.append(t)
                break
            t = anchor + 0.5 * (t - anchor)
    if not out:
        raise BoundaryError("the subspace has no feasible point near the projected point")
    return out


def _solve(sub, objective, gradient, feasible, residual, to_point, x_flat, config, initial):
    config = config or ProjectionConfig()
    if sub.k == 0:
        t = np.zeros(0)
        if not feasible(t):
            raise BoundaryError("zero-dimensional subspace lies outside the domain")
        return ProjectionResult(to_point(t), t, float(objective(t)), 0.0, True, 0)
    runs = []
    for t0 in _starts(sub, x_flat, feasible, config, initial):
        res = bfgs_minimize(
            objective, gradient, t0, feasible, gtol=config.gtol, max_iter=config.max_iter
        )
        runs.append(res)
    best = min(runs, key=lambda r: r.fun)
    rho = float(residual(best.x))
    good = [r for r in runs if r.converged or r.status == "stalled"]
    spread = max((float(np.linalg.norm(r.x - best.x)) for r in good), default=0.0)
    result = ProjectionResult(
        point=to_point(best.x),
        coordinates_in_subspace=best.x,
        divergence=float(best.fun),
        orthogonality_residual=rho,
        converged=rho <= config.tol,
        iterations=sum(r.iterations for r in runs),
        status=best.status,
        multistart_spread=spread,
        starts=len(runs),
    )
    if not result.converged:
        if best.status == "boundary":
            raise BoundaryError(
                "minimizing sequence approaches the domain boundary; the infimum may not be attained",
                residual=rho,
                result=result,
            )
        raise ConvergenceError(
            f"projection did not converge (status {best.status}, residual {rho:.3g})",
            residual=rho,
            result=result,
        )
    return result


def dual_project(model: Potential, alpha, E: AffineSubspace, P, config=None, initial=None):
    """Dual projection: ``argmin_{Q in E} D[Q : P]`` for ``E`` affine in ``theta``."""
    alpha = check_alpha(alpha)
    if E.frame is not Frame.PRIMAL:
        raise ParameterError("dual_project needs a subspace in the primal frame")
    theta_p = primal_coords(model, alpha, P)
    eta_p = dual_coords(model, alpha, P) if isinstance(P, Point) else legendre_forward(model, alpha, theta_p)
    gp = model.gradient(theta_p)
    phi_p = model.value(theta_p)

    def arg(theta):
        return 1.0 + alpha * float(gp @ (theta - theta_p))

    def feasible(t):
        theta = E.point(t)
        return model.in_domain(theta) and arg(theta) > 0.0

    def objective(t):
        theta = E.point(t)
        return np.log(arg(theta)) / alpha - model.value(theta) + phi_p

    def gradient(t):
        theta = E.point(t)
        return E.basis.T @ (gp / arg(theta) - model.gradient(theta))

    def residual(t):
        theta = E.point(t)
        Gm = metric_matrix(model, alpha, theta)
        return float(np.abs(E.basis.T @ Gm.G @ (eta_p - Gm.eta)).max(initial=0.0))

    def to_point(t):
        return Point(E.point(t), Frame.PRIMAL)

    return _solve(E, objective, gradient, feasible, residual, to_point, theta_p, config, initial)


def primal_project(model: Potential, alpha, M: AffineSubspace, P, config=None, initial=None):
    """Primal projection: ``argmin_{Q in M} D[P : Q]`` for ``M`` affine in ``eta``."""
    alpha = check_alpha(alpha)
    if M.frame is not Frame.DUAL:
        raise ParameterError("primal_project needs a subspace in the dual frame")
    theta_p = primal_coords(model, alpha, P)
    eta_p = dual_coords(model, alpha, P) if isinstance(P, Point) else legendre_forward(model, alpha, theta_p)
    phi_p = model.value(theta_p)
    cache = {}

    def theta_of(t):
        key = tuple(np.asarray(t, dtype=float).tolist())
        if key not in cache:
            try:
                cache[key] = legendre_inverse(model, alpha, M.point(t))
            except LogDivError:
                cache[key] = None
            if len(cache) > 64:
                cache.pop(next(iter(cache)))
        return cache[key]

    def feasible(t):
        theta = theta_of(t)
        if theta is None or not model.in_domain(theta):
            return False
        return 1.0 + alpha * float(model.gradient(theta) @ (theta_p - theta)) > 0.0

    def objective(t):
        theta = theta_of(t)
        x = alpha * float(model.gradient(theta) @ (theta_p - theta))
        return np.log1p(x) / alpha - phi_p + model.value(theta)

    def gradient(t):
        eta = M.point(t)
        theta = theta_of(t)
        return M.basis.T @ (
            theta_p / (1.0 + alpha * float(theta_p @ eta)) - theta / (1.0 + alpha * float(theta @ eta))
        )

    def residual(t):
        eta = M.point(t)
        theta = theta_of(t)
        Pi = 1.0 + alpha * float(theta @ eta)
        G = -np.eye(theta.size) / Pi + (alpha / Pi**2) * np.outer(eta, theta)
        return float(np.abs((theta_p - theta) @ G @ M.basis).max(initial=0.0))

    def to_point(t):
        return Point(M.point(t), Frame.DUAL)

    return _solve(M, objective, gradient, feasible, residual, to_point, eta_p, config, initial)


def dual_complement_at(model: Potential, alpha, E: AffineSubspace, P0) -> AffineSubspace:
    """The dual-flat ``M(P0)`` through ``P0`` meeting ``E`` orthogonally."""
    alpha = check_alpha(alpha)
    if E.frame is not Frame.PRIMAL:
        raise ParameterError("dual_complement_at needs a subspace in the primal frame")
    theta0 = primal_coords(model, alpha, P0)
    dist = E.distance(theta0)
    if dist > 1e-10 * (1.0 + np.linalg.norm(theta0)):
        raise PreconditionError(f"P0 is not on E (distance {dist:.3g})")
    Gm = metric_matrix(model, alpha, theta0)
    return AffineSubspace(Frame.DUAL, Gm.eta, dual_complement_basis(E.basis, Gm))


def membership_residual(M: AffineSubspace, eta) -> float:
    """Distance of ``eta`` from the dual-flat ``M`` in ``eta`` coordinates."""
    return M.distance(eta)


@dataclass
class LeafAssignment:
    point: Point
    leaf_base: Optional[Point]
    membership_residual: float
    projection: Optional[ProjectionResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def leaf_assign(model: Potential, alpha, E: AffineSubspace, points, config=None, workers=None) -> List[LeafAssignment]:
    """Assign each point to the leaf ``M(P0)`` of the dual foliation along ``E``.

    ``P0`` is the dual projection of the point onto ``E``; the residual is the
    distance of ``eta_P`` from ``M(P0)``. Failures are recorded per point.
    """
    alpha = check_alpha(alpha)

    def one(P):
        P = P if isinstance(P, Point) else Point(P, Frame.PRIMAL)
        try:
            res = dual_project(model, alpha, E, P, config)
            M = dual_complement_at(model, alpha, E, res.point)
            rho = membership_residual(M, dual_coords(model, alpha, P))
            return LeafAssignment(P, res.point, rho, res)
        except LogDivError as exc:
            return LeafAssignment(P, None, float("nan"), getattr(exc, "result", None), f"{type(exc).__name__}: {exc}")

    return parallel_map(one, points, workers)


def leaf_ids(assignments, tol=1e-6) -> List[int]:
    """Integer leaf labels; points whose leaf bases agree to ``tol`` share a label.

    Failed assignments get ``-1``.
    """
    bases = []
    ids = []
    for a in assignments:
        if a.leaf_base is None:
            ids.append(-1)
            continue
        c = a.leaf_base.coords
        for j, b in enumerate(bases):
            if np.linalg.norm(c - b) <= tol * (1.0 + np.linalg.norm(b)):
                ids.append(j)
                break
        else:
            bases.append(c)
            ids.append(len(bases) - 1)
    return ids
