"""Dimension reduction with logarithmic divergences.

Given data ``y(1..N)`` in the data space ``Omega`` of a potential ``psi`` and
a target dimension ``k``, find a ``k``-dimensional affine set ``A`` in the
parameter space ``Theta`` and points ``theta(i)`` in ``A`` minimizing

    sum_i L_psi[y(i) : eta(i)],      eta(i) = T(theta(i)),

where ``theta = T^{-1}(eta)`` is the alpha-Legendre transform of ``psi``. For a
fixed ``A`` the inner problem is solved per point by projecting ``y(i)`` onto
``E = T(A)`` (the dual geodesic from ``y(i)`` to ``eta(i)`` is then
orthogonal to ``E``); the outer problem moves ``A`` with BFGS while the
within-subspace coordinates are held fixed. Each half step is accepted only
if it does not increase the objective, so the recorded trace is monotone.

Parameter-space subspaces carry ``Frame.PRIMAL`` (they live in ``Theta``).
Internally ``Theta`` is the dual frame of ``psi``, so projections are
:func:`~logdiv.projection.primal_project` calls with ``psi`` as the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ._optimize import bfgs_minimize
from ._parallel import parallel_map
from .dirichlet import check_simplex, ilr, ilr_inverse
from .divergence import Frame, Potential, check_alpha, legendre_forward, legendre_inverse
from .errors import ConvergenceError, DomainError, LogDivError, ParameterError
from .projection import AffineSubspace, ProjectionConfig, primal_project

__all__ = [
    "PcaConfig",
    "PcaFit",
    "fit",
    "objective",
    "init_subspace",
    "point_divergence",
    "AitchisonPca",
    "aitchison_pca_baseline",
]


@dataclass
class PcaConfig:
    k: int = 1
    alpha: float = 1.0
    max_outer_iters: int = 200
    inner_tol: float = 1e-8
    outer_tol: float = 1e-9
    n_restarts: int = 5
    seed: int = 0
    outer_steps: int = 20
    workers: Optional[int] = None

    def projection_config(self, n_starts=3) -> ProjectionConfig:
        return ProjectionConfig(tol=self.inner_tol, n_starts=n_starts, seed=self.seed)


@dataclass
class PcaFit:
    subspace: AffineSubspace
    theta: np.ndarray
    eta: np.ndarray
    coordinates: np.ndarray
    objective: float
    objective_trace: List[float]
    converged: bool
    residuals: np.ndarray
    restart: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))


def _as_data(model, data):
    Y = np.atleast_2d(np.asarray(data, dtype=float))
    if Y.shape[1] != model.dim:
        raise DomainError(f"data has {Y.shape[1]} columns, expected {model.dim}")
    for i, y in enumerate(Y):
        if not model.in_domain(y):
            raise DomainError(f"data point {i} ({y.tolist()}) lies outside the data space")
    return Y


def _to_internal(sub: AffineSubspace) -> AffineSubspace:
    return AffineSubspace(Frame.DUAL, sub.base, sub.basis)


def _to_params(sub: AffineSubspace) -> AffineSubspace:
    return AffineSubspace(Frame.PRIMAL, sub.base, sub.basis)


def point_divergence(model: Potential, alpha, y, theta) -> float:
    """``L_psi[y : T(theta)]``; ``inf`` if ``theta`` is outside the parameter space."""
    try:
        eta = legendre_inverse(model, alpha, theta)
    except LogDivError:
        return np.inf
    x = alpha * float(model.gradient(eta) @ (y - eta))
    if not model.in_domain(eta) or not x > -1.0:
        return np.inf
    return float(np.log1p(x) / alpha - (model.value(y) - model.value(eta)))


def _point_gradient(model, alpha, y, theta):
    eta = legendre_inverse(model, alpha, theta)
    return y / (1.0 + alpha * float(y @ theta)) - eta / (1.0 + alpha * float(eta @ theta))


def init_subspace(model: Potential, data, k, strategy="euclidean-pca", alpha=1.0, seed=0) -> AffineSubspace:
    """Starting subspace in parameter coordinates.

    ``"euclidean-pca"``: mean and top-``k`` principal directions of the data
    mapped to ``Theta``. ``"random"``: a seeded random orthonormal basis
    through the same mean.
    """
    alpha = check_alpha(alpha)
    Y = _as_data(model, data)
    d = model.dim
    if not 1 <= int(k) <= d:
        raise ParameterError(f"k must lie in [1, {d}]")
    k = int(k)
    thetas = []
    for i, y in enumerate(Y):
        try:
            thetas.append(legendre_forward(model, alpha, y))
        except LogDivError as exc:
            raise DomainError(f"cannot map data point {i} to parameter space: {exc}") from exc
    Th = np.array(thetas)
    base = Th.mean(axis=0)
    if strategy == "euclidean-pca":
        _, _, Vt = np.linalg.svd(Th - base, full_matrices=True)
        basis = Vt[:k].T
    elif strategy == "random":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        basis, _ = np.linalg.qr(rng.standard_normal((d, k)))
    else:
        raise ParameterError(f"unknown initialization strategy {strategy!r}")
    return AffineSubspace.spanning(Frame.PRIMAL, base, basis)


def _project_all(model, alpha, sub, Y, pconf, initial=None, workers=None):
    inner = _to_internal(sub)

    def one(i):
        init = None if initial is None else initial[i]
        try:
            return primal_project(model, alpha, inner, Y[i], pconf, initial=init)
        except LogDivError as exc:
            res = getattr(exc, "result", None)
            if res is None:
                raise
            return res

    return parallel_map(one, range(len(Y)), workers)


def objective(model: Potential, alpha, subspace: AffineSubspace, data, config=None) -> float:
    """Total projected divergence of the data onto ``T(subspace)``.

    Points are summed in index order.
    """
    alpha = check_alpha(alpha)
    Y = _as_data(model, data)
    results = _project_all(model, alpha, subspace, Y, config or ProjectionConfig())
    return float(sum(r.divergence for r in results))


def _outer_step(model, alpha, sub, T, Y, max_iter):
    """BFGS on (base, directions) with the subspace coordinates ``T`` fixed."""
    d, k = sub.d, sub.k
    N = len(Y)

    def unpack(x):
        return x[:d], x[d:].reshape(d, k)

    def thetas(x):
        base, W = unpack(x)
        return base + T @ W.T

    def fun(x):
        Th = thetas(x)
        return float(sum(point_divergence(model, alpha, Y[i], Th[i]) for i in range(N)))

    def feasible(x):
        # infeasible trial points evaluate to inf and fail the Armijo test
        return True

    def grad(x):
        Th = thetas(x)
        Gs = np.array([_point_gradient(model, alpha, Y[i], Th[i]) for i in range(N)])
        return np.concatenate([Gs.sum(axis=0), (Gs.T @ T).ravel()])

    x0 = np.concatenate([sub.base, sub.basis.ravel()])
    res = bfgs_minimize(fun, grad, x0, feasible, gtol=1e-12, max_iter=max_iter)
    base, W = unpack(res.x)
    return base, W, res.fun


def _reparameterize(base, W, T):
    """Orthonormalize directions and centre coordinates; the points are unchanged."""
    Q, R = np.linalg.qr(W)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q, R = Q * signs, R * signs[:, None]
    Tn = T @ R.T
    shift = Tn.mean(axis=0)
    return base + Q @ shift, Q, Tn - shift


def _fit_once(model, alpha, Y, sub, config, restart):
    pconf = config.projection_config()
    warm = replace(pconf, n_starts=1)
    results = _project_all(model, alpha, sub, Y, pconf, workers=config.workers)
    T = np.array([r.coordinates_in_subspace for r in results])
    losses = np.array([r.divergence for r in results])
    total = float(losses.sum())
    trace = [total]
    converged = False
    for _ in range(config.max_outer_iters):
        prev = total
        # outer half step
        base, W, f_outer = _outer_step(model, alpha, sub, T, Y, config.outer_steps)
        if f_outer <= total and np.linalg.matrix_rank(W) == sub.k:
            base, Q, T_new = _reparameterize(base, W, T)
            cand = AffineSubspace(Frame.PRIMAL, base, Q)
            th = cand.base + T_new @ cand.basis.T
            new_losses = np.array([point_divergence(model, alpha, Y[i], th[i]) for i in range(len(Y))])
            if new_losses.sum() <= total:
                sub, T, losses = cand, T_new, new_losses
                total = float(losses.sum())
        # inner half step, warm-started; keep the old point where it was better
        results = _project_all(model, alpha, sub, Y, warm, initial=T, workers=config.workers)
        for i, r in enumerate(results):
            if r.divergence <= losses[i]:
                T[i] = r.coordinates_in_subspace
                losses[i] = r.divergence
        total = float(losses.sum())
        trace.append(total)
        if prev - total <= config.outer_tol * max(abs(prev), 1e-300):
            converged = True
            break

    # final certification with fresh multi-start projections
    results = _project_all(model, alpha, sub, Y, pconf, initial=T, workers=config.workers)
    for i, r in enumerate(results):
        if r.divergence <= losses[i]:
            T[i] = r.coordinates_in_subspace
            losses[i] = r.divergence
    final = float(losses.sum())
    if final < trace[-1]:
        trace.append(final)
    residuals = np.array([r.orthogonality_residual for r in results])
    theta = sub.base + T @ sub.basis.T
    eta = np.array([legendre_inverse(model, alpha, t) for t in theta])
    return PcaFit(
        subspace=sub,
        theta=theta,
        eta=eta,
        coordinates=T,
        objective=trace[-1],
        objective_trace=trace,
        converged=converged and bool(np.all(residuals <= config.inner_tol)),
        residuals=residuals,
        restart=restart,
    )


def fit(model: Potential, data, config: Optional[PcaConfig] = None) -> PcaFit:
    """Fit a ``k``-dimensional affine parameter subspace to the data.

    Restart 0 starts from ``init_subspace(..., "euclidean-pca")``; the other
    ``n_restarts - 1`` start from random directions with seeds spawned from
    ``config.seed``. The best objective wins; near-ties (within ``1e-8``)
    between distinct subspaces are flagged in ``diagnostics``.
    """
    config = config or PcaConfig()
    alpha = check_alpha(config.alpha)
    Y = _as_data(model, data)
    d = model.dim
    if not 1 <= config.k <= d:
        raise ParameterError(f"k must lie in [1, {d}]")

    if config.k == d:
        theta = np.array([legendre_forward(model, alpha, y) for y in Y])
        sub = AffineSubspace(Frame.PRIMAL, theta.mean(axis=0), np.eye(d))
        return PcaFit(
            subspace=sub,
            theta=theta,
            eta=Y.copy(),
            coordinates=theta - sub.base,
            objective=0.0,
            objective_trace=[0.0],
            converged=True,
            residuals=np.zeros(len(Y)),
        )

    seeds = np.random.SeedSequence(config.seed).spawn(max(1, config.n_restarts))
    fits, failures = [], []
    for r in range(max(1, config.n_restarts)):
        strategy = "euclidean-pca" if r == 0 else "random"
        try:
            sub = init_subspace(model, Y, config.k, strategy, alpha, np.random.default_rng(seeds[r]))
            fits.append(_fit_once(model, alpha, Y, sub, config, r))
        except LogDivError as exc:
            failures.append(f"restart {r}: {type(exc).__name__}: {exc}")
    if not fits:
        raise ConvergenceError("all restarts failed: " + "; ".join(failures))
    fits.sort(key=lambda f: (f.objective, f.restart))
    best = fits[0]
    ties = [
        f.restart
        for f in fits[1:]
        if f.objective - best.objective <= 1e-8
        and _principal_angle(f.subspace.basis, best.subspace.basis) > 1e-6
    ]
    best.diagnostics = {
        "restart_objectives": {f.restart: f.objective for f in fits},
        "near_ties": ties,
        "failures": failures,
    }
    if not any(f.converged for f in fits):
        raise ConvergenceError(
            "no restart converged", residual=best.max_residual, result=best
        )
    return best


def _principal_angle(A, B) -> float:
    from scipy.linalg import subspace_angles

    return float(np.max(subspace_angles(A, B), initial=0.0))


@dataclass
class AitchisonPca:
    """Classical PCA in ilr coordinates."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    scores: np.ndarray
    residuals: np.ndarray

    def curve(self, n_points=200, extend=0.2, component=0) -> np.ndarray:
        """Compositions along one principal axis, covering the score range."""
        s = self.scores[:, component] if self.scores.size else np.zeros(1)
        lo, hi = float(s.min(initial=0.0)), float(s.max(initial=0.0))
        pad = extend * (hi - lo)
        grid = np.linspace(lo - pad, hi + pad, int(n_points))
        return ilr_inverse(self.mean + np.outer(grid, self.components[component]))


def aitchison_pca_baseline(data, k=1) -> AitchisonPca:
    """Mean and top-``k`` eigenvectors of the ilr covariance (``ddof=1``)."""
    P = check_simplex(np.atleast_2d(data))
    Z = ilr(P)
    mean = Z.mean(axis=0)
    Zc = Z - mean
    m = Z.shape[1]
    if not 1 <= int(k) <= m:
        raise ParameterError(f"k must lie in [1, {m}]")
    cov = Zc.T @ Zc / max(len(Z) - 1, 1)
    w, V = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1][: int(k)]
    comps = V[:, order].T
    scores = Zc @ comps.T
    resid = np.linalg.norm(Zc - scores @ comps, axis=1)
    return AitchisonPca(mean, comps, np.maximum(w[order], 0.0), scores, resid)
