"""BFGS with a backtracking line search that respects a feasibility predicate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    status: str  # "converged", "max_iter", "boundary", "stalled"

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def bfgs_minimize(fun, grad, x0, feasible, gtol=1e-10, max_iter=500, max_step=None, xmax=1e8,
                  boundary_patience=25):
    """Minimize ``fun`` from a feasible ``x0``.

    Trial points failing ``feasible`` are treated like a failed Armijo test,
    so iterates never leave the feasible set. ``status`` is ``"boundary"``
    when the line search is blocked by infeasibility or the iterates diverge,
    ``"stalled"`` when no decrease is possible at machine precision.
    """
    x = np.array(x0, dtype=float)
    f = float(fun(x))
    g = np.asarray(grad(x), dtype=float)
    n = x.size
    H = np.eye(n)
    scaled = False
    pressed = 0
    for it in range(max_iter):
        if np.linalg.norm(g) <= gtol:
            return MinimizeResult(x, f, g, it, "converged")
        p = -H @ g
        slope = float(g @ p)
        if not slope < 0.0:
            H = np.eye(n)
            p = -g
            slope = -float(g @ g)
        if not scaled:
            limit = max_step if max_step is not None else 1.0 + np.linalg.norm(x)
            pn = np.linalg.norm(p)
            if pn > limit:
                p *= limit / pn
                slope = float(g @ p)
        noise = 1e-13 * (1.0 + abs(f))
        lam = 1.0
        blocked = False
        accepted = False
        for _ in range(60):
            xt = x + lam * p
            if feasible(xt):
                ft = float(fun(xt))
                if np.isfinite(ft) and ft <= f + 1e-4 * lam * slope:
                    accepted = True
                    break
                # objective differences below roundoff: fall back on the gradient
                if np.isfinite(ft) and ft <= f + noise and (
                    np.linalg.norm(grad(xt)) < np.linalg.norm(g)
                ):
                    accepted = True
                    break
            else:
                blocked = True
            lam *= 0.5
        if not accepted:
            status = "boundary" if blocked else "stalled"
            return MinimizeResult(x, f, g, it, status)
        # consecutive steps cut short by infeasibility: sliding along the boundary
        pressed = pressed + 1 if blocked else 0
        if pressed >= boundary_patience:
            return MinimizeResult(xt, ft, np.asarray(grad(xt), dtype=float), it + 1, "boundary")
        gt = np.asarray(grad(xt), dtype=float)
        s = xt - x
        yv = gt - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            if not scaled:
                H = np.eye(n) * (sy / float(yv @ yv))
                scaled = True
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, yv)
            H = V @ H @ V.T + rho * np.outer(s, s)
        x, f, g = xt, ft, gt
        if np.linalg.norm(x) > xmax:
            return MinimizeResult(x, f, g, it + 1, "boundary")
    status = "converged" if np.linalg.norm(g) <= gtol else "max_iter"
    return MinimizeResult(x, f, g, max_iter, status)
