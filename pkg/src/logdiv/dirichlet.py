"""Dirichlet transport cost on the open simplex.

For compositions ``p, q`` in the open simplex ``Delta_n``

.. math::

    c(p, q) = \\log\\Big(\\frac{1}{n}\\sum_i \\frac{q_i}{p_i}\\Big)
              - \\frac{1}{n}\\sum_i \\log\\frac{q_i}{p_i},

the negative log-likelihood (up to constants) of the Dirichlet perturbation
model ``Q = p (+) D``. With the chart ``eta_i = p_i / p_n`` and
``y_i = q_i / q_n`` (``i = 1..d``, ``d = n - 1``) it is the ``alpha = 1``
logarithmic divergence ``L_psi[y : eta]`` of ``psi(y) = (1/n) sum_i log y_i``
on the positive orthant. The transform pair is reciprocal,
``theta_i = 1 / eta_i = p_n / p_i``.

Any fixed reference index gives an equivalent chart; the last component is
used throughout.

ilr coordinates use the Helmert contrast basis returned by
``scipy.linalg.helmert(n)`` (rows ``i = 1..n-1``):
``V[i-1, j] = 1/sqrt(i(i+1))`` for ``j < i``, ``-i/sqrt(i(i+1))`` for
``j = i`` and ``0`` otherwise, so ``ilr(p) = V @ log(p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import helmert

from .divergence import Potential, check_alpha
from .errors import DomainError, ParameterError

__all__ = [
    "log_potential",
    "DirichletInstance",
    "closure",
    "check_simplex",
    "simplex_to_data",
    "data_to_simplex",
    "dirichlet_cost",
    "sample_perturbation",
    "aitchison_perturb",
    "ilr_basis",
    "ilr",
    "ilr_inverse",
]

SIMPLEX_TOL = 1e-12


def log_potential(n: int, name: str = "dirichlet") -> Potential:
    """``(1/n) sum_{i<=d} log x_i`` on ``(0, inf)^d`` with ``d = n - 1``.

    Serves as both ``phi`` (on ``Theta``) and ``psi`` (on ``Omega``) of the
    Dirichlet instance. The registered inverse transform is
    ``theta_i = 1 / ((n - alpha d) eta_i)``, which is the reciprocal map at
    ``alpha = 1``.
    """
    n = int(n)
    if n < 2:
        raise ParameterError("simplex dimension n must be at least 2")
    d = n - 1

    def value(x):
        return np.log(x).sum() / n

    def gradient(x):
        return 1.0 / (n * x)

    def hessian(x):
        return np.diag(-1.0 / (n * x * x))

    def domain(x):
        return bool(np.all(x > 0.0))

    def inverse(eta, alpha):
        scale = n - alpha * d
        if scale == 0.0:
            return None
        if not np.all(scale * eta > 0.0):
            raise DomainError(f"eta={eta.tolist()} lies outside the range of the transform")
        return 1.0 / (scale * eta)

    return Potential(d, value, gradient, hessian, domain=domain, inverse=inverse, name=name)


@dataclass
class DirichletInstance:
    """The potential pair of the Dirichlet cost on ``Delta_n``."""

    n: int
    alpha: float = 1.0
    psi: Potential = field(init=False, repr=False)
    phi: Potential = field(init=False, repr=False)

    def __post_init__(self):
        self.n = int(self.n)
        self.alpha = check_alpha(self.alpha)
        self.psi = log_potential(self.n, name=f"dirichlet psi (n={self.n})")
        self.phi = log_potential(self.n, name=f"dirichlet phi (n={self.n})")

    @property
    def d(self) -> int:
        return self.n - 1


def closure(x):
    """Rescale positive vectors (last axis) to sum to one."""
    x = np.asarray(x, dtype=float)
    return x / x.sum(axis=-1, keepdims=True)


def check_simplex(p, tol=SIMPLEX_TOL):
    """Return ``p`` as an array after checking it lies in the open simplex."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] < 2:
        raise DomainError("a composition needs at least two parts")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise DomainError(f"composition has non-positive components: {p.tolist()}")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > tol):
        raise DomainError(f"composition does not sum to one: {p.tolist()}")
    return p


def simplex_to_data(p):
    """``y_i = p_i / p_n`` for ``i = 1..n-1``."""
    p = check_simplex(p)
    return p[..., :-1] / p[..., -1:]


def data_to_simplex(y):
    """Inverse chart: normalize ``(y_1, ..., y_d, 1)``."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
        raise DomainError(f"data point has non-positive components: {y.tolist()}")
    ones = np.ones(y.shape[:-1] + (1,))
    return closure(np.concatenate([y, ones], axis=-1))


def dirichlet_cost(p, q):
    """Dirichlet transport cost ``c(p, q)``; nonnegative, zero iff ``p == q``."""
    p = check_simplex(p)
    q = check_simplex(q)
    r = q / p
    return np.log(r.mean(axis=-1)) - np.log(r).mean(axis=-1)


def aitchison_perturb(p, w):
    """Aitchison perturbation ``(p (+) w)_i = p_i w_i / sum_j p_j w_j``."""
    p = check_simplex(p)
    w = check_simplex(w)
    return closure(p * w)


def sample_perturbation(p, concentration, count, seed=None):
    """Draw ``count`` samples of ``p (+) D`` with ``D ~ Dirichlet(concentration)``.

    ``D`` is formed by normalizing independent ``Gamma(concentration_i, 1)``
    draws from ``numpy.random.default_rng(seed)``. A scalar concentration is
    broadcast to all parts.
    """
    p = check_simplex(p)
    conc = np.broadcast_to(np.asarray(concentration, dtype=float), p.shape[-1:])
    if not np.all(np.isfinite(conc)) or np.any(conc <= 0.0):
        raise ParameterError(f"concentration must be positive, got {np.asarray(concentration).tolist()}")
    count = int(count)
    if count < 0:
        raise ParameterError("count must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    gam = rng.gamma(conc, size=(count, conc.size))
    D = closure(gam)
    return closure(p * D)


def ilr_basis(n: int) -> np.ndarray:
    """Helmert contrast matrix of shape ``(n-1, n)`` with orthonormal rows."""
    return helmert(int(n))


def ilr(p):
    """Isometric log-ratio coordinates."""
    p = check_simplex(p)
    return np.log(p) @ ilr_basis(p.shape[-1]).T


def ilr_inverse(z):
    """Composition with ilr coordinates ``z``."""
    z = np.asarray(z, dtype=float)
    V = ilr_basis(z.shape[-1] + 1)
    c = z @ V
    return closure(np.exp(c - c.max(axis=-1, keepdims=True)))
