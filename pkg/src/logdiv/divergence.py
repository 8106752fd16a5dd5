"""Potentials, logarithmic divergences and the alpha-Legendre duality.

An *alpha-exponentially concave* potential ``phi`` on an open convex set
``Theta`` (``Phi = exp(alpha * phi)`` strictly concave) generates the
logarithmic divergence

.. math::

    L[\\theta : \\theta'] = \\frac{1}{\\alpha}
        \\log(1 + \\alpha D\\varphi(\\theta') \\cdot (\\theta - \\theta'))
        - (\\varphi(\\theta) - \\varphi(\\theta'))

and the dual coordinates ``eta = T(theta) = Dphi / (1 - alpha Dphi . theta)``.
As ``alpha -> 0`` the divergence reduces to the Bregman divergence of the
concave function ``phi``.

All arithmetic is float64.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    ParameterError,
    SingularTransformError,
)

__all__ = [
    "Frame",
    "Point",
    "Potential",
    "PotentialReport",
    "check_alpha",
    "fd_step",
    "fd_gradient",
    "fd_jacobian",
    "validate_potential",
    "l_alpha_divergence",
    "bregman_divergence",
    "legendre_forward",
    "forward_jacobian",
    "legendre_inverse",
    "alpha_conjugate_value",
    "conjugate_potential",
    "self_dual_check",
]

_EPS = np.finfo(float).eps


class Frame(enum.Enum):
    """Coordinate frame of a point or tangent vector."""

    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class Point:
    """Coordinates of a manifold point in a declared frame."""

    coords: np.ndarray
    frame: Frame = Frame.PRIMAL

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size


def check_alpha(alpha) -> float:
    """Return ``alpha`` as a float, raising if it is not a positive real."""
    a = float(alpha)
    if not np.isfinite(a) or a <= 0.0:
        raise ParameterError(f"alpha must be a positive real, got {alpha!r}")
    return a


def fd_step(x):
    """Central-difference step ``eps**(1/3) * (1 + |x|)``, componentwise."""
    return _EPS ** (1.0 / 3.0) * (1.0 + np.abs(x))


def fd_gradient(f, x):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return g


def fd_jacobian(F, x):
    """Central finite-difference Jacobian ``dF_i/dx_j`` of a vector function."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2.0 * h[j]))
    return np.column_stack(cols)


class Potential:
    """An alpha-exponentially concave function with its derivatives.

    Parameters
    ----------
    dim : int
        Dimension ``d`` of the domain.
    value, gradient : callable
        ``phi(theta)`` and ``Dphi(theta)``.
    hessian : callable, optional
        ``D^2 phi(theta)``. When omitted, Hessians are obtained by central
        differences of ``gradient``.
    domain : callable, optional
        Predicate for membership in the open convex domain. Defaults to
        "all coordinates finite".
    inverse : callable, optional
        Closed-form inverse of the alpha-Legendre transform,
        ``inverse(eta, alpha) -> theta``. May return ``None`` for alpha
        values it does not cover, in which case Newton iteration is used.
    dual_domain : callable, optional
        Predicate for the range ``Omega`` of the transform, if known.
    name : str, optional
    """

    def __init__(
        self,
        dim: int,
        value: Callable,
        gradient: Callable,
        hessian: Optional[Callable] = None,
        domain: Optional[Callable] = None,
        inverse: Optional[Callable] = None,
        dual_domain: Optional[Callable] = None,
        name: str = "potential",
    ):
        if int(dim) < 1:
            raise ParameterError("dimension must be a positive integer")
        self.dim = int(dim)
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._domain = domain
        self._inverse = inverse
        self._dual_domain = dual_domain
        self.name = name

    def __repr__(self):
        return f"Potential(name={self.name!r}, dim={self.dim})"

    @property
    def has_hessian(self) -> bool:
        return self._hessian is not None

    def value(self, theta) -> float:
        return float(self._value(np.asarray(theta, dtype=float)))

    __call__ = value

    def gradient(self, theta) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(theta, dtype=float)), dtype=float)

    def hessian(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self._hessian is not None:
            return np.asarray(self._hessian(theta), dtype=float)
        H = fd_jacobian(self.gradient, theta)
        return 0.5 * (H + H.T)

    def in_domain(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,) or not np.all(np.isfinite(theta)):
            return False
        return True if self._domain is None else bool(self._domain(theta))

    def in_dual_domain(self, eta) -> Optional[bool]:
        """Membership in ``Omega``; ``None`` when no predicate is registered."""
        if self._dual_domain is None:
            return None
        eta = np.asarray(eta, dtype=float)
        return eta.shape == (self.dim,) and bool(self._dual_domain(eta))

    def closed_form_inverse(self, eta, alpha) -> Optional[np.ndarray]:
        if self._inverse is None:
            return None
        out = self._inverse(np.asarray(eta, dtype=float), alpha)
        return None if out is None else np.asarray(out, dtype=float)

    def without_closed_forms(self) -> "Potential":
        """Copy that forces the generic (Newton / finite-difference) paths."""
        return Potential(
            self.dim,
            self._value,
            self._gradient,
            hessian=None,
            domain=self._domain,
            name=self.name + " (generic)",
        )


def _require_domain(model: Potential, theta, what="point"):
    theta = np.asarray(theta, dtype=float)
    if not model.in_domain(theta):
        raise DomainError(f"{what} {theta.tolist()} lies outside the domain of {model.name}")
    return theta


@dataclass
class PotentialReport:
    """Outcome of :func:`validate_potential`."""

    passed: bool
    worst_eigenvalue: float
    worst_gradient_error: float
    worst_hessian_error: float
    concave: bool
    gradient_ok: bool
    hessian_ok: bool


def validate_potential(model: Potential, samples, alpha=1.0, rtol=1e-6) -> PotentialReport:
    """Check exponential concavity and derivative consistency on samples.

    ``D^2 Phi = alpha e^{alpha phi} (D^2 phi + alpha Dphi Dphi^T)`` must be
    negative definite at every sample, and the analytic gradient (and
    Hessian, when supplied) must agree with central differences to ``rtol``
    relative to ``max(1, |derivative|)``.
    """
    alpha = check_alpha(alpha)
    worst_eig = -np.inf
    worst_grad = 0.0
    worst_hess = 0.0
    for idx, s in enumerate(samples):
        theta = s.coords if isinstance(s, Point) else np.asarray(s, dtype=float)
        if not model.in_domain(theta):
            raise DomainError(f"sample {idx} ({np.asarray(theta).tolist()}) lies outside the domain")
        g = model.gradient(theta)
        H = model.hessian(theta)
        # the positive factor alpha * exp(alpha * phi) does not affect signs
        M = H + alpha * np.outer(g, g)
        worst_eig = max(worst_eig, float(np.linalg.eigvalsh(0.5 * (M + M.T)).max()))
        g_fd = fd_gradient(model.value, theta)
        worst_grad = max(worst_grad, float(np.linalg.norm(g - g_fd) / max(1.0, np.linalg.norm(g))))
        if model.has_hessian:
            H_fd = fd_jacobian(model.gradient, theta)
            worst_hess = max(
                worst_hess, float(np.linalg.norm(H - H_fd) / max(1.0, np.linalg.norm(H)))
            )
    concave = worst_eig < 0.0
    gradient_ok = worst_grad <= rtol
    hessian_ok = worst_hess <= rtol
    return PotentialReport(
        passed=concave and gradient_ok and hessian_ok,
        worst_eigenvalue=worst_eig,
        worst_gradient_error=worst_grad,
        worst_hessian_error=worst_hess,
        concave=concave,
        gradient_ok=gradient_ok,
        hessian_ok=hessian_ok,
    )


def l_alpha_divergence(model: Potential, alpha, theta, theta_prime) -> float:
    """Logarithmic divergence ``L[theta : theta_prime]`` in nats."""
    alpha = check_alpha(alpha)
    theta = _require_domain(model, theta)
    theta_prime = _require_domain(model, theta_prime)
    x = alpha * float(model.gradient(theta_prime) @ (theta - theta_prime))
    if not x > -1.0:
        raise DomainError(
            "pair outside the divergence domain: 1 + alpha Dphi(theta') . (theta - theta') "
            f"= {1.0 + x:.3g} <= 0"
        )
    return float(np.log1p(x) / alpha - (model.value(theta) - model.value(theta_prime)))


def bregman_divergence(model: Potential, theta, theta_prime) -> float:
    """Bregman divergence of the concave ``phi``: the ``alpha -> 0`` limit."""
    theta = _require_domain(model, theta)
    theta_prime = _require_domain(model, theta_prime)
    return float(
        model.gradient(theta_prime) @ (theta - theta_prime)
        - (model.value(theta) - model.value(theta_prime))
    )


def _denominator(alpha, g, theta, tol):
    denom = 1.0 - alpha * float(g @ theta)
    if abs(denom) <= tol * (1.0 + abs(alpha * float(g @ theta))):
        raise SingularTransformError(
            f"1 - alpha Dphi(theta) . theta = {denom:.3g} vanishes at theta={theta.tolist()}"
        )
    return denom


def legendre_forward(model: Potential, alpha, theta, tol=1e-12) -> np.ndarray:
    """Dual coordinates ``eta = Dphi(theta) / (1 - alpha Dphi(theta) . theta)``."""
    alpha = check_alpha(alpha)
    theta = _require_domain(model, theta)
    g = model.gradient(theta)
    return g / _denominator(alpha, g, theta, tol)


def forward_jacobian(model: Potential, alpha, theta) -> np.ndarray:
    """Analytic Jacobian ``d eta / d theta`` of :func:`legendre_forward`.

    With ``g = Dphi``, ``H = D^2 phi`` and ``s = 1 - alpha g . theta``,
    ``J = H / s + alpha g (H theta + g)^T / s^2``.
    """
    alpha = check_alpha(alpha)
    theta = _require_domain(model, theta)
    g = model.gradient(theta)
    H = model.hessian(theta)
    s = _denominator(alpha, g, theta, 1e-12)
    return H / s + alpha * np.outer(g, H @ theta + g) / s**2


def _initial_guesses(model, eta, initial_guess):
    if initial_guess is not None:
        yield np.asarray(initial_guess, dtype=float)
    with np.errstate(divide="ignore"):
        yield 1.0 / eta
    yield np.ones(model.dim)


def legendre_inverse(
    model: Potential, alpha, eta, initial_guess=None, tol=1e-10, max_iter=100
) -> np.ndarray:
    """Primal coordinates ``theta`` with ``T(theta) = eta``.

    Uses the model's closed-form inverse when one is registered; otherwise
    runs damped Newton iteration on ``T(theta) - eta`` (step halving keeps
    iterates in the domain and the residual decreasing) until
    ``|T(theta) - eta| <= tol * (1 + |eta|)``.
    """
    alpha = check_alpha(alpha)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.shape != (model.dim,) or not np.all(np.isfinite(eta)):
        raise DomainError(f"eta={eta.tolist()} is not a finite {model.dim}-vector")
    if model.in_dual_domain(eta) is False:
        raise DomainError(f"eta={eta.tolist()} lies outside the range of the transform")
    closed = model.closed_form_inverse(eta, alpha)
    if closed is not None:
        return closed

    theta = next((g for g in _initial_guesses(model, eta, initial_guess) if model.in_domain(g)), None)
    if theta is None:
        raise DomainError("no initial guess inside the domain; supply initial_guess")

    target = tol * (1.0 + np.linalg.norm(eta))
    r = legendre_forward(model, alpha, theta) - eta
    rn = np.linalg.norm(r)
    for _ in range(max_iter):
        if rn <= target:
            return theta
        J = forward_jacobian(model, alpha, theta)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(J, r, rcond=None)[0]
        lam = 1.0
        any_inside = False
        exits = not model.in_domain(theta + step)
        while lam > 2.0**-40:
            trial = theta + lam * step
            if model.in_domain(trial):
                any_inside = True
                try:
                    r_trial = legendre_forward(model, alpha, trial) - eta
                except SingularTransformError:
                    r_trial = None
                if r_trial is not None and np.linalg.norm(r_trial) < rn:
                    break
            lam *= 0.5
        else:
            if not any_inside or exits:
                raise DomainError(
                    f"Newton iterates for eta={eta.tolist()} leave the domain; "
                    "eta is probably outside the range of the transform"
                )
            raise ConvergenceError(
                f"line search stalled inverting eta={eta.tolist()} (residual {rn:.3g})",
                residual=rn,
            )
        theta, r = trial, r_trial
        rn = np.linalg.norm(r)
    if rn <= target:
        return theta
    raise ConvergenceError(
        f"no convergence inverting eta={eta.tolist()} in {max_iter} iterations (residual {rn:.3g})",
        residual=rn,
    )


def alpha_conjugate_value(model: Potential, alpha, y, initial_guess=None) -> float:
    """``psi(y) = inf_theta (1/alpha) log(1 + alpha theta . y) - phi(theta)``.

    The infimum is attained at ``theta* = T^{-1}(y)``: the stationarity
    condition ``Dphi(theta) = y / (1 + alpha theta . y)`` is ``T(theta) = y``.
    """
    alpha = check_alpha(alpha)
    y = np.asarray(y, dtype=float)
    theta = legendre_inverse(model, alpha, y, initial_guess=initial_guess)
    x = alpha * float(theta @ y)
    if not x > -1.0:
        raise DomainError(f"1 + alpha theta* . y <= 0 at y={y.tolist()}")
    return float(np.log1p(x) / alpha - model.value(theta))


def conjugate_potential(model: Potential, alpha) -> Potential:
    """The alpha-conjugate ``psi`` of ``model`` as a :class:`Potential`.

    Values come from :func:`alpha_conjugate_value`; the gradient is
    ``Dpsi(y) = theta* / (1 + alpha theta* . y)`` (envelope theorem). The
    transform of ``psi`` is the inverse of the transform of ``phi``, which is
    registered as the closed-form inverse for this ``alpha``.
    """
    alpha = check_alpha(alpha)

    def value(y):
        return alpha_conjugate_value(model, alpha, y)

    def gradient(y):
        theta = legendre_inverse(model, alpha, y)
        return theta / (1.0 + alpha * float(theta @ y))

    def domain(y):
        try:
            theta = legendre_inverse(model, alpha, y)
        except (DomainError, ConvergenceError, SingularTransformError):
            return False
        return 1.0 + alpha * float(theta @ y) > 0.0

    def inverse(theta, a):
        if a != alpha or not model.in_domain(theta):
            return None
        return legendre_forward(model, alpha, theta)

    return Potential(
        model.dim,
        value,
        gradient,
        domain=domain,
        inverse=inverse,
        dual_domain=model.in_domain,
        name=f"conjugate of {model.name}",
    )


def self_dual_check(phi: Potential, psi: Potential, alpha, P, Q) -> float:
    """``|L_phi[theta_P : theta_Q] - L_psi[eta_Q : eta_P]|`` for primal points."""
    alpha = check_alpha(alpha)
    tp = P.coords if isinstance(P, Point) else np.asarray(P, dtype=float)
    tq = Q.coords if isinstance(Q, Point) else np.asarray(Q, dtype=float)
    for X in (P, Q):
        if isinstance(X, Point) and X.frame is not Frame.PRIMAL:
            raise DomainError("self_dual_check expects points in the primal frame")
    ep = legendre_forward(phi, alpha, tp)
    eq = legendre_forward(phi, alpha, tq)
    return abs(l_alpha_divergence(phi, alpha, tp, tq) - l_alpha_divergence(psi, alpha, eq, ep))


def primal_coords(model: Potential, alpha, P) -> np.ndarray:
    """Primal coordinates of ``P`` (array input is taken as primal)."""
    if isinstance(P, Point):
        if P.frame is Frame.PRIMAL:
            return np.array(P.coords)
        return legendre_inverse(model, alpha, P.coords)
    return np.asarray(P, dtype=float)


def dual_coords(model: Potential, alpha, P) -> np.ndarray:
    """Dual coordinates of ``P`` (array input is taken as primal)."""
    if isinstance(P, Point) and P.frame is Frame.DUAL:
        return np.array(P.coords)
    return legendre_forward(model, alpha, primal_coords(model, alpha, P))


def as_points(xs: Sequence, frame=Frame.PRIMAL):
    return [x if isinstance(x, Point) else Point(x, frame) for x in xs]
