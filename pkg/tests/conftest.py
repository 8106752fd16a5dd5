import numpy as np
import pytest

from logdiv.dirichlet import DirichletInstance, log_potential
from logdiv.divergence import Potential


def perturbed_potential(eps=0.01):
    """Dirichlet (n=3) potential plus ``eps * log(1 + theta_1)``; no closed-form inverse."""
    base = log_potential(3)

    def value(x):
        return base.value(x) + eps * np.log1p(x[0])

    def gradient(x):
        g = base.gradient(x)
        g[0] += eps / (1.0 + x[0])
        return g

    def hessian(x):
        H = base.hessian(x)
        H[0, 0] -= eps / (1.0 + x[0]) ** 2
        return H

    return Potential(2, value, gradient, hessian, domain=lambda x: bool(np.all(x > 0)), name="perturbed")


def quadratic_potential(d, alpha):
    """``-|y|^2 / 2`` with its closed-form alpha-Legendre inverse.

    ``exp(alpha * psi)`` is concave where ``alpha |y|^2 < 1``.
    """

    def inverse(theta, a):
        r = float(np.linalg.norm(theta))
        if r == 0.0:
            return np.zeros_like(theta)
        disc = 1.0 - 4.0 * a * r * r
        if disc <= 0.0:
            return None
        s = (1.0 - np.sqrt(disc)) / (2.0 * a * r)
        return -theta * (s / r)

    return Potential(
        d,
        lambda y: -0.5 * float(y @ y),
        lambda y: -np.asarray(y, dtype=float),
        lambda y: -np.eye(d),
        domain=lambda y: alpha * float(y @ y) < 1.0,
        inverse=inverse,
        name="quadratic",
    )


@pytest.fixture
def dir3():
    return DirichletInstance(3)


@pytest.fixture
def psi3():
    return log_potential(3)


@pytest.fixture
def perturbed():
    return perturbed_potential()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_theta(rng, size, d=2, spread=1.5):
    return np.exp(rng.uniform(-spread, spread, size=(size, d)))


def random_simplex(rng, size, n):
    return rng.dirichlet(np.full(n, 2.0), size=size)
