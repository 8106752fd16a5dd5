import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_theta
from logdiv import (
    DomainError,
    Potential,
    SingularTransformError,
    alpha_conjugate_value,
    bregman_divergence,
    conjugate_potential,
    l_alpha_divergence,
    legendre_forward,
    legendre_inverse,
    self_dual_check,
    validate_potential,
)
from logdiv.dirichlet import dirichlet_cost, log_potential, simplex_to_data
from logdiv.divergence import fd_jacobian

WORKED = 0.04872750339269393


def quadratic(d, sign=-1.0):
    return Potential(
        d,
        lambda x: sign * 0.5 * float(x @ x),
        lambda x: sign * np.asarray(x, dtype=float),
        lambda x: sign * np.eye(d),
    )


# validate_potential ---------------------------------------------------------


def test_dirichlet_potential_validates(psi3, rng):
    samples = random_theta(rng, 100)
    report = validate_potential(psi3, samples, alpha=1.0)
    assert report.passed
    # independent oracle: largest eigenvalue of the Hessian of (y1 y2)^(1/3),
    # by differentiating Phi twice numerically, is negative everywhere
    Phi = lambda y: np.cbrt(y[0] * y[1])
    for y in samples[:20]:
        grad = lambda x: np.array(
            [(Phi(x + h) - Phi(x - h)) / (2e-5) for h in np.eye(2) * 1e-5]
        )
        H = fd_jacobian(grad, y)
        assert np.linalg.eigvalsh(0.5 * (H + H.T)).max() < 0


def test_convex_potential_fails_concavity():
    report = validate_potential(quadratic(2, sign=+1.0), np.ones((3, 2)), alpha=1.0)
    assert not report.passed
    assert not report.concave
    assert report.worst_eigenvalue > 0


def test_wrong_gradient_fails_gradient_check(psi3):
    bad = Potential(2, psi3.value, lambda x: 2.0 * psi3.gradient(x), psi3.hessian)
    report = validate_potential(bad, np.ones((2, 2)))
    assert not report.gradient_ok
    assert not report.passed


def test_validate_rejects_sample_outside_domain(psi3):
    with pytest.raises(DomainError):
        validate_potential(psi3, [[1.0, -1.0]])


# divergences ----------------------------------------------------------------


def test_l_alpha_zero_on_diagonal(psi3):
    theta = np.array([0.7, 1.9])
    assert l_alpha_divergence(psi3, 1.0, theta, theta) == 0.0


def test_l_alpha_matches_dirichlet_cost_worked_pair(psi3):
    p = np.array([0.5, 0.25, 0.25])
    q = np.full(3, 1 / 3)
    y, eta = simplex_to_data(q), simplex_to_data(p)
    assert np.allclose(y, [1.0, 1.0]) and np.allclose(eta, [2.0, 1.0])
    direct = np.log(10 / 9) - (np.log(2 / 3) + 2 * np.log(4 / 3)) / 3
    assert direct == pytest.approx(WORKED, abs=1e-15)
    assert l_alpha_divergence(psi3, 1.0, y, eta) == pytest.approx(direct, abs=1e-14)
    assert dirichlet_cost(p, q) == pytest.approx(direct, abs=1e-14)


def test_l_alpha_outside_log_domain_raises(psi3):
    # 1 + Dphi(theta') . (theta - theta') <= 0 for a far-away theta
    with pytest.raises(DomainError):
        l_alpha_divergence(psi3, 5.0, np.array([1e-3, 1e-3]), np.array([1.0, 1.0]))


def test_bregman_quadratic_is_half_squared_distance():
    model = quadratic(3)
    a, b = np.array([1.0, -2.0, 0.5]), np.array([0.0, 1.0, 2.0])
    assert bregman_divergence(model, a, a) == 0.0
    assert bregman_divergence(model, a, b) == pytest.approx(0.5 * np.sum((a - b) ** 2), rel=1e-14)


def test_bregman_limit_is_linear_in_alpha(psi3, rng):
    for a, b in random_theta(rng, 20).reshape(10, 2, 2):
        errs = [abs(l_alpha_divergence(psi3, al, a, b) - bregman_divergence(psi3, a, b)) for al in (1e-2, 1e-3, 1e-4)]
        ratios = [errs[0] / errs[1], errs[1] / errs[2]]
        assert all(5.0 <= r <= 20.0 for r in ratios), ratios


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-2.0, 2.0), min_size=4, max_size=4),
    st.floats(0.05, 1.45),
)
def test_l_alpha_nonnegative(logs, alpha):
    # (y1 y2)^(alpha/3) is concave for alpha < 3/2
    model = log_potential(3)
    t = np.exp(np.array(logs[:2]))
    s = np.exp(np.array(logs[2:]))
    try:
        D = l_alpha_divergence(model, alpha, t, s)
    except DomainError:
        return
    assert D >= -1e-12
    if np.linalg.norm(t - s) > 1e-6:
        assert D > 0


# alpha-Legendre transform ---------------------------------------------------


def test_forward_worked_point(psi3):
    assert np.allclose(legendre_forward(psi3, 1.0, [0.5, 0.25]), [2.0, 4.0], rtol=0, atol=1e-14)


def test_inverse_worked_point(psi3):
    assert np.allclose(legendre_inverse(psi3, 1.0, [2.0, 4.0]), [0.5, 0.25], rtol=0, atol=1e-14)


def test_singular_denominator():
    log1 = Potential(1, lambda x: float(np.log(x[0])), lambda x: 1.0 / x, domain=lambda x: x[0] > 0)
    with pytest.raises(SingularTransformError):
        legendre_forward(log1, 1.0, [2.5])


def test_closed_form_is_reciprocal(psi3, rng):
    eta = random_theta(rng, 100)
    for e in eta:
        assert np.max(np.abs(legendre_inverse(psi3, 1.0, e) * e - 1.0)) <= 1e-14


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_round_trip_dirichlet(psi3, rng, alpha):
    for th in random_theta(rng, 100):
        assert np.allclose(legendre_inverse(psi3, alpha, legendre_forward(psi3, alpha, th)), th, rtol=1e-8, atol=0)


def test_newton_path_agrees_with_closed_form(psi3, rng):
    generic = psi3.without_closed_forms()
    for th in random_theta(rng, 30):
        eta = legendre_forward(psi3, 1.0, th)
        assert np.allclose(legendre_inverse(generic, 1.0, eta), th, rtol=1e-9)


def test_newton_generic_potential_residual(perturbed, rng):
    for th in random_theta(rng, 100, spread=1.0):
        eta = legendre_forward(perturbed, 1.0, th)
        sol = legendre_inverse(perturbed, 1.0, eta)
        assert np.linalg.norm(legendre_forward(perturbed, 1.0, sol) - eta) <= 1e-10 * (1 + np.linalg.norm(eta))
        assert np.allclose(sol, th, rtol=1e-8)


def test_inverse_outside_range(psi3):
    with pytest.raises(DomainError):
        legendre_inverse(psi3.without_closed_forms(), 1.0, [-1.0, 2.0])


# conjugate ------------------------------------------------------------------


def test_conjugate_differences_match_log_form(psi3, rng):
    ys = random_theta(rng, 20)
    vals = np.array([alpha_conjugate_value(psi3, 1.0, y) for y in ys])
    ref = np.log(ys).sum(axis=1) / 3
    assert np.max(np.abs((vals - vals[0]) - (ref - ref[0]))) <= 1e-10


def test_conjugate_minimum_on_lattice(perturbed, rng):
    for y in random_theta(rng, 3, spread=0.7):
        star = legendre_inverse(perturbed, 1.0, y)
        value = alpha_conjugate_value(perturbed, 1.0, y)
        grid = np.linspace(0.5, 1.5, 50)
        T1, T2 = np.meshgrid(star[0] * grid, star[1] * grid)
        thetas = np.column_stack([T1.ravel(), T2.ravel()])
        obj = [np.log1p(t @ y) - perturbed.value(t) for t in thetas]
        assert min(obj) >= value - 1e-12


def test_conjugate_of_conjugate_recovers_phi(perturbed, rng):
    psi = conjugate_potential(perturbed, 1.0)
    thetas = random_theta(rng, 20, spread=1.0)
    back = np.array([alpha_conjugate_value(psi, 1.0, th) for th in thetas])
    phi = np.array([perturbed.value(th) for th in thetas])
    offset = back - phi
    assert np.ptp(offset) <= 1e-8


def test_conjugate_gradient_matches_finite_differences(perturbed, rng):
    psi = conjugate_potential(perturbed, 1.0)
    for y in random_theta(rng, 5, spread=0.7):
        h = 1e-6
        fd = np.array([(psi.value(y + h * e) - psi.value(y - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.allclose(psi.gradient(y), fd, rtol=1e-6, atol=1e-8)


# self-dual expression -------------------------------------------------------


def test_self_dual_identical_points(psi3):
    assert self_dual_check(psi3, psi3, 1.0, [0.4, 2.0], [0.4, 2.0]) == 0.0


def test_self_dual_dirichlet(psi3, rng):
    pts = random_theta(rng, 2000).reshape(1000, 2, 2)
    assert max(self_dual_check(psi3, psi3, 1.0, P, Q) for P, Q in pts) <= 1e-9


def test_self_dual_generic(perturbed, rng):
    psi = conjugate_potential(perturbed, 1.0)
    pts = random_theta(rng, 40, spread=1.0).reshape(20, 2, 2)
    assert max(self_dual_check(perturbed, psi, 1.0, P, Q) for P, Q in pts) <= 1e-9


def test_self_dual_mismatched_conjugate_flagged(psi3):
    wrong = Potential(2, lambda y: 2 * psi3.value(y), lambda y: 2 * psi3.gradient(y), domain=psi3.in_domain)
    assert self_dual_check(psi3, wrong, 1.0, [0.5, 0.25], [0.7, 0.5]) > 0.01


def test_perturbed_is_exponentially_concave(perturbed, rng):
    assert validate_potential(perturbed, random_theta(rng, 50, spread=1.0)).passed
