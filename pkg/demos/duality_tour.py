"""
Logarithmic divergences on the simplex
======================================

A short tour of the Dirichlet instance: the transport cost written as a
logarithmic divergence, the reciprocal duality, the mixed-frame metric and
the generalized Pythagorean relation.

Run with ``python3 demos/duality_tour.py``.
"""

import numpy as np

from logdiv import (
    l_alpha_divergence,
    legendre_forward,
    legendre_inverse,
    metric_matrix,
    pullback_metric,
    pythagorean_gap,
    self_dual_check,
    transform_jacobian,
)
from logdiv.dirichlet import DirichletInstance, dirichlet_cost, simplex_to_data
from logdiv.geometry import nullspace

inst = DirichletInstance(3)

###############################################################################
# The transport cost is an L-divergence
# -------------------------------------
# Compositions are charted by ratios to the last part.

p = np.array([0.5, 0.25, 0.25])
q = np.full(3, 1 / 3)
y, eta = simplex_to_data(q), simplex_to_data(p)
print("c(p, q)          =", dirichlet_cost(p, q))
print("L_psi[y : eta]   =", l_alpha_divergence(inst.psi, 1.0, y, eta))

###############################################################################
# Duality
# -------
# At alpha = 1 the transform pair is the reciprocal map.

theta = np.array([0.5, 0.25])
eta = legendre_forward(inst.phi, 1.0, theta)
print("T(0.5, 0.25)     =", eta)
print("T^-1(T(theta))   =", legendre_inverse(inst.phi, 1.0, eta))
print("self-dual gap    =", self_dual_check(inst.phi, inst.psi, 1.0, theta, [1.2, 0.7]))

###############################################################################
# Metric
# ------
# ``G`` pairs a primal direction with a dual one; multiplying by the Jacobian
# of the transform gives the usual symmetric metric in one frame.

Gm = metric_matrix(inst.phi, 1.0, theta)
J = transform_jacobian(inst.phi, 1.0, theta)
print("Pi               =", Gm.Pi)
print("G                =\n", Gm.G)
print("g = G J          =\n", pullback_metric(Gm, J))

###############################################################################
# Pythagorean relation
# --------------------
# Step from Q along a primal direction ``a`` and a dual direction ``b`` with
# ``a^T G b = 0``: the three divergences add up exactly.

rng = np.random.default_rng(0)
Q = np.array([0.8, 1.3])
GQ = metric_matrix(inst.phi, 1.0, Q)
b = rng.standard_normal(2)
a = nullspace((GQ.G @ b)[None, :])[:, 0]
P = legendre_inverse(inst.phi, 1.0, GQ.eta + 0.3 * b)
R = Q + 0.3 * a
gap, orth = pythagorean_gap(inst.phi, 1.0, P, Q, R)
print(f"orthogonal triple: gap = {gap:.2e}, orthogonality = {orth:.2e}")

R = Q + 0.3 * rng.standard_normal(2)
gap, orth = pythagorean_gap(inst.phi, 1.0, P, Q, R)
print(f"generic triple:    gap = {gap:.2e}, orthogonality = {orth:.2e}")
