"""
Dual projections and the dual foliation
=======================================

Points of the 2-simplex are projected onto a line that is straight in the
parameter coordinates. Every point lands on exactly one leaf, the dual-flat
line through its projection that meets the subspace orthogonally; in the
simplex the leaves are straight chords.

Run with ``python3 demos/foliation.py [output.svg]``.
"""

import sys

import numpy as np

from logdiv import AffineSubspace, Frame, Point, dual_complement_at, leaf_assign, legendre_forward
from logdiv.dirichlet import data_to_simplex, log_potential, simplex_to_data
from logdiv.svg import render_simplex

out = sys.argv[1] if len(sys.argv) > 1 else "foliation_demo.svg"
phi = log_potential(3)
E = AffineSubspace.spanning(Frame.PRIMAL, [1.0, 1.0], [1.0, -0.5])

###############################################################################
# A coarse grid of compositions

m = 12
grid = np.array([(i, j, m - i - j) for i in range(1, m) for j in range(1, m - i)], dtype=float) / m
points = [Point(y, Frame.DUAL) for y in simplex_to_data(grid)]
assignments = leaf_assign(phi, 1.0, E, points)

residuals = np.array([a.membership_residual for a in assignments])
print(f"{len(points)} points, largest membership residual {residuals.max():.1e}")

###############################################################################
# Check the leaves: a point taken on a leaf projects back to its base

a = assignments[7]
leaf = dual_complement_at(phi, 1.0, E, a.leaf_base)
print("leaf base (theta):", a.leaf_base.coords, " leaf direction (eta):", leaf.basis[:, 0])

###############################################################################
# Draw it: the subspace in blue, one grey chord from each point to its
# projection

segments = []
s = np.linspace(0.0, 1.0, 5)[:, None]
for i, a in enumerate(assignments):
    eta0 = legendre_forward(phi, 1.0, a.leaf_base.coords)
    segments.append((i, data_to_simplex(a.point.coords + s * (eta0 - a.point.coords))))

ts = np.linspace(-0.95, 1.95, 300)
curve = data_to_simplex(np.array([legendre_forward(phi, 1.0, E.point([t])) for t in ts]))
with open(out, "w") as fh:
    fh.write(render_simplex(grid, segments, curve, title="dual foliation"))
print("wrote", out)
