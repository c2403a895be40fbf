"""The empirical centroid body of a tiny 2-D sample, queried through its gauge LP.

Run: python demos/centroid_body_2d.py
"""
import numpy as np

from htica.centroid import EmpiricalCentroidBody

# four points whose body (1/N) sum [-x_i, x_i] is the square [-1/2, 1/2]^2
points = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
body = EmpiricalCentroidBody(points)
print(body)

for q in ([0.5, 0.0], [0.4, 0.4], [0.5, 0.5], [0.6, 0.0], [1.0, 1.0], [0.0, 0.0]):
    sol = body.solve_gauge_lp(q)
    ans = body.membership(q, epsilon=0.05)
    print(f"q={q}  lambda*={sol.objective:.4g}  gauge={ans.gauge:.4g}  member={ans.verdict}")

# support function: h(u) = mean |u . x_i|
for u in ([1.0, 0.0], [1.0, 1.0]):
    print(f"h({u}) = {body.support_function(u):.4g}")

# a random heavy-tailed body: trace the boundary along a few directions
g = np.random.default_rng(0)
X = g.standard_cauchy((200, 2))
body = EmpiricalCentroidBody(X)
angles = np.linspace(0, np.pi, 7)
dirs = np.column_stack([np.cos(angles), np.sin(angles)])
radii = 1.0 / body.gauges(dirs)
for a, r in zip(angles, radii):
    print(f"angle {np.degrees(a):6.1f} deg  boundary radius {r:.4f}")
