"""Scale invariance, coordinate changes and convergence.

Relative residuals do not move when h is multiplied by a constant, and
scalar curvatures are unchanged by a complex-linear change of
coordinates.  On a metric without symmetry the integral residuals decay
quickly with the resolution.
"""

import numpy as np

from hermlab import checks, cli, domains, geometry
from hermlab.expr import load_metric
from hermlab.forms import Dashboard
from hermlab.gallery import gallery_metric, linear_pullback, rescaled

m = gallery_metric("hopf_standard")
pts = m.domain.sample_points(30)
base = [r.residual_rel for r in checks.run_pointwise_suite(m, points=pts)]
for lam in (0.5, 2.0, 10.0):
    other = [r.residual_rel for r in checks.run_pointwise_suite(rescaled(m, lam), points=pts)]
    print(lam, max(abs(a - b) for a, b in zip(base, other)))

# Pull the conformal torus metric back by z -> A z and compare scalars at
# corresponding points.

A = np.array([[1.2, 0.3 - 0.4j], [-0.5j, 0.9 + 0.1j]])
c = gallery_metric("torus_conformal", 0.1)
p = c.domain.sample_points(5)
z = p[:, :2] @ A.T
q = domains.honest(z[:, 0], z[:, 1])
a = geometry.compute_frame(linear_pullback(c, A), p)
b = geometry.compute_frame(c, q)
print(np.abs(a.s_c - b.s_c).max(), np.abs(Dashboard(a.mj).t - Dashboard(b.mj).t).max())

# A torus metric with off-diagonal terms and no symmetry: residuals shrink
# by orders of magnitude per step in R.

generic = load_metric("""
[metric]
name = "torus_generic"
domain = "torus"
h11 = "2 + 0.5*cos(pi*(z1+zb1)) + 0.3*sin(pi*i*(zb2-z2))"
h12 = "0.3*cos(pi*(z1+zb1+z2+zb2)) + 0.2*i*sin(pi*i*(zb1-z1))"
h21 = "0.3*cos(pi*(z1+zb1+z2+zb2)) - 0.2*i*sin(pi*i*(zb1-z1))"
h22 = "2 + 0.4*cos(pi*(z2+zb2) + pi*i*(zb1-z1))"
""")
for row in cli.convergence_table(generic, [4, 6, 8]):
    if row["id"] == "I2":
        print(row)
