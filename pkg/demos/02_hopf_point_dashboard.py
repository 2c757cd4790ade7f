"""The Hopf metric at one point.

On the shell 1 < |z| < 2 the metric h = I/|z|^2 descends to the Hopf
surface.  It is the standard example of a Gauduchon metric that is not
Kahler, and at p0 = (1, 0) everything can be checked by hand.
"""

import numpy as np

from hermlab import domains, forms, geometry
from hermlab.forms import Dashboard
from hermlab.gallery import gallery_metric

m = gallery_metric("hopf_standard")
p0 = domains.honest([1.0], [0.0])

# One call builds the metric jets, Christoffel symbols, torsion and every
# curvature contraction.

fr = geometry.compute_frame(m, p0)
print("h", fr.h[0])
print("torsion trace T_i", fr.Ttr[0])  # expected (-1, 0)
print("first Chern-Ricci", fr.Theta1[0])  # expected diag(0, 2)
print("Chern scalar s_c", fr.s_c[0])  # expected 2
print("Riemannian s, s11", fr.s[0], fr.s11[0])

# The forms side: dbar* omega is a (1,0)-form; its squared length is 1 and
# Lambda dbar dbar* omega equals it, which is the Gauduchon condition on a
# surface.

D = Dashboard(fr.mj)
print("|dbar* w|^2", D.t[0])
print("Lambda dbar dbar* w", D.lam_dbdbstar[0])
print("dbar* w", forms.as_values(D.dbs_omega)[0])

# M, the symmetrized covariant derivative of the torsion trace, vanishes
# identically on this metric.

pts = m.domain.sample_points(200)
print("max |M| over 200 samples", np.abs(geometry.compute_frame(m, pts).M).max())

# The command line gives the same dashboard:
#   hermlab point --gallery hopf_standard 1 0
