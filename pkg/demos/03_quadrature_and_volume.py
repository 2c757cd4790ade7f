"""Integrating over the torus and the Hopf surface.

The torus uses a periodic grid (spectrally accurate for smooth periodic
integrands).  The Hopf surface is integrated over the shell 1 < |z| < 2 in
coordinates (r, t = sin^2 theta, phi1, phi2) with Gauss-Legendre nodes in
r and t and uniform nodes in the two phases.
"""

import numpy as np

from hermlab import domains
from hermlab.gallery import gallery_metric

flat = gallery_metric("torus_flat")
hopf = gallery_metric("hopf_standard")

# The flat torus has volume 4 (the density of w^2/2 is 4 det h).

print("flat volume", domains.volume(flat, domains.build_rule(flat.domain, 8)))

# The Hopf volume is 4 * (2 pi)^2 * (1/2) * ln 2 = 8 pi^2 ln 2.  The rule
# is exact for it already at small R.

exact = 8 * np.pi**2 * np.log(2)
for R in (4, 8, 12):
    rule = domains.build_rule(hopf.domain, R)
    v = domains.volume(hopf, rule)
    print(R, len(rule), v, abs(v - exact) / exact)

# Results do not depend on the worker count: every chunk is summed
# pairwise in a fixed order.

rule = domains.build_rule(hopf.domain, 6)
print([domains.volume(hopf, rule, threads=t) for t in (1, 2, 4)])

# Deck invariance: a metric on the shell only defines a Hopf surface if it
# is invariant under z -> 2z.  The Euclidean metric is not.

from hermlab.expr import load_metric

euclid = load_metric('[metric]\ndomain = "hopf"\nh11 = "1"\nh12 = "0"\nh21 = "0"\nh22 = "1"\n')
print(domains.deck_invariance_check(hopf))
print(domains.deck_invariance_check(euclid))
