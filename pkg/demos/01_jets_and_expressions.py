"""Metric coefficients as text, derivatives as jets.

A metric entry such as ``1/(z1*zb1+z2*zb2)`` is parsed once and then
evaluated on second-order Wirtinger jets: one pass returns the value, the
four first derivatives (z1, z2, zb1, zb2) and all ten second derivatives.
"""

import numpy as np

from hermlab.expr import eval_jet, parse, unparse
from hermlab.jets import PACK, PAIRS, fd_oracle

# Parse the Hopf coefficient and look at the tree and its canonical text.

e = parse("1/(z1*zb1 + z2*zb2)")
print(e)
print(unparse(e))

# Points are stored as (z1, z2, zb1, zb2).  At (1, 0) the value is 1,
# d/dz1 is -1 and the mixed derivative d^2/dz1 dzb1 is 1.

p = np.array([1, 0, 1, 0], dtype=complex)
j = eval_jet(e, p)
print("value", j.val)
print("first", j.d)
print("d2/dz1 dzb1", j.dd[PACK[0, 2]])

# The finite-difference oracle knows nothing about jets.  It perturbs one
# complex direction at a time and extrapolates; the two agree to ~1e-9.

for a in range(4):
    print(a, j.d[a], fd_oracle(e, p, [a], richardson=True))

worst = max(
    abs(j.dd[n] - fd_oracle(e, p, [a, b], step=1e-3, richardson=True)) for n, (a, b) in enumerate(PAIRS)
)
print("worst second-derivative gap", worst)

# Expressions that depend only on z1, z2 have zero antiholomorphic slots,
# exactly, not approximately.

hol = eval_jet(parse("exp(z1)*sin(z2)^2"), np.array([0.3, 0.2j, 0.3, -0.2j]))
print("zbar slots", hol.d[2:])
