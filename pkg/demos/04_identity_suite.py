"""Running the identity registry.

Pointwise identities (P1-P13) are evaluated at low-discrepancy samples;
integral identities (I1-I10) by quadrature.  Each result carries the
absolute residual and the residual relative to the sum of the magnitudes
of all terms, so nothing passes because both sides happen to be tiny.
"""

from hermlab import checks, domains
from hermlab.gallery import gallery_metric

m = gallery_metric("torus_conformal", 0.1)

for r in checks.run_pointwise_suite(m, n=50):
    print(f"{r.id:>4} {r.kind:<9} {r.residual_rel:.2e}  {r.paper_ref}")

# Integrals share one pass over the nodes; the suite only combines them.

rule = domains.build_rule(m.domain, 8)
I = checks.compute_integrals(m, rule)
for r in checks.run_integral_suite(m, R=8, integrals=I):
    print(f"{r.id:>4} {r.residual_rel:.2e}  worst part {max(r.details, key=r.details.get)}")

# 4 pi^2 c1^2 two ways: the wedge Theta1 ^ Theta1 and (s_c^2, 1) - |Theta1|^2.
# A torus has c1^2 = 0.

print(checks.chern_number(m, integrals=I))

# Diagnostics collect the yes/no questions with the number behind each answer.

d = checks.classify(m, integrals=I, n=50)
print("kahler", d.kahler, d.max_d_omega)
print("gauduchon", d.gauduchon, d.max_i_ddbar_omega)
print("Ric11 eigenvalue range", d.ric11_min, d.ric11_max)
