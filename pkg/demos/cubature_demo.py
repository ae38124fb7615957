"""
Positive cubature for a reflection-invariant weight
===================================================

Build a rule exact on polynomials of degree 12 for h_kappa^2 dsigma on the
circle with the Z2 x Z2 weight |x1| |x2|, then compare discrete and
continuous norms of random polynomials of degree 4.
"""

import numpy as np

from dunklsphere.cubature import build_rule, exactness_check, mz_check
from dunklsphere.weight import DunklWeight

# the weight h^2(x) = |x1|^(2 k1) |x2|^(2 k2) with k = (0.5, 0.5)
w = DunklWeight.z2d([0.5, 0.5])
rule = build_rule(w, degree=12, seed=0)
print("nodes:", len(rule.weights), "method:", rule.method)
print("weights sum to the total mass:", rule.weights.sum(), "vs", w.norm_const)
print("moment residual: %.2e" % rule.residual)
print("relative error on random f: %.2e" % exactness_check(rule, trials=50))

# weights stay comparable to the h^2-measure of small caps around each node
print("weight / cap-measure bracket:", np.round(rule.weight_model_bracket, 3))

for p in (1.0, 2.0, np.inf):
    b = mz_check(rule, p, trials=50, n=4)
    print(f"p={p}: discrete/continuous norm ratio in [{b.c_low:.4f}, {b.c_high:.4f}]")
