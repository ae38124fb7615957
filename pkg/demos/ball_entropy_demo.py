"""
Entropy numbers of small finite-dimensional balls
=================================================

Bracket e_k(B_p^m -> l_q^m) from above by explicit nets and from below by
packings, and compare with a direct grid search in dimension 2.
"""

import math

from dunklsphere.ball_entropy import BallSpec, brute_force_oracle, entropy_bracket

spec = BallSpec(2, 1.0, 2.0)
for k in (1, 2, 3, 4):
    br = entropy_bracket(spec, k, seed=0, restarts=4)
    orc = brute_force_oracle(spec, k, resolution=0.02)
    print(f"k={k}: bracket [{br.lower:.3f}, {br.upper:.3f}]   grid search [{orc.lower:.3f}, {orc.upper:.3f}]")

# in higher dimension only the bracket is affordable
for m in (4, 8, 16):
    br = entropy_bracket(BallSpec(m, 1.0, math.inf), 4, seed=0, restarts=4)
    print(f"m={m}, k=4, l1 -> l_inf: [{br.lower:.3f}, {br.upper:.3f}]")
