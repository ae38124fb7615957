"""
Entropy bounds for weighted Sobolev classes
===========================================

Evaluate the constructive upper bound for W^r_p(h^2) -> L_q(h^2) on the
circle over a range of n, fit the log-log slope, and build the bump system
behind the lower bound.
"""

import numpy as np

from dunklsphere import pipeline as pl
from dunklsphere.weight import DunklWeight

w = DunklWeight.z2d([0.5, 0.5])
cfg = pl.PipelineConfig(r=3.0, p=2.0, q=2.0, weight=w)

n_grid = [2 ** j for j in range(4, 17, 2)]
values = [pl.upper_bound_value(n, cfg) for n in n_grid]
for n, v in zip(n_grid, values):
    print(f"n={n:6d}  upper bound {v:.4e}")

rep = pl.rate_regression(n_grid, values, target_exponent=-cfg.r)
print(f"fitted slope {rep.slope:.3f} (asymptotic exponent {rep.target:.1f})")
print("ratios between successive grid points:", np.round(np.array(values[1:]) / np.array(values[:-1]), 4))

# lower bound: disjoint bumps whose group orbits avoid the reflecting lines
bumps = pl.build_bump_system(8, cfg, seed=0)
norms = pl.verify_bump_norms(bumps, p=2, trials=20, seed=0, leak_bumps=0)
print(f"{len(bumps.centers)} bumps, norm ratio in [{norms.ratio_low:.3f}, {norms.ratio_high:.3f}]")
for n in (2, 4, 8):
    lo = pl.lower_bound_value(n, cfg, embed_constant=norms.ratio_low)
    print(f"n={n}: lower {lo:.3e}  upper {pl.upper_bound_value(n, cfg):.3e}")
