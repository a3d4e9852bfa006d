"""
Inliers: removing mass from a cell
==================================

A negative alpha takes mass away from L instead of adding it. The potential
bias T(mixture) - T(model) of HD and NED is compared with that of LD; NED
ends up less biased than LD and HD more biased.
"""

from cbpmde import HD, LD, NED, PoissonFamily
from cbpmde.cli import BIAS_TABLE_ALPHAS
from cbpmde.robust import potential_bias, relative_bias

family = PoissonFamily()

for L, alphas in BIAS_TABLE_ALPHAS.items():
    print(f"L = {L}")
    print(f"  {'alpha':>11s}  {'LD bias':>11s}  {'HD/LD':>9s}  {'NED/LD':>9s}")
    for a in alphas:
        ld = potential_bias(LD, family, 7.0, a, L)
        hd = relative_bias(HD, family, 7.0, a, L)
        ned = relative_bias(NED, family, 7.0, a, L)
        print(f"  {a:11.7f}  {ld:11.3e}  {hd:9.5f}  {ned:9.5f}")
