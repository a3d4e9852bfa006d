"""
Simulating a controlled branching process and estimating its offspring law
=========================================================================

Each generation, a Poisson(0.3 * Z) number of individuals reproduce, and
each of them has a Poisson(7) number of children. The full family tree
records how many progenitors had exactly k children, which is all the
nonparametric estimate needs.
"""

import numpy as np

from cbpmde import ControlSpec, PoissonFamily, npmle, simulate, totals

family = PoissonFamily()
offspring = family.pmf_at(7.0)
control = ControlSpec("poisson_rate", 0.3)

# most runs die out early; find the first seed that survives ten generations
seed = next(s for s in range(1000) if simulate(offspring, control, 1, 10, seed=s).survived)
tree = simulate(offspring, control, 1, 10, seed=seed)
print(f"seed {seed}: generation sizes {tree.z.tolist()}")
print(f"progenitors per generation    {tree.phi.tolist()}")

###############################################################################
# Pooling the family tree over generations gives the relative frequencies of
# each offspring count.

tot = totals(tree)
p_hat = npmle(tree)
print(f"\n{tot.delta} progenitors in total")
truth = family.pmf_at(7.0, p_hat.K)
for k in range(0, p_hat.K + 1, 2):
    print(f"  k={k:2d}  estimate {p_hat.probs[k]:.4f}   Poisson(7) {truth.probs[k]:.4f}")

###############################################################################
# The estimate sharpens as more generations are observed.

for n in (2, 4, 6, 8, 10):
    sub = tree.up_to(n)
    if sub.phi.sum():
        print(f"n={n:2d}  Delta={int(sub.phi.sum()):6d}  L1 error {npmle(sub).l1_distance(truth):.4f}")

###############################################################################
# Survival is far from certain: a run dies out with probability about 0.796,
# the fixed point of the per-individual generating function.

alive = np.mean([simulate(offspring, control, 1, 10, seed=s).survived for s in range(2000)])
print(f"\nfraction of 2000 runs alive at generation 10: {alive:.3f}")
