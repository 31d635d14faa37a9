"""
Reservation values and the index policy
=======================================

Each box gets a threshold sigma solving E[(sigma - X)^+] = c. Boxes are
opened in increasing sigma and the search stops once the best value in hand
beats the next threshold.
"""

import numpy as np

import prophetbox as pb

# a two-point box: 0 with probability 1/n, n otherwise, unit cost
for n in (2, 10, 1000):
    dist = pb.make_distribution([(0.0, 1 / n), (n, 1 - 1 / n)])
    rv = pb.reservation_value(dist, 1.0)
    print(f"n={n:5d}  sigma={rv.sigma:g}  residual={rv.residual:.1e}")

# zero cost pins sigma to the smallest support point
print(pb.reservation_value(pb.make_distribution([(3.0, 0.5), (7.0, 0.5)]), 0.0).sigma)

# the index policy matches backward induction on random min-cost instances
rng = np.random.default_rng(0)
variant = pb.VariantSpec(pb.Objective.MIN, False, True, True)
for _ in range(5):
    inst = pb.random_instance(rng, variant, 5)
    index = pb.exact_eval(pb.WeitzmanPolicy(inst), inst)
    dp = pb.dp_optimal_value(inst).value
    print(f"index {index:.6f}   dp {dp:.6f}")
