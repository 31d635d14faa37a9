"""
Ski rental with a falling buy price
===================================

Rent p_t each day or buy at price a_t, where a_t never increases. The
randomized hazard rule is e/(e-1)-competitive in expectation; the
deterministic break-even rule is 2-competitive on every sequence.
"""

import math

import numpy as np

import prophetbox as pb

a = [math.inf] + [10.0] * 20 + [0.0]
p = [1.0] * 21
opt = pb.db_ski_offline_opt(a, p)
print("offline optimum", opt)
print("randomized, exact expectation", pb.db_ski_rental_expected_cost(a, p) / opt)
print("break-even", pb.db_ski_rental_costs(a, p)[0] / opt)

# sampled costs agree with the exact expectation
u = np.random.default_rng(0).random(100_000)
print("randomized, sampled", pb.db_ski_rental_costs(a, p, u).mean() / opt)

# the same rule run as a search policy on the tightness family
inst = pb.gen_tightness_instance(1000)
alg, orc = pb.simulate_paired("ski-rental", inst, "prophet", trials=20_000, seed=3)
print("as a box policy: %.4f +/- %.4f" % pb.ratio_of_means(alg, orc))
