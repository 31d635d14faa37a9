"""
The e/(e-1) gap on i.i.d. two-point boxes
=========================================

n boxes, each 0 w.p. 1/n and n otherwise, unit cost, fixed order, minimize.
The index policy opens one box and takes n; the prophet pays far less.
"""

import math

import prophetbox as pb

for n in (2, 10, 100, 10**4, 10**6):
    cf = pb.closed_form_tightness(n)
    print(f"n={n:8d}  alg={cf.alg:g}  prophet={cf.prophet:.4f}  ratio={cf.ratio:.6f}")
print("limit", math.e / (math.e - 1))

# paired Monte Carlo: same realizations for the policy and the prophet
inst = pb.gen_tightness_instance(1000)
alg, orc = pb.simulate_paired("weitzman", inst, "prophet", trials=20_000, seed=1)
ratio, half = pb.ratio_of_means(alg, orc)
print(f"MC n=1000: {ratio:.4f} +/- {half:.4f}")

# a weaker benchmark that must also commit before seeing the whole line
weak = pb.WeakProphetPolicy(pb.gen_tightness_instance(8))
print("weak prophet n=8:", pb.exact_eval(weak, weak.instance), "closed:", pb.closed_form_tightness(8).extras["weak_prophet"])
