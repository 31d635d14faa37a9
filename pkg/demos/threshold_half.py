"""
Single threshold for maximization without costs
===============================================

Accept the first value at or above half of E[max]. This earns at least
E[max]/2. The median-of-max threshold does not: a sure 1 followed by a rare
2 sets the median at 2 and the rule walks past the 1.
"""

import numpy as np

import prophetbox as pb
from prophetbox.policies import half_mean_threshold, median_threshold

inst = pb.gen_prophet_half(50)
cf = pb.closed_form_prophet_half(50)
print("prophet-half n=50:", cf.alg, cf.prophet, cf.ratio)

variant = pb.VariantSpec(pb.Objective.MAX, True, False, False)
rng = np.random.default_rng(5)
for _ in range(5):
    inst = pb.random_instance(rng, variant, 4)
    alg = pb.exact_eval(pb.ThresholdPolicy(inst), inst)
    print(f"threshold {alg:.4f}  >=  E[max]/2 {pb.expected_prophet(inst) / 2:.4f}")

boxes = (
    pb.Box(0.0, pb.point_mass(1.0)),
    pb.Box(0.0, pb.make_distribution([(0.0, 0.9), (2.0, 0.1)])),
)
inst = pb.Instance(variant, boxes)
for rule in (half_mean_threshold, median_threshold):
    tau = rule(inst)
    alg = pb.exact_eval(pb.ThresholdPolicy(inst, tau=tau), inst)
    print(f"{rule.__name__:19s} tau={tau:.2f}  alg={alg:.2f}  E[max]/2={pb.expected_prophet(inst) / 2:.2f}")
