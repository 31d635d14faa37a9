"""
Choosing the order does not save minimization
=============================================

With order selection and costs the index policy (optimal online) is worse
than the prophet by a factor growing like sqrt(n).
"""

import math

import prophetbox as pb

for n in (16, 64, 256):
    inst = pb.gen_example_min_orderselect(n)
    alg = pb.exact_eval(pb.WeitzmanPolicy(inst), inst)
    print(f"n={n:4d}  exact ratio / sqrt(n) = {alg / pb.expected_prophet(inst) / math.sqrt(n):.4f}")

for n in (1024, 10**4, 1024**2):
    cf = pb.closed_form_example41(n)
    print(f"n={n:8d}  closed ratio / sqrt(n) = {cf.ratio / math.sqrt(n):.4f}  prophet={cf.prophet:.6f}")

# n must be a perfect square
try:
    pb.gen_example_min_orderselect(10)
except pb.NotPerfectSquare as err:
    print("rejected:", err)
