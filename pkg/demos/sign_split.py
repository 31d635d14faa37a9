"""
Maximizing with costs: no multiplicative guarantee
==================================================

The construction below makes the best online policy lose money in
expectation while the prophet still earns a positive amount, so no ratio
of the two is meaningful.
"""

import prophetbox as pb

for n in (4, 100, 10**4, 10**6):
    cf = pb.closed_form_example32(n)
    print(f"n={n:8d}  alg={cf.alg:+.4f}  prophet={cf.prophet:+.4f}  prophet(order)={cf.extras['prophet_orderselect']:+.4f}")

# backward induction confirms the small case in all four cells
for order in (False, True):
    for commitment in (False, True):
        inst = pb.gen_example_max_cost(4, order_selection=order, commitment=commitment)
        print(inst.variant, pb.dp_optimal_value(inst).value, pb.expected_prophet(inst))
