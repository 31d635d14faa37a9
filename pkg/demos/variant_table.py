"""
All sixteen variants
====================

Objective x commitment x inspection cost x order selection, each with its
known worst-case ratio and a small instance that exhibits it.
"""

from prophetbox import registry

print(registry.render_status_table())

for row in registry.table_rows(n=400, trials=2000, seed=0):
    print(row["objective"], row["commitment"], row["observation_cost"], row["order_selection"], row["check"], row["note"])
