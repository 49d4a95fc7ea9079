"""
How big do the models get?
==========================

Both formulations use one time step per arc, so their size grows with the
square of the arc count.  This script prints the closed-form sizes for
generated graphs before and after the arc filter, and checks one of them
against an actual build.
"""

import numpy as np

from stsptwpd import build_abf, constraint_counts, generate_instance, reduce, variable_counts

print(f"{'V':>3} {'|A|':>4} {'bin':>6} {'cont':>5} {'rows':>6}   {'|A| red':>7} {'bin':>6} {'red %':>6}")
shares = []
for n in range(6, 16):
    inst = generate_instance(n, seed=0)
    g = inst.graph
    small, rep = reduce(inst)
    b, c = variable_counts(g.n_nodes, g.n_arcs)
    rows = constraint_counts(g.n_nodes, g.n_arcs, len(inst.required), len(g.out_arcs(0)))["total"]
    rb, _ = variable_counts(small.graph.n_nodes, small.graph.n_arcs)
    shares.append(rep.var_reduction_estimate_abf)
    print(f"{n:>3} {g.n_arcs:>4} {b:>6} {c:>5} {rows:>6}   {small.graph.n_arcs:>7} {rb:>6} "
          f"{rep.var_reduction_estimate_abf:>6.1f}")

print(f"mean reduction {np.mean(shares):.1f}%")

# Non-crossing graphs on a circle stay sparse, so most arcs already lie on
# some shortest path and the filter has little to remove.

# The formulas are exactly what the builder emits:
inst = generate_instance(8, seed=0)
model = build_abf(inst)
print("built:", model.n_binary, model.n_continuous, len(model.constraints))
print("formula:", *variable_counts(inst.graph.n_nodes, inst.graph.n_arcs),
      constraint_counts(inst.graph.n_nodes, inst.graph.n_arcs, len(inst.required),
                        len(inst.graph.out_arcs(0)))["total"])
