"""Economic dispatch: conserving total output while redistributing it.

Row-stochastic averaging agrees on a value but does not conserve the sum —
bad news if the values are megawatts.  A column-stochastic exchange keeps
the total constant at every step; where it ends up is set by the matrix's
right eigenvector.  For an equal split you need doubly stochastic weights
(metropolis on a symmetric graph), which conserve the sum *and* converge to
the true average.
"""

import numpy as np

from gridswarm import (
    DirectedGraph,
    builtin_scenario,
    column_stochastic,
    metropolis,
    run,
    run_exact,
)

config = builtin_scenario("dispatch3")
s0 = np.asarray(config.initial_values)
print(f"generators start at {s0.tolist()} MW, total {s0.sum():.0f} MW")

traj = run_exact(column_stochastic(config.graph), s0, 200)
sums = traj.as_array().sum(axis=1)
print(f"column-stochastic: total stays {sums.min():.12f}..{sums.max():.12f}")
print(f"  but settles at {traj.final.round(6).tolist()} — not an equal split")

sym = DirectedGraph(3, config.graph.adjacency | config.graph.adjacency.T)
even = run(metropolis(sym), s0)
print(f"metropolis on the symmetrized graph: {even.final.round(6).tolist()}")
print(f"  equal split at {s0.sum() / 3:.6f} MW each, total still {even.final.sum():.6f}")
