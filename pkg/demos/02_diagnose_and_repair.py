"""A network poisoned by a node that listens to nobody.

In the 10-node graph below, node 9 (1-based) reads only itself, so its value
never moves — and because everyone else is (transitively) downstream of it,
the whole network is dragged to node 9's value.  The connectivity analyzer
spots this as a closed strongly connected component and suggests the minimal
edge set to fix it.
"""

import numpy as np

from gridswarm import (
    builtin_scenario,
    execute_scenario,
    row_stochastic,
    scc_analyze,
    suggest_repair,
)
from gridswarm.consensus import predict_fixed_point

broken = builtin_scenario("case2")
traj = execute_scenario(broken, until_converged=True)
print(f"broken graph: all nodes end at {traj.final.round(8).tolist()}")

report = scc_analyze(broken.graph)
print(f"strongly connected: {report.is_strongly_connected}")
for comp in report.closed_components:
    print(f"closed component (reads only itself): {sorted(n + 1 for n in comp)}")

for i, j in suggest_repair(broken.graph, report):
    print(f"suggested repair: have node {i + 1} also read node {j + 1}")

fixed = builtin_scenario("case2-repaired")
traj = execute_scenario(fixed, until_converged=True)
limit = predict_fixed_point(row_stochastic(fixed.graph)).predicted_limit(
    np.asarray(fixed.initial_values))
print(f"repaired graph converges to {traj.final[0]:.9f} "
      f"(eigenvector prediction {limit:.9f})")
