"""Four nodes agreeing on an average.

Each node repeatedly replaces its value with the plain mean of the values it
can read (its own included).  With a strongly connected read graph this
converges to a weighted average of the initial values — run it and watch the
spread collapse.
"""

import numpy as np

from gridswarm import (
    ConvergenceConfig,
    DirectedGraph,
    predict_fixed_point,
    row_stochastic,
    run,
)

adjacency = np.array([
    [1, 1, 0, 0],
    [0, 1, 1, 0],
    [1, 0, 1, 1],
    [0, 1, 0, 1],
])
graph = DirectedGraph(4, adjacency)
q = row_stochastic(graph)
s0 = np.array([1.0, 2.0, 3.0, 4.0])

traj = run(q, s0, ConvergenceConfig(tolerance=1e-6))

print(f"converged after {traj.iterations_run} iterations")
for k, state in enumerate(traj.states[:11]):
    print(f"  k={k:2d}  " + "  ".join(f"{v:.6f}" for v in state))

predicted = predict_fixed_point(q).predicted_limit(s0)
print(f"eigenvector prediction: {predicted:.9f}")
print(f"final state:            {traj.final[0]:.9f}")
