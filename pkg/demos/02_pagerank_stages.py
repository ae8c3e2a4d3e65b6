"""Page-importance stages as formulas, checked against direct iteration.

Stage 0 is the uniform score 1/N (a pure length aggregation); each further
stage sums previous scores over in-neighbours weighted by out-degree, using
the truncated sum and multiplication.  Everything is one formula per stage,
evaluated like any other formula.
"""

import numpy as np

from agglogic import Signature, Structure, evaluate, pretty, pagerank_stage

sig = Signature({"E": 2})
edges = {(0, 1), (0, 2), (1, 2), (2, 0), (3, 2), (3, 3)}
world = Structure(sig, 4, {"E": edges})

print("stage 0 formula:", pretty(pagerank_stage(0)))
print("stage 1 formula:", pretty(pagerank_stage(1)))

# direct power-iteration oracle (dangling nodes contribute nothing)
n = 4
adj = np.zeros((n, n))
for a, b in edges:
    adj[a, b] = 1.0
outdeg = adj.sum(axis=1)
share = np.divide(adj, outdeg[:, None], out=np.zeros_like(adj), where=outdeg[:, None] > 0)

scores = np.full(n, 1.0 / n)
for k in range(3):
    formula = pagerank_stage(k)
    values = np.array([evaluate(world, formula, {"x": x}) for x in range(n)])
    print(f"stage {k}: formula {values.round(6)}  direct {scores.round(6)}  "
          f"max gap {np.abs(values - scores).max():.2e}")
    scores = share.T @ scores
