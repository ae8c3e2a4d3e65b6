"""Two pseudometrics on finite [0,1]-sequences via step functions.

A sequence of length n becomes a piecewise-constant function on [0,1] with
steps of width 1/n.  Distances: L1 between the sorted representations
(order-blind, replication-blind) and sup between the order-preserving ones.
"""

import numpy as np

from agglogic import (
    mu1_unordered, muinf_ordered, ordered_rep, unordered_rep,
)

p = (0.0, 0.5, 1.0)
q = (0.0, 0.0, 0.5, 0.5, 1.0, 1.0)

f = ordered_rep(p)
print("step function of", p, "at 0, 0.4, 0.7, 1:", [f(t) for t in (0, 0.4, 0.7, 1)])
print("sorted representation of (0.3, 0.1, 0.2):", unordered_rep((0.3, 0.1, 0.2)).values)

# q repeats every entry of p twice, so the sorted step functions coincide
print(f"\nL1 distance between {p} and {q}: {mu1_unordered(p, q)!r}")

# the sup distance sees order
print("sup distance (0,1) vs (1,0):", muinf_ordered((0, 1), (1, 0)))
print("L1  distance (0,1) vs (1,0):", mu1_unordered((0, 1), (1, 0)))

# pseudometric sanity on random data: symmetry, triangle, boundedness
rng = np.random.default_rng(0)
worst_triangle = 0.0
for _ in range(2000):
    a, b, c = (rng.random(rng.integers(1, 25)) for _ in range(3))
    lhs = mu1_unordered(a, c)
    rhs = mu1_unordered(a, b) + mu1_unordered(b, c)
    worst_triangle = max(worst_triangle, lhs - rhs)
print(f"\nworst triangle-inequality slack over 2000 random triples: {worst_triangle:.2e}")

# the L1 distance doubles as a (binary) aggregation function, usable inside
# formulas like any other aggregator
from agglogic import MU1_DIST
print("as an aggregator:", MU1_DIST((0, 0.5, 1), (1, 0.5, 0)))
