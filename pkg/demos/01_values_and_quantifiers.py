"""Evaluating [0,1]-valued formulas on finite relational structures.

Formulas are built from constants, variable equalities, relational atoms,
continuous connectives, and aggregation applications that bind variables.
The classical quantifiers come back as the max and min aggregations.
"""

from agglogic import (
    Signature, Structure, parse, pretty, evaluate, defined_set, satisfies,
)

sig = Signature({"E": 2})

# a 5-node digraph: a directed path 0 -> 1 -> 2 -> 3 plus a loop at 4
world = Structure(sig, 5, {"E": {(0, 1), (1, 2), (2, 3), (4, 4)}})
print("world:", world)

# Truth values live in [0,1]; atoms and equalities are 0/1-valued.
for text, env in [
    ("0.25", {}),
    ("E(x, y)", {"x": 0, "y": 1}),
    ("x = y", {"x": 2, "y": 2}),
    ("not E(x, y) and 0.8", {"x": 0, "y": 1}),
]:
    print(f"{text!r:35s} under {env} = {evaluate(world, parse(text), env)}")

# Aggregations bind variables: the mean of E(x, y) over all y is the
# out-degree of x divided by the domain size.
row_density = parse("am { E(x,y) : y : true }")
print("\nrow densities:", [evaluate(world, row_density, {"x": x}) for x in range(5)])

# exists/forall are sugar for max/min aggregations with condition 'true'
has_successor = parse("exists y E(x,y)")
print("desugared:", pretty(has_successor))
print("has successor:", [satisfies(world, has_successor, {"x": x}) for x in range(5)])

sink_free = parse("forall x (exists y E(x,y))")
print("every node has a successor:", satisfies(world, sink_free))

# The set a formula defines: tuples where its value is exactly 1.
print("\nout-neighbours of 2:", defined_set(world, parse("E(x,y)"), {"x": 2}, ("y",)))

# Conditions select which bound tuples feed the aggregation; when a condition
# set is empty the value is 0 by convention.
mean_over_successors = parse("am { E(y,x) : y : E(x,y) }")
print("backlink rate among successors:",
      [evaluate(world, mean_over_successors, {"x": x}) for x in range(5)])
