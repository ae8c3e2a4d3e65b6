"""End-to-end: rewriting aggregations into guarded constants and checking the
rewrite on random structures.

With one independent coin per potential tuple, the witness proportions of
literal-conjunction guards concentrate, so an aggregation of a guarded inner
formula settles to a single limiting value per complete type of its free
variables, provided the aggregation function is continuous at the derived
frequency parameters.  The engine computes those parameters analytically,
certifies continuity with both probes, and emits one (type -> value) clause
per type; Monte Carlo validation then measures how often the original and the
rewrite stay close on sampled worlds.
"""

from agglogic import (
    IidModel, Signature, EliminateOptions, ProbeConfig, eliminate, parse,
    pretty, validate,
)
from agglogic.errors import ContinuityViolationError

sig = Signature({"E": 2})
model = IidModel(sig, {"E": 0.3}, (50, 100, 200))
options = EliminateOptions(probe=ProbeConfig(seed=0))


def demo(text, eps):
    phi = parse(text)
    result, trace = eliminate(phi, model, options)
    print(f"\n{text}")
    print("  rewrites to:", pretty(result.to_formula()))
    for record in trace.records():
        if record["kind"] == "aggregation":
            for item in record["types"]:
                print(f"    type params {item['params']}  ->  {item['value']:.6g} "
                      f"({item['method']}, ct {item['ct']}, up {item['up']})")
    report = validate(phi, result, model, eps=eps, samples=100, seed=1)
    print(f"  validation at eps={eps}: " +
          ", ".join(f"n={n}: {frac:.2f}" for n, frac in report.rows))


# the mean out-density settles to the edge probability
demo("am { E(x,y) : y : true }", eps=0.25)

# almost surely every node has a successor, so the max settles to 1
demo("max { E(x,y) : y : true }", eps=0.01)

# connectives combine exactly on top of eliminated parts
demo("not max { E(x,y) : y : true }", eps=0.01)

# at the threshold the proportional quantifier has no limit: the engine
# refuses with the failing type, parameters and a concrete counterexample
try:
    eliminate(parse("proportional[beta=0.3] { E(x,y) : y : true }"), model, options)
except ContinuityViolationError as err:
    print("\nproportional[beta=0.3] over density-0.3 edges:")
    print("  refused:", err.args[0])
    print("  failing parameters:", [p.pairs for p in err.params])

# larger domains push the 0.05-closeness fraction toward 1; the union bound
# over points needs a domain around two thousand before it bites
big = IidModel(sig, {"E": 0.3}, (2000,))
phi = parse("am { E(x,y) : y : true }")
result, _ = eliminate(phi, big, options)
report = validate(phi, result, big, eps=0.05, samples=30, seed=2)
print(f"\nam rewrite at eps=0.05, n=2000: fraction {report.fraction_at(2000):.2f}")
