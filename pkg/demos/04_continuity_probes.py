"""Probing local continuity of aggregation functions.

Frequency parameters (c_j, alpha_j) describe where sequence entries cluster
and with what limiting proportions.  The probes generate adversarial pairs of
such sequences at growing lengths and watch the output gap: means and
products shrug off the variation, thresholds flip at their boundaries, and
extrema are betrayed by values of vanishing proportion.

Probes are falsifiers: "pass" means no counterexample was found under the
budget, not a proof of continuity.
"""

from fractions import Fraction

from agglogic import (
    AM, MAX, FreqParams, ProbeConfig, ct_probe, up_probe, nudge,
    proportional_aggregator,
)

cfg = ProbeConfig(seed=1)


def show(label, agg, params):
    ct = ct_probe(agg, params, cfg)
    up = up_probe(agg, params, cfg)
    devs = ", ".join(f"{n}:{d:.4f}" for n, d in ct.deviations)
    print(f"{label:42s} ct={ct.verdict:6s} up={up.verdict:6s}  gaps {devs}")
    return ct


# a benign profile: entries cluster at 0.25 and 0.7 in proportions 0.4 / 0.6
benign = FreqParams(((0.25, 0.4), (0.7, 0.6)))
show("mean at a generic profile", AM, benign)
show("max, every value has positive mass", MAX, FreqParams(((0.25, 0.4), (0.7, 0.6))))

# max is discontinuous when a vanishing proportion sits above the bulk:
# one exact entry at 1 flips the output from 0 to 1
ct = show("max, mass-0 class at the top", MAX, FreqParams(((0.0, 1.0), (1.0, 0.0))))
ce = ct.counterexample
print("  counterexample gap:", ce.gap,
      " exact ones per side:", [sum(v == 1.0 for v in s) for s in (ce.seqs_p[0], ce.seqs_q[0])])

# the proportional quantifier's adapter flips exactly when the mass at value 1
# equals the threshold; one count more or less crosses the line
mass = FreqParams(((1.0, 0.3), (0.0, 0.7)))
show("proportional beta=0.3 at 1-mass 0.3", proportional_aggregator(Fraction(3, 10)), mass)
show("proportional beta=0.4 at 1-mass 0.3", proportional_aggregator(Fraction(2, 5)), mass)

# a failing threshold can be nudged off the boundary
moved = nudge(proportional_aggregator(Fraction(3, 10)), mass, cfg)
print("\nafter nudging, beta =", moved.param("beta"))
show("nudged proportional at the same profile", moved, mass)
