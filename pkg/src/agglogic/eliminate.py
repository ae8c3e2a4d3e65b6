"""Bottom-up rewriting of formulas into guarded constant formulas.

Atoms and equalities become exact two-clause guarded forms, connectives refine
partitions exactly, and each aggregation node is eliminated asymptotically:
for every complete type over the node's free variables, the limiting witness
proportions of the inner clauses are computed analytically in the iid model,
merged by clause value into frequency parameters, checked for continuity of
the aggregation function by both probes, and replaced by the limiting value
(closed form when the catalog registers one, doubling extrapolation with
Aitken acceleration otherwise).

A continuity failure aborts the rewrite with the failing type, parameters and
probe counterexample; callers may opt in to nudging a tunable threshold
instead.  Every emitted value carries its provenance in the trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .basic import (
    BasicFormula,
    LiteralConjunction,
    TOP_GUARD,
    atom_to_basic,
    combine_connective,
    complete_types,
)
from .catalog import AggregatorDef
from .continuity import (
    ProbeConfig,
    largest_remainder_counts,
    nudge,
    probe_both,
)
from .errors import (
    CapExceededError,
    ContinuityViolationError,
    NotStabilizedError,
    UnsupportedConditionError,
)
from .logic import Agg, Atom, Conn, Const, Eq, Formula, free_vars
from .seqmetrics import FreqParams
from .worlds import EquivalenceReport, IidModel, analytic_alpha, estimate_equivalence

_EXTRAPOLATION_LENGTHS = tuple(2 ** k for k in range(10, 17))
_STABILITY_TOL = 1e-3
_MASS_TOL = 1e-9


@dataclass(frozen=True)
class EliminateOptions:
    """Caps, probe budget, and the optional threshold-nudging escape hatch."""

    max_free: int = 3
    max_bound: int = 2
    probe: ProbeConfig = ProbeConfig()
    nudge: bool = False
    nudge_steps: tuple[Fraction, ...] = (
        Fraction(1, 1000), Fraction(1, 500), Fraction(1, 200),
        Fraction(1, 100), Fraction(1, 50), Fraction(1, 20),
    )


@dataclass(frozen=True)
class TraceEntry:
    path: tuple[int, ...]
    kind: str  # "constant" | "atom" | "connective" | "aggregation"
    detail: dict

    def record(self) -> dict:
        return {"path": list(self.path), "kind": self.kind, **self.detail}


@dataclass
class EliminationTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, path: tuple[int, ...], kind: str, detail: dict) -> None:
        self.entries.append(TraceEntry(path, kind, detail))

    def records(self) -> list[dict]:
        # assembled in AST order regardless of how subtrees were processed
        return [e.record() for e in sorted(self.entries, key=lambda e: e.path)]


def _exact_sequence(params: FreqParams, n: int) -> np.ndarray:
    counts = largest_remainder_counts(params.proportions(), n)
    blocks = [np.full(count, c) for (c, _), count in zip(params.pairs, counts) if count > 0]
    return np.concatenate(blocks)


def _aitken(d1: float, d2: float, d3: float) -> float:
    denom = (d3 - d2) - (d2 - d1)
    if abs(denom) < 1e-300:
        return d3
    return d3 - (d3 - d2) ** 2 / denom


def limit_value(agg: AggregatorDef, params) -> float:
    """The limiting value of `agg` on sequences drifting to `params`.

    Catalog closed forms are used when registered.  Otherwise the aggregator
    is evaluated on exact-proportion sequences at doubling lengths; the value
    is accepted when the top doubling step moves less than 1e-3, with Aitken
    acceleration as a fallback for clean power-law decay (the length-power
    aggregators), and NotStabilized reported when neither settles.
    """
    if isinstance(params, FreqParams):
        params = (params,)
    params = tuple(params)
    if len(params) != agg.arity:
        raise ValueError(f"need one parameter set per argument, got {len(params)}")
    if agg.limit_rule is not None:
        return float(agg.limit_rule(params))
    ds = [
        agg(*[_exact_sequence(p, n) for p in params])
        for n in _EXTRAPOLATION_LENGTHS
    ]
    if abs(ds[-1] - ds[-2]) < _STABILITY_TOL:
        return ds[-1]
    e1 = _aitken(ds[-4], ds[-3], ds[-2])
    e2 = _aitken(ds[-3], ds[-2], ds[-1])
    # agreement of the two accelerated estimates is not enough (a period-two
    # oscillation agrees on its midpoint); the residuals must also shrink
    shrinking = abs(ds[-1] - e2) <= 0.95 * abs(ds[-3] - e2) + 1e-9
    if abs(e2 - e1) < _STABILITY_TOL and shrinking:
        return min(1.0, max(0.0, e2))
    raise NotStabilizedError(
        f"limit of {agg.name!r} did not stabilize: doubling values {ds}"
    )


def frequency_params(inner: BasicFormula, theta: LiteralConjunction, model: IidModel,
                     yvars: Sequence[str]) -> FreqParams:
    """Frequency parameters of one guarded inner formula relative to a type.

    Clause guards sharing a value pool their limiting proportions.  The
    proportions of a partition-form inner must total 1; the check is asserted
    with the discrepancy reported, then float dust is normalized away.
    """
    masses: dict[float, float] = {}
    for guard, value in inner.clauses:
        alpha = analytic_alpha(guard, theta, model, yvars)
        masses[value] = masses.get(value, 0.0) + alpha
    total = sum(masses.values())
    assert abs(total - 1.0) <= _MASS_TOL, (
        f"guard masses sum to {total!r} (off by {total - 1.0:.3e}) for type {theta}"
    )
    pairs = tuple(sorted((c, a / total) for c, a in masses.items()))
    return FreqParams(pairs)


def eliminate_aggregation(agg: AggregatorDef, inners: Sequence[BasicFormula],
                          yvars: Sequence[str], xvars: Sequence[str], model: IidModel,
                          options: EliminateOptions | None = None,
                          path: tuple[int, ...] = (),
                          probe_cache: dict | None = None) -> tuple[BasicFormula, dict]:
    """Replace an aggregation over guarded inner formulas by a guarded constant.

    One clause per complete type over `xvars`: its value is the continuity-
    certified limit of the aggregation function at that type's frequency
    parameters.  With the constant-true condition and at least one bound
    variable the witness set is never empty, so no empty-condition clauses
    are needed.
    """
    options = options or EliminateOptions()
    cache = probe_cache if probe_cache is not None else {}
    if any(not inner.partition for inner in inners):
        raise ValueError("inner formulas must be in partition form")
    types = complete_types(tuple(xvars), model.signature, options.max_free)
    clauses = []
    per_type = []
    for theta in types:
        params = tuple(frequency_params(inner, theta, model, yvars) for inner in inners)
        key = (agg.name, agg.params, tuple(p.pairs for p in params))
        if key not in cache:
            cache[key] = probe_both(agg, params, options.probe)
        ct_report, up_report = cache[key]
        if not (ct_report.passed and up_report.passed):
            failing = ct_report if not ct_report.passed else up_report
            raise ContinuityViolationError(
                f"aggregator {agg.name!r} is not continuity-certified at type {theta} "
                f"(ct: {ct_report.verdict}, up: {up_report.verdict})",
                guard=theta, params=params, report=failing, path=path,
            )
        value = limit_value(agg, params)
        clauses.append((theta, value))
        per_type.append({
            "type": theta,
            "params": [p.pairs for p in params],
            "ct": ct_report.verdict,
            "up": up_report.verdict,
            "value": value,
            "method": "closed_form" if agg.limit_rule is not None else "extrapolated",
        })
    out = BasicFormula(tuple(clauses), tuple(xvars), partition=True)
    return out, {"aggregator": agg.name, "types": per_type}


def eliminate(f: Formula, model: IidModel, options: EliminateOptions | None = None
              ) -> tuple[BasicFormula, EliminationTrace]:
    """Rewrite `f` bottom-up into a guarded constant formula.

    Constants, equalities and atoms convert exactly; connectives refine
    exactly; aggregations are eliminated asymptotically.  Conditions other
    than the constant 1 are rejected.  Continuity failures propagate with the
    AST path unless nudging is enabled and the aggregator has a tunable
    threshold, in which case the perturbation is recorded in the trace.
    """
    options = options or EliminateOptions()
    trace = EliminationTrace()
    cache: dict = {}
    result = _eliminate(f, model, options, (), trace, cache)
    return result, trace


def _eliminate(f: Formula, model: IidModel, options: EliminateOptions,
               path: tuple[int, ...], trace: EliminationTrace, cache: dict) -> BasicFormula:
    if isinstance(f, Const):
        out = BasicFormula(((TOP_GUARD, f.value),), ())
        trace.add(path, "constant", {"value": f.value})
        return out
    if isinstance(f, (Eq, Atom)):
        out = atom_to_basic(f)
        trace.add(path, "atom", {"clauses": len(out.clauses)})
        return out
    if isinstance(f, Conn):
        children = [
            _eliminate(child, model, options, path + (i,), trace, cache)
            for i, child in enumerate(f.args)
        ]
        out = combine_connective(f.conn, children)
        trace.add(path, "connective", {
            "name": f.conn.name,
            "refinement": [len(c.clauses) for c in children],
            "clauses": len(out.clauses),
        })
        return out
    if isinstance(f, Agg):
        for cond in f.conditions:
            if not (isinstance(cond, Const) and cond.value == 1.0):
                raise UnsupportedConditionError(
                    "only the constant-true condition is available in this build; "
                    f"got {cond!r} at path {path}"
                )
        if len(f.bound) > options.max_bound:
            raise CapExceededError(
                f"{len(f.bound)} bound variables exceed the cap {options.max_bound}"
            )
        xvars = tuple(sorted(free_vars(f)))
        if len(xvars) > options.max_free:
            raise CapExceededError(
                f"{len(xvars)} free variables exceed the cap {options.max_free}"
            )
        inners = [
            _eliminate(g, model, options, path + (i,), trace, cache)
            for i, g in enumerate(f.inner)
        ]
        agg = f.agg
        try:
            out, detail = eliminate_aggregation(
                agg, inners, f.bound, xvars, model, options, path, cache
            )
        except ContinuityViolationError as err:
            if not (options.nudge and agg.tunable is not None and agg.rebuild is not None):
                raise
            nudged = nudge(agg, err.params, options.probe, options.nudge_steps)
            out, detail = eliminate_aggregation(
                nudged, inners, f.bound, xvars, model, options, path, cache
            )
            detail["nudged"] = {
                "parameter": agg.tunable,
                "from": str(agg.param(agg.tunable)),
                "to": str(nudged.param(nudged.tunable)),
            }
        trace.add(path, "aggregation", detail)
        return out
    raise TypeError(f"not a formula: {f!r}")


def validate(f: Formula, result: BasicFormula, model: IidModel, eps: float,
             samples: int, seed: int = 0) -> EquivalenceReport:
    """Monte Carlo check that `result` tracks `f` on sampled random worlds."""
    return estimate_equivalence(f, result.to_formula(), model, eps, samples, seed)
