"""Empirical continuity probes for aggregation functions.

Given frequency parameters (values c_j with limiting proportions alpha_j), the
probes generate pairs of sequences that cluster at the c_j with proportions
near alpha_j and watch whether the aggregation function's outputs stay close
as lengths grow.  Two probes are offered:

* ``ct_probe`` compares pairs of convergence-testing sequences built with the
  same parameters but adversarially varied rounding and in-interval noise.
* ``up_probe`` checks uniform point continuity: closeness on exact-support
  sequences at small unordered-L1 distance, and robustness of exact-support
  sequences to small pointwise perturbations.

Both are falsifiers, not decision procedures: "pass" means no counterexample
was found under the configured budget.  All randomness is derived from
(seed, length, trial index), so reports are reproducible and trials could run
in any order or concurrently.

Every failure the probes are required to detect is count-driven (a rounding
flip at a threshold, or an extra exact entry in a zero-proportion class), so
in-interval noise is never applied at the endpoint values 0 and 1: entries of
an endpoint class stay exactly 0 or 1.  Perturbing them instead would probe a
strictly stronger property that the threshold-style aggregation functions
(proportional, Rescher, Hartig) genuinely lack away from their advertised
failure points, drowning the intended classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .catalog import AggregatorDef
from .errors import AgglogicError, NudgeFailedError
from .seqmetrics import FreqParams

_CT_TAG = 0x63746374
_UP_TAG = 0x75707072
_SEQ_TAG = 0x63747365


@dataclass(frozen=True)
class CTSeqSpec:
    """Recipe for one convergence-testing sequence family.

    Entries of the n-th sequence sit within radius r(n) = scale * n^(-exponent)
    of their class values (clipped so intervals around distinct values stay
    disjoint), with class counts assigned by largest remainder.
    """

    params: FreqParams
    lengths: tuple[int, ...] = (64, 256, 1024, 4096, 16384)
    noise_exponent: float = 0.5
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        lengths = tuple(int(n) for n in self.lengths)
        if any(b <= a for a, b in zip(lengths, lengths[1:])) or not lengths:
            raise ValueError("lengths must be strictly increasing and nonempty")
        object.__setattr__(self, "lengths", lengths)

    def radius(self, n: int) -> float:
        return _clip_radius(self.params, self.noise_scale * n ** (-self.noise_exponent))


def _clip_radius(params: FreqParams, radius: float) -> float:
    values = sorted(params.values())
    if len(values) > 1:
        gap = min(b - a for a, b in zip(values, values[1:]))
        radius = min(radius, gap / 4.0)
    return max(radius, 0.0)


def largest_remainder_counts(proportions: Sequence[float], n: int) -> list[int]:
    """Integer class counts summing to n with |count_j - p_j*n| < 1."""
    raw = [p * n for p in proportions]
    counts = [math.floor(x) for x in raw]
    leftover = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda j: (-(raw[j] - counts[j]), j))
    for j in order[:leftover]:
        counts[j] += 1
    return counts


def make_ct_sequence(spec: CTSeqSpec, n: int) -> np.ndarray:
    """One sequence of the family at scheduled length n, positions shuffled."""
    if n not in spec.lengths:
        raise ValueError(f"length {n} is not in the schedule {spec.lengths}")
    if spec.params.k > n:
        raise ValueError(f"{spec.params.k} classes cannot all be represented in length {n}")
    rng = np.random.default_rng(np.random.SeedSequence([_SEQ_TAG, spec.seed, n]))
    counts = largest_remainder_counts(spec.params.proportions(), n)
    radius = spec.radius(n)
    blocks = []
    for (c, _), count in zip(spec.params.pairs, counts):
        if count == 0:
            continue
        if radius == 0.0:
            blocks.append(np.full(count, c))
        else:
            lo, hi = max(0.0, c - radius), min(1.0, c + radius)
            blocks.append(rng.uniform(lo, hi, count))
    seq = np.concatenate(blocks)
    rng.shuffle(seq)
    return seq


# ---------------------------------------------------------------------------
# Probe configuration and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeConfig:
    """Budget and thresholds shared by both probes.

    The probe noise radius shrinks like n^(-3/4): with the default tolerance
    1e-2, the radius at the two largest scheduled lengths must sit well below
    the tolerance or genuinely continuous extremum aggregators (max, min)
    would never pass, and n^(-1/2) is too slow for that.
    """

    lengths: tuple[int, ...] = (64, 256, 1024, 4096, 16384)
    trials: int = 32
    tol: float = 1e-2
    fail_threshold: float = 0.1
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        lengths = tuple(int(n) for n in self.lengths)
        if len(lengths) < 3:
            raise ValueError("probes need a schedule of at least 3 lengths")
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ValueError("lengths must be strictly increasing")
        object.__setattr__(self, "lengths", lengths)

    def radius(self, params: FreqParams, n: int) -> float:
        return _clip_radius(params, n ** (-self.noise_exponent))


@dataclass(frozen=True)
class Counterexample:
    """A witnessing pair of argument tuples with far-apart outputs."""

    seqs_p: tuple[tuple[float, ...], ...]
    seqs_q: tuple[tuple[float, ...], ...]
    value_p: float
    value_q: float

    @property
    def gap(self) -> float:
        return abs(self.value_p - self.value_q)


@dataclass(frozen=True)
class ProbeReport:
    kind: str  # "ct" or "up"
    aggregator: str
    verdict: str  # "pass" | "fail" | "inconclusive"
    deviations: tuple[tuple[int, float], ...]  # (length, max |F(p)-F(q)|), ascending
    counterexample: Counterexample | None
    trials: int
    lengths: tuple[int, ...]
    seed: int

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def max_deviation(self) -> float:
        return self.deviations[-1][1]


def _verdict(devs: list[tuple[int, float]], cfg: ProbeConfig) -> str:
    last = devs[-1][1]
    second = devs[-2][1]
    first = devs[0][1]
    if last >= cfg.fail_threshold:
        return "fail"
    if last <= cfg.tol and second <= cfg.tol and last <= first + cfg.tol:
        return "pass"
    return "inconclusive"


# ---------------------------------------------------------------------------
# Trial plans: count biases plus noise placement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ArgPlan:
    bias: tuple[tuple[int, int], ...] = ()  # (class index, +-1)
    noisy: tuple[int, ...] = ()             # class indices drawing in-interval values


_CANONICAL = _ArgPlan()


def _interior_classes(params: FreqParams) -> tuple[int, ...]:
    return tuple(j for j, (c, _) in enumerate(params.pairs) if c not in (0.0, 1.0))


def _deterministic_plans(params: tuple[FreqParams, ...]):
    """Adversarial plan pairs: rounding flips at every class, then noise."""
    arity = len(params)
    base = tuple(_CANONICAL for _ in range(arity))

    def with_arg(plan_tuple, i, plan):
        out = list(plan_tuple)
        out[i] = plan
        return tuple(out)

    pairs = [(base, base)]
    for i in range(arity):
        for j in range(params[i].k):
            up = with_arg(base, i, _ArgPlan(bias=((j, 1),)))
            down = with_arg(base, i, _ArgPlan(bias=((j, -1),)))
            pairs.append((up, down))
            pairs.append((up, base))
    noisy_all = tuple(_ArgPlan(noisy=_interior_classes(p)) for p in params)
    pairs.append((base, noisy_all))
    pairs.append((noisy_all, noisy_all))
    return pairs


def _random_plan(params: tuple[FreqParams, ...], rng) -> tuple[_ArgPlan, ...]:
    out = []
    for p in params:
        bias = tuple(
            (j, int(d)) for j, d in enumerate(rng.integers(-1, 2, p.k)) if d != 0
        )
        interior = _interior_classes(p)
        noisy = tuple(j for j in interior if rng.random() < 0.5)
        out.append(_ArgPlan(bias=bias, noisy=noisy))
    return tuple(out)


def _biased_counts(params: FreqParams, n: int, plan: _ArgPlan) -> list[int]:
    counts = largest_remainder_counts(params.proportions(), n)
    for j, delta in plan.bias:
        if delta > 0:
            donors = [i for i in range(len(counts)) if i != j and counts[i] > 0]
            if not donors:
                continue
            donor = max(donors, key=lambda i: (counts[i], -i))
            counts[j] += 1
            counts[donor] -= 1
        elif counts[j] > 0:
            takers = [i for i in range(len(counts)) if i != j]
            if not takers:
                continue
            taker = max(takers, key=lambda i: (counts[i], -i))
            counts[j] -= 1
            counts[taker] += 1
    return counts


def _realize(params: FreqParams, n: int, plan: _ArgPlan, radius: float, rng) -> np.ndarray:
    """Materialize one sequence; noisy classes draw uniformly in their interval.

    Endpoint classes (value exactly 0 or 1) always stay exact.
    """
    counts = _biased_counts(params, n, plan)
    blocks = []
    noisy = set(plan.noisy)
    for j, ((c, _), count) in enumerate(zip(params.pairs, counts)):
        if count == 0:
            continue
        if j in noisy and c not in (0.0, 1.0) and radius > 0.0:
            lo, hi = max(0.0, c - radius), min(1.0, c + radius)
            blocks.append(rng.uniform(lo, hi, count))
        else:
            blocks.append(np.full(count, c))
    return np.concatenate(blocks)


def _perturb(seq_parts: list[tuple[float, np.ndarray]], radius: float, rng) -> np.ndarray:
    """Pointwise perturbation of an exact-support sequence, endpoints kept exact."""
    out = []
    for c, block in seq_parts:
        if c in (0.0, 1.0) or radius == 0.0:
            out.append(block)
        else:
            shifted = block + rng.uniform(-radius, radius, block.size)
            out.append(np.clip(shifted, 0.0, 1.0))
    return np.concatenate(out)


def _exact_parts(params: FreqParams, n: int, plan: _ArgPlan) -> list[tuple[float, np.ndarray]]:
    counts = _biased_counts(params, n, plan)
    return [
        (c, np.full(count, c))
        for (c, _), count in zip(params.pairs, counts) if count > 0
    ]


def _as_params_tuple(params, arity: int) -> tuple[FreqParams, ...]:
    if isinstance(params, FreqParams):
        params = (params,)
    params = tuple(params)
    if len(params) != arity:
        raise ValueError(f"need one parameter set per argument: arity {arity}, got {len(params)}")
    return params


def _trial_descriptors(params: tuple[FreqParams, ...], cfg: ProbeConfig, kind: str):
    """The per-length trial list: (mode, plan pair or None for random).

    For the convergence-test probe every trial compares two full realizations.
    For the uniform-point probe every deterministic plan pair is exercised
    under BOTH conditions: once as exact-support sequences at small
    unordered-L1 distance (where rounding flips must show up) and once as an
    exact-support base against its pointwise perturbation.
    """
    plans = _deterministic_plans(params)
    if kind == "ct":
        trials = [("ct", pair) for pair in plans]
        fill_modes = ("ct",)
    else:
        trials = [("exact", pair) for pair in plans]
        trials += [("perturb", pair) for pair in plans]
        fill_modes = ("exact", "perturb")
    i = 0
    while len(trials) < cfg.trials:
        trials.append((fill_modes[i % len(fill_modes)], None))
        i += 1
    return trials


def _run_trials(agg: AggregatorDef, params: tuple[FreqParams, ...], cfg: ProbeConfig,
                kind: str, tag: int):
    devs: list[tuple[int, float]] = []
    counterexample = None
    trials = _trial_descriptors(params, cfg, kind)
    for n in cfg.lengths:
        worst = 0.0
        worst_pair = None
        for t, (mode, pair) in enumerate(trials):
            rng = np.random.default_rng(np.random.SeedSequence([tag, cfg.seed, n, t]))
            if pair is not None:
                plan_p, plan_q = pair
            else:
                plan_p, plan_q = _random_plan(params, rng), _random_plan(params, rng)
            if mode == "ct":
                radius = [cfg.radius(p, n) for p in params]
                seqs_p = [_realize(p, n, pl, r, rng) for p, pl, r in zip(params, plan_p, radius)]
                seqs_q = [_realize(p, n, pl, r, rng) for p, pl, r in zip(params, plan_q, radius)]
            elif mode == "exact":
                # exact-support pairs at small unordered-L1 distance; vary lengths
                n_q = n + max(1, n // 8) if t % 2 == 0 else n
                seqs_p = [np.concatenate([b for _, b in _exact_parts(p, n, pl)])
                          for p, pl in zip(params, plan_p)]
                seqs_q = [np.concatenate([b for _, b in _exact_parts(p, n_q, pl)])
                          for p, pl in zip(params, plan_q)]
            else:
                # equal-length pairs at small sup distance from an exact-support base
                seqs_p, seqs_q = [], []
                for p, pl in zip(params, plan_p):
                    parts = _exact_parts(p, n, pl)
                    seqs_p.append(np.concatenate([b for _, b in parts]))
                    seqs_q.append(_perturb(parts, cfg.radius(p, n), rng))
            gap = abs(agg(*seqs_p) - agg(*seqs_q))
            if gap > worst:
                worst = gap
                worst_pair = (seqs_p, seqs_q)
        devs.append((n, worst))
        if n == cfg.lengths[-1] and worst_pair is not None and worst >= cfg.fail_threshold:
            counterexample = Counterexample(
                tuple(tuple(map(float, s)) for s in worst_pair[0]),
                tuple(tuple(map(float, s)) for s in worst_pair[1]),
                float(agg(*worst_pair[0])),
                float(agg(*worst_pair[1])),
            )
    verdict = _verdict(devs, cfg)
    if verdict != "fail":
        counterexample = None
    return ProbeReport(
        kind=kind,
        aggregator=agg.name,
        verdict=verdict,
        deviations=tuple(devs),
        counterexample=counterexample,
        trials=len(trials),
        lengths=cfg.lengths,
        seed=cfg.seed,
    )


def ct_probe(agg: AggregatorDef, params, config: ProbeConfig | None = None) -> ProbeReport:
    """Probe convergence-test continuity of `agg` at the given parameters.

    `params` is one FreqParams per aggregator argument (a bare FreqParams is
    accepted for unary aggregators).
    """
    cfg = config or ProbeConfig()
    return _run_trials(agg, _as_params_tuple(params, agg.arity), cfg, "ct", _CT_TAG)


def up_probe(agg: AggregatorDef, params, config: ProbeConfig | None = None) -> ProbeReport:
    """Probe uniform point continuity of `agg` at the given parameters."""
    cfg = config or ProbeConfig()
    return _run_trials(agg, _as_params_tuple(params, agg.arity), cfg, "up", _UP_TAG)


def probe_both(agg: AggregatorDef, params, config: ProbeConfig | None = None
               ) -> tuple[ProbeReport, ProbeReport]:
    """Run both probes; their verdicts are expected to agree and any
    disagreement is for the caller to surface, not resolve."""
    return ct_probe(agg, params, config), up_probe(agg, params, config)


_DEFAULT_STEPS = (
    Fraction(1, 1000), Fraction(1, 500), Fraction(1, 200),
    Fraction(1, 100), Fraction(1, 50), Fraction(1, 20),
)


def nudge(agg: AggregatorDef, params, config: ProbeConfig | None = None,
          steps: Sequence[Fraction] = _DEFAULT_STEPS) -> AggregatorDef:
    """Perturb a tunable threshold until the probes pass.

    Returns `agg` unchanged when it already passes; otherwise tries each step
    in order (positive then negative) and returns the first rebuilt aggregator
    that passes both probes.
    """
    cfg = config or ProbeConfig()
    if agg.tunable is None or agg.rebuild is None:
        raise AgglogicError(f"aggregator {agg.name!r} has no tunable threshold")
    params_tuple = _as_params_tuple(params, agg.arity)
    if all(r.passed for r in probe_both(agg, params_tuple, cfg)):
        return agg
    base = agg.param(agg.tunable)
    for step in steps:
        for sign in (1, -1):
            candidate_value = base + sign * Fraction(step)
            if not 0 < candidate_value < 1:
                continue
            candidate = agg.rebuild(**{agg.tunable: candidate_value})
            if all(r.passed for r in probe_both(candidate, params_tuple, cfg)):
                return candidate
    raise NudgeFailedError(
        f"no perturbation of {agg.tunable!r} within {steps!r} makes {agg.name!r} pass"
    )
