"""Random structures with independent per-tuple coins, and what follows from them.

The probability space at domain size n puts one independent Bernoulli coin of
a per-symbol probability on every potential tuple; all p = 1/2 recovers the
uniform distribution over structures.  On top of sampling, this module hosts

* ``estimate_equivalence`` -- the Monte Carlo check of asymptotic equivalence:
  per scheduled n, the fraction of sampled worlds where the two formulas stay
  within eps at every assignment (the sup is computed exactly by enumeration),
* ``analytic_alpha``      -- the exact limiting proportion of witnesses of a
  literal-conjunction guard, relative to a complete type, in this model,
* ``estimate_freq_params`` -- the empirical counterpart with standard errors,
  used as a cross-check oracle for ``analytic_alpha``.

Sampling is reproducible: streams are derived from (seed, n, world index) and
per-world statistics merge order-independently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .basic import LiteralConjunction, collapse_map, is_complete_type, literal_sat
from .errors import (
    CapExceededError,
    IncompleteTypeError,
    InconsistentGuardError,
    UnsupportedConditionError,
)
from .logic import Const, Formula, Signature, Structure, evaluate_grid, free_vars

_WORLD_TAG = 0x776f726c


@dataclass(frozen=True)
class IidModel:
    """A signature with one tuple-inclusion probability per symbol and a
    strictly increasing schedule of domain sizes."""

    signature: Signature
    probs: tuple[tuple[str, float], ...]
    schedule: tuple[int, ...] = (50, 100, 200)
    default_seed: int = 0

    def __init__(self, signature: Signature, probs: Mapping[str, float],
                 schedule: Sequence[int] = (50, 100, 200), default_seed: int = 0):
        probs = dict(probs)
        items = []
        for name, _ in signature.symbols:
            if name not in probs:
                raise KeyError(f"no probability given for symbol {name!r}")
            p = float(probs.pop(name))
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for {name!r} must lie in [0, 1], got {p}")
            items.append((name, p))
        if probs:
            raise KeyError(f"probabilities for symbols outside the signature: {sorted(probs)}")
        sched = tuple(int(n) for n in schedule)
        if not sched or any(n < 1 for n in sched):
            raise ValueError("the schedule must contain positive domain sizes")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("the schedule must be strictly increasing")
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "probs", tuple(items))
        object.__setattr__(self, "schedule", sched)
        object.__setattr__(self, "default_seed", int(default_seed))

    def prob(self, symbol: str) -> float:
        for name, p in self.probs:
            if name == symbol:
                return p
        raise KeyError(symbol)


def load_model(source: str | Path | Mapping) -> IidModel:
    """Read a model config from JSON or TOML (keys: signature, probs,
    schedule, seed) or from an equivalent mapping."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        text = path.read_bytes()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib  # Python >= 3.11
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(text.decode())
        else:
            data = json.loads(text)
    else:
        data = dict(source)
    signature = Signature({name: int(a) for name, a in data["signature"].items()})
    return IidModel(
        signature,
        {name: float(p) for name, p in data["probs"].items()},
        tuple(data.get("schedule", (50, 100, 200))),
        int(data.get("seed", 0)),
    )


def _seed_entropy(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def sample(model: IidModel, n: int, seed=0) -> Structure:
    """One random structure on {0,...,n-1}: every potential tuple of every
    symbol is included independently with that symbol's probability.

    Deterministic in (model, n, seed); `seed` may be an int or a tuple of
    ints (used to derive per-world streams).
    """
    if n < 1:
        raise ValueError("the domain must be nonempty")
    rng = np.random.default_rng(np.random.SeedSequence([_WORLD_TAG, *_seed_entropy(seed), n]))
    arrays = {}
    for name, arity in model.signature.symbols:
        p = model.prob(name)
        arrays[name] = rng.random((n,) * arity) < p
    return Structure.from_dense(model.signature, n, arrays)


@dataclass(frozen=True)
class EquivalenceReport:
    """Per scheduled n: the fraction of sampled worlds where the two formulas
    differ by at most eps at every assignment.  Raw data, no smoothing."""

    eps: float
    samples: int
    seed: int
    rows: tuple[tuple[int, float], ...]  # (n, fraction)

    def fraction_at(self, n: int) -> float:
        for size, frac in self.rows:
            if size == n:
                return frac
        raise KeyError(n)


def estimate_equivalence(phi: Formula, psi: Formula, model: IidModel, eps: float,
                         samples: int, seed: int = 0, max_free: int = 3) -> EquivalenceReport:
    """Monte Carlo estimate of asymptotic equivalence of `phi` and `psi`.

    The deviation within one world is the exact maximum of |phi - psi| over
    all assignments of the union of their free variables.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if samples < 1:
        raise ValueError("at least one sampled world per size is needed")
    variables = tuple(sorted(free_vars(phi) | free_vars(psi)))
    if len(variables) > max_free:
        raise CapExceededError(
            f"sup enumeration over {len(variables)} free variables exceeds the cap {max_free}"
        )
    rows = []
    for n in model.schedule:
        good = 0
        for w in range(samples):
            world = sample(model, n, (seed, w))
            dev = float(np.max(np.abs(
                evaluate_grid(world, phi, variables) - evaluate_grid(world, psi, variables)
            )))
            good += dev <= eps
        rows.append((n, good / samples))
    return EquivalenceReport(float(eps), int(samples), int(seed), tuple(rows))


# ---------------------------------------------------------------------------
# Frequency parameters: exact limits and empirical estimates
# ---------------------------------------------------------------------------

def analytic_alpha(guard: LiteralConjunction, theta: LiteralConjunction,
                   model: IidModel, yvars: Sequence[str],
                   xvars: Sequence[str] | None = None) -> float:
    """The limiting proportion of bound-variable tuples satisfying `guard`,
    among all tuples, given a point of complete type `theta`.

    The rules, exact in the iid model: a positive equality identifying a bound
    variable with any distinct variable confines the guard to an O(1/n)
    sliver, so the proportion is 0; inequalities hold on all but a vanishing
    fraction and contribute nothing; literals over free variables only are
    decided by `theta` (0 on contradiction); what remains is an independent
    coin per distinct collapsed atom touching a bound variable, giving a
    product of p or 1-p factors, with clashing signs on one atom giving 0.
    """
    if not literal_sat(guard):
        raise InconsistentGuardError(f"guard {guard} is unsatisfiable")
    if xvars is not None and not is_complete_type(theta, xvars, model.signature):
        raise IncompleteTypeError(f"{theta} is not a complete type over {tuple(xvars)}")
    yset = set(yvars)

    for u, v, positive in guard.eqs:
        if positive and u != v and (u in yset or v in yset):
            return 0.0

    x_eqs = tuple(l for l in guard.eqs if l[0] not in yset and l[1] not in yset)
    x_atoms = tuple(l for l in guard.atoms if not (set(l[1]) & yset))
    if not literal_sat(theta.conjoin(LiteralConjunction(x_eqs, x_atoms))):
        return 0.0

    rep = collapse_map(theta.conjoin(LiteralConjunction(guard.eqs, ())))
    signs: dict[tuple[str, tuple[str, ...]], bool] = {}
    for symbol, args, positive in guard.atoms:
        if not set(args) & yset:
            continue
        key = (symbol, tuple(rep.get(a, a) for a in args))
        if signs.setdefault(key, positive) != positive:
            return 0.0
    alpha = 1.0
    for (symbol, _), positive in signs.items():
        p = model.prob(symbol)
        alpha *= p if positive else 1.0 - p
    return alpha


@dataclass(frozen=True)
class FreqEstimate:
    """Empirical witness proportion for one guard: mean over (world, point)
    pairs, with a between-world standard error (worlds are the independent
    sampling unit)."""

    guard: LiteralConjunction
    alpha: float
    stderr: float
    worlds: int
    pairs: int


def _index_arrays(assignment: Mapping[str, int], yvars: tuple[str, ...], n: int):
    axes = {v: i for i, v in enumerate(yvars)}
    k = len(yvars)

    def idx(var: str):
        if var in axes:
            shape = [1] * k
            shape[axes[var]] = n
            return np.arange(n).reshape(shape)
        return assignment[var]

    return idx


def _guard_mask(structure: Structure, guard: LiteralConjunction,
                assignment: Mapping[str, int], yvars: tuple[str, ...]) -> np.ndarray:
    """Boolean array over the bound-variable grid where the guard holds."""
    n = structure.domain_size
    shape = (n,) * len(yvars)
    idx = _index_arrays(assignment, yvars, n)
    mask = np.ones(shape, dtype=bool)
    for u, v, positive in guard.eqs:
        vals = idx(u) == idx(v)
        mask &= vals if positive else ~np.asarray(vals)
    for symbol, args, positive in guard.atoms:
        vals = structure.dense(symbol)[tuple(idx(a) for a in args)]
        mask &= vals if positive else ~np.asarray(vals)
    return np.broadcast_to(mask, shape)


def estimate_freq_params(guards: Sequence[LiteralConjunction], chi: Formula | None,
                         theta: LiteralConjunction, model: IidModel, n: int,
                         samples: int, seed: int = 0, *, yvars: Sequence[str],
                         xvars: Sequence[str] = ()) -> list[FreqEstimate]:
    """Empirical witness proportions of the guards relative to `chi` and `theta`.

    For every sampled world and every point satisfying `theta`, measures the
    fraction of bound tuples satisfying each guard among those satisfying
    `chi`; worlds without qualifying points (or with an empty `chi` set) are
    skipped rather than counted as zero.  Only the constant-true condition
    ships; any other `chi` is rejected.
    """
    if chi is not None and not (isinstance(chi, Const) and chi.value == 1.0):
        raise UnsupportedConditionError(
            "only the constant-true condition is available in this build"
        )
    yvars = tuple(yvars)
    xvars = tuple(xvars)
    per_world_means: list[list[float]] = [[] for _ in guards]
    pairs = 0
    worlds_used = 0
    for w in range(samples):
        world = sample(model, n, (seed, w))
        points = []
        for row in product(range(n), repeat=len(xvars)):
            assignment = dict(zip(xvars, row))
            if theta.holds(world, assignment):
                points.append(assignment)
        if not points:
            continue
        worlds_used += 1
        pairs += len(points)
        denom = world.domain_size ** len(yvars)
        sums = [0.0 for _ in guards]
        for assignment in points:
            for gi, guard in enumerate(guards):
                count = int(np.count_nonzero(_guard_mask(world, guard, assignment, yvars)))
                sums[gi] += count / denom
        for gi in range(len(guards)):
            per_world_means[gi].append(sums[gi] / len(points))
    out = []
    for guard, means in zip(guards, per_world_means):
        arr = np.asarray(means, dtype=np.float64)
        mean = float(arr.mean()) if arr.size else float("nan")
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else float("inf")
        out.append(FreqEstimate(guard, mean, stderr, worlds_used, pairs))
    return out
