"""Registry of continuous connectives, aggregation functions, and quantifier adapters.

Connectives are continuous maps [0,1]^k -> [0,1]; the built-in ones carry the
usual many-valued (Lukasiewicz) semantics plus multiplication.  Aggregation
functions map k-tuples of finite nonempty [0,1]-sequences to [0,1] and must be
symmetric in each argument; evaluation sorts every input sequence before the
kernel runs, which makes the symmetry hold bit-for-bit.

Cardinality-invariant set quantifiers (Mostowski style) are represented by a
predicate on (domain size, set sizes) and turned into 0/1-valued aggregation
functions that count entries exactly equal to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ArityMismatchError, EmptySequenceError

ValueSeq = Sequence[float]

_RANGE_SLACK = 1e-12


def as_value_seq(entries: ValueSeq) -> np.ndarray:
    """Validate and normalize one aggregation argument.

    Rejects empty input and entries outside [0,1]; returns a sorted float64
    array (ascending).
    """
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptySequenceError("aggregation arguments must be nonempty 1-d sequences")
    if float(arr.min()) < -_RANGE_SLACK or float(arr.max()) > 1.0 + _RANGE_SLACK:
        raise ValueError("sequence entries must lie in [0, 1]")
    return np.sort(np.clip(arr, 0.0, 1.0))


@dataclass(frozen=True)
class ConnectiveDef:
    """A named continuous connective [0,1]^arity -> [0,1].

    `lipschitz` is the documented modulus used by the sampling spot-check of
    continuity; user-supplied connectives may leave it None, in which case
    continuity is taken on trust.  Kernels should accept numpy arrays as well
    as scalars so the grid evaluator can broadcast them.
    """

    name: str
    arity: int
    fn: Callable[..., float] = field(compare=False)
    lipschitz: float | None = field(default=None, compare=False)

    def __call__(self, *values: float) -> float:
        if len(values) != self.arity:
            raise ArityMismatchError(
                f"connective {self.name!r} has arity {self.arity}, got {len(values)} arguments"
            )
        out = float(self.fn(*[float(v) for v in values]))
        if not (-_RANGE_SLACK <= out <= 1.0 + _RANGE_SLACK):
            raise ValueError(f"connective {self.name!r} left [0, 1]: {out!r}")
        return min(1.0, max(0.0, out))


@dataclass(frozen=True)
class AggregatorDef:
    """A named aggregation function on k-tuples of nonempty [0,1]-sequences.

    `params` holds optional named parameters (exact rationals), `tunable`
    names the one that `continuity.nudge` may perturb, `rebuild` reconstructs
    the definition with new parameters, and `limit_rule`, when present, is the
    closed-form limit used by the elimination engine: it receives one
    frequency-parameter set per argument and returns the limiting value.
    """

    name: str
    arity: int
    fn: Callable[..., float] = field(compare=False)
    params: tuple[tuple[str, Fraction], ...] = ()
    tunable: str | None = field(default=None, compare=False)
    rebuild: Callable[..., "AggregatorDef"] | None = field(default=None, compare=False)
    limit_rule: Callable[..., float] | None = field(default=None, compare=False)

    def param(self, name: str) -> Fraction:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def __call__(self, *seqs: ValueSeq) -> float:
        if len(seqs) != self.arity:
            raise ArityMismatchError(
                f"aggregator {self.name!r} has arity {self.arity}, got {len(seqs)} arguments"
            )
        arrays = [as_value_seq(s) for s in seqs]
        out = float(self.fn(*arrays))
        if not (-_RANGE_SLACK <= out <= 1.0 + _RANGE_SLACK):
            raise ValueError(f"aggregator {self.name!r} left [0, 1]: {out!r}")
        return min(1.0, max(0.0, out))


@dataclass(frozen=True)
class MostowskiQuantifier:
    """A cardinality-invariant class of tuples (D, X_1, ..., X_k).

    Membership depends only on |D| and the |X_i|, so the class is fully
    described by a predicate on (domain size m, set sizes).
    """

    name: str
    k: int
    predicate: Callable[[int, tuple[int, ...]], bool] = field(compare=False)


# ---------------------------------------------------------------------------
# Connectives
# ---------------------------------------------------------------------------

NOT = ConnectiveDef("not", 1, lambda x: 1.0 - x, lipschitz=1.0)
AND = ConnectiveDef("and", 2, lambda x, y: np.minimum(x, y), lipschitz=1.0)
OR = ConnectiveDef("or", 2, lambda x, y: np.maximum(x, y), lipschitz=1.0)
IMPLIES = ConnectiveDef("implies", 2, lambda x, y: np.minimum(1.0, 1.0 - x + y), lipschitz=2.0)
PROD = ConnectiveDef("prod", 2, lambda x, y: x * y, lipschitz=2.0)


def builtin_connectives() -> Mapping[str, ConnectiveDef]:
    """The shipped connective registry, keyed by grammar name."""
    return {c.name: c for c in (NOT, AND, OR, IMPLIES, PROD)}


# ---------------------------------------------------------------------------
# Aggregation functions
# ---------------------------------------------------------------------------

def _am(p: np.ndarray) -> float:
    return float(p.sum() / p.size)


def _gm(p: np.ndarray) -> float:
    # sorted input: constant sequences and zero entries are O(1) checks
    if p[0] == p[-1]:
        return float(p[0])
    if p[0] == 0.0:
        return 0.0
    return float(math.exp(np.log(p).sum() / p.size))


def _tsum(p: np.ndarray) -> float:
    return min(1.0, float(p.sum()))


def _exact_ones(p: np.ndarray) -> int:
    return int(np.count_nonzero(p == 1.0))


def _freq_values(params) -> list[tuple[float, float]]:
    return [(float(c), float(a)) for c, a in params.pairs]


def _am_limit(params) -> float:
    return sum(c * a for c, a in _freq_values(params[0]))


def _gm_limit(params) -> float:
    out = 1.0
    for c, a in _freq_values(params[0]):
        if a > 0.0:
            if c == 0.0:
                return 0.0
            out *= c ** a
    return out


def _max_limit(params) -> float:
    return max(c for c, a in _freq_values(params[0]) if a > 0.0)


def _min_limit(params) -> float:
    return min(c for c, a in _freq_values(params[0]) if a > 0.0)


AM = AggregatorDef("am", 1, _am, limit_rule=_am_limit)
GM = AggregatorDef("gm", 1, _gm, limit_rule=_gm_limit)
MAX = AggregatorDef("max", 1, lambda p: float(p[-1]), limit_rule=_max_limit)
MIN = AggregatorDef("min", 1, lambda p: float(p[0]), limit_rule=_min_limit)
TSUM = AggregatorDef("tsum", 1, _tsum)


def _coerce_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value) if "/" in value else Fraction(value)
    if isinstance(value, float):
        # exact binary expansion of the double; decimals should come as strings
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def length_inverse(beta=1) -> AggregatorDef:
    """The aggregation function p -> |p|^(-beta); beta = 1 recovers 1/|p|."""
    b = _coerce_fraction(beta)
    if not 0 < b <= 1:
        raise ValueError("beta must lie in (0, 1]")
    bf = float(b)

    def fn(p: np.ndarray) -> float:
        if bf == 1.0:
            return 1.0 / p.size
        return float(p.size ** (-bf))

    return AggregatorDef(
        "lengthinv", 1, fn, params=(("beta", b),),
        rebuild=length_inverse, limit_rule=lambda params: 0.0,
    )


LENGTH_INV = length_inverse(1)


def builtin_aggregators() -> Mapping[str, AggregatorDef]:
    """The shipped aggregator registry, keyed by grammar name.

    Parametric entries (`lengthinv`, `proportional`) appear at their default
    or canonical parameters; the grammar rebuilds them when a parameter list
    is supplied.
    """
    from .seqmetrics import MU1_DIST  # local import: seqmetrics builds on this module

    table = {a.name: a for a in (MAX, MIN, AM, GM, TSUM, LENGTH_INV, MU1_DIST)}
    table["proportional"] = proportional_aggregator(Fraction(1, 2))
    table["rescher"] = quantifier_to_agg(RESCHER)
    table["hartig"] = quantifier_to_agg(HARTIG)
    return table


# ---------------------------------------------------------------------------
# Mostowski quantifiers and their aggregation-function adapters
# ---------------------------------------------------------------------------

def quantifier_to_agg(q: MostowskiQuantifier, params: tuple[tuple[str, Fraction], ...] = (),
                      rebuild=None, tunable: str | None = None) -> AggregatorDef:
    """Turn a set quantifier into a 0/1-valued aggregation function.

    Given sequences p_1..p_k of lengths m_1..m_k, the adapter takes the
    domain to be [m] with m = max(m_i) and X_i to be the index set of entries
    of p_i exactly equal to 1; it returns 1 when (m, |X_1|, ..., |X_k|) is in
    the quantifier and 0 otherwise.
    """
    if q.k < 1:
        raise ValueError("quantifier must aggregate at least one set")

    def fn(*seqs: np.ndarray) -> float:
        m = max(s.size for s in seqs)
        sizes = tuple(_exact_ones(s) for s in seqs)
        return 1.0 if q.predicate(m, sizes) else 0.0

    return AggregatorDef(q.name, q.k, fn, params=params, rebuild=rebuild, tunable=tunable)


def proportional_quantifier(beta) -> MostowskiQuantifier:
    """(D, X) with D nonempty and |X|/|D| >= beta.

    The threshold comparison is exact: beta is kept as a rational and the
    ratio test is integer cross-multiplication, because behaviour at the
    boundary is meaningful rather than a rounding artifact.
    """
    b = _coerce_fraction(beta)
    if not 0 < b < 1:
        raise ValueError("beta must lie in (0, 1)")
    return MostowskiQuantifier(
        "proportional", 1, lambda m, sizes: m >= 1 and Fraction(sizes[0], m) >= b
    )


def proportional_aggregator(beta) -> AggregatorDef:
    b = _coerce_fraction(beta)
    return quantifier_to_agg(
        proportional_quantifier(b),
        params=(("beta", b),),
        rebuild=proportional_aggregator,
        tunable="beta",
    )


RESCHER = MostowskiQuantifier("rescher", 2, lambda m, sizes: sizes[0] <= sizes[1])
HARTIG = MostowskiQuantifier("hartig", 2, lambda m, sizes: sizes[0] == sizes[1])
EXISTS_Q = MostowskiQuantifier("existsq", 1, lambda m, sizes: sizes[0] >= 1)
FORALL_Q = MostowskiQuantifier("forallq", 1, lambda m, sizes: sizes[0] == m)


def prebuilt_quantifiers(beta=Fraction(1, 2)) -> Mapping[str, MostowskiQuantifier]:
    """The stock set quantifiers: proportional(beta), Rescher, Hartig, and
    the max-like/min-like adapters of the two classical quantifiers."""
    return {
        "proportional": proportional_quantifier(beta),
        "rescher": RESCHER,
        "hartig": HARTIG,
        "existsq": EXISTS_Q,
        "forallq": FORALL_Q,
    }
