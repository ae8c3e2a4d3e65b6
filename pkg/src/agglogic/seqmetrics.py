"""Step-function representations of finite sequences and two pseudometrics.

A sequence p of length n is represented by the piecewise-constant function on
[0,1] taking value p[i] on [i/n, (i+1)/n) and p[n-1] at 1.  Two distances are
computed on these representations:

* ``mu1_unordered``  -- the L1 distance between the *sorted* representations,
* ``muinf_ordered``  -- the sup distance between the order-preserving ones.

Both are exact up to one rounding per merged segment: the two breakpoint
grids i/|p| and j/|q| are merged over the common denominator |p|*|q|, so
segment lengths are integers scaled by 1/(|p|*|q|) and only the final
accumulation runs in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArityMismatchError, EmptySequenceError


@dataclass(frozen=True)
class StepFunction:
    """A right-open piecewise-constant function on [0,1] with equal steps."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise EmptySequenceError("a step function needs at least one value")
        if any(not 0.0 <= v <= 1.0 for v in vals):
            raise ValueError("step values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def pieces(self) -> int:
        return len(self.values)

    def __call__(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise ValueError("step functions are defined on [0, 1]")
        if t == 1.0:
            return self.values[-1]
        return self.values[int(t * self.pieces)]


def ordered_rep(seq: Sequence[float]) -> StepFunction:
    """The order-preserving step representation of a sequence."""
    return StepFunction(tuple(float(v) for v in seq))


def unordered_rep(seq: Sequence[float]) -> StepFunction:
    """The sorted (ascending) step representation of a sequence."""
    return StepFunction(tuple(sorted(float(v) for v in seq)))


def _merged_segments(np_: int, nq_: int):
    """Breakpoints of the merged grid in units of 1/(np*nq), plus indexers.

    Returns (bounds, p_idx, q_idx, scale): for each segment s, the values are
    p[p_idx[s]] and q[q_idx[s]] and its length is diff(bounds)[s] / scale.
    """
    bounds = np.union1d(
        np.arange(1, np_ + 1, dtype=np.int64) * nq_,
        np.arange(1, nq_ + 1, dtype=np.int64) * np_,
    )
    starts = np.concatenate(([0], bounds[:-1]))
    return bounds, starts // nq_, starts // np_, np_ * nq_


def _as_floats(seq: Sequence[float]) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptySequenceError("sequences must be nonempty and one-dimensional")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise ValueError("sequence entries must lie in [0, 1]")
    return arr


def mu1_unordered(p: Sequence[float], q: Sequence[float]) -> float:
    """L1 distance between the sorted step representations of p and q.

    Invariant under permutation and under replicating every entry the same
    number of times; always in [0, 1].
    """
    fp = np.sort(_as_floats(p))
    fq = np.sort(_as_floats(q))
    if fp.size == fq.size:
        # common grid: plain mean of pointwise gaps
        return float(np.abs(fp - fq).sum() / fp.size)
    bounds, p_idx, q_idx, scale = _merged_segments(fp.size, fq.size)
    lengths = np.diff(bounds, prepend=0)
    return float((np.abs(fp[p_idx] - fq[q_idx]) * lengths).sum() / scale)


def muinf_ordered(p: Sequence[float], q: Sequence[float]) -> float:
    """Sup distance between the order-preserving step representations.

    The sup over [0,1] is a max over the merged segments together with the
    right endpoint, where both functions take their last value.
    """
    fp = _as_floats(p)
    fq = _as_floats(q)
    if fp.size == fq.size:
        return float(np.abs(fp - fq).max())
    _, p_idx, q_idx, _ = _merged_segments(fp.size, fq.size)
    seg_max = float(np.abs(fp[p_idx] - fq[q_idx]).max())
    return max(seg_max, abs(float(fp[-1]) - float(fq[-1])))


def tuple_distance(metric: Callable[[Sequence[float], Sequence[float]], float],
                   ps: Sequence[Sequence[float]], qs: Sequence[Sequence[float]]) -> float:
    """Componentwise maximum of a scalar pseudometric over equal-length tuples."""
    if len(ps) != len(qs) or not ps:
        raise ArityMismatchError("tuple distances need equally many components on both sides")
    return max(metric(pi, qi) for pi, qi in zip(ps, qs))


def mu1_unordered_tuple(ps, qs) -> float:
    return tuple_distance(mu1_unordered, ps, qs)


def muinf_ordered_tuple(ps, qs) -> float:
    return tuple_distance(muinf_ordered, ps, qs)


# ---------------------------------------------------------------------------
# Frequency parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreqParams:
    """Pairs (c_j, alpha_j): distinct values in [0,1] with proportions summing to 1."""

    pairs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pairs = tuple((float(c), float(a)) for c, a in self.pairs)
        if not pairs:
            raise ValueError("frequency parameters need at least one (value, proportion) pair")
        values = [c for c, _ in pairs]
        if len(set(values)) != len(values):
            raise ValueError(f"values must be pairwise distinct, got {values}")
        if any(not 0.0 <= c <= 1.0 or not 0.0 <= a <= 1.0 for c, a in pairs):
            raise ValueError("values and proportions must lie in [0, 1]")
        total = math.fsum(a for _, a in pairs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"proportions must sum to 1, got {total!r}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def k(self) -> int:
        return len(self.pairs)

    def values(self) -> tuple[float, ...]:
        return tuple(c for c, _ in self.pairs)

    def proportions(self) -> tuple[float, ...]:
        return tuple(a for _, a in self.pairs)

    def support(self) -> tuple[float, ...]:
        """The values carrying strictly positive proportion."""
        return tuple(c for c, a in self.pairs if a > 0.0)


# The distance mu1_unordered doubles as a binary aggregation function: it is
# symmetric in each argument by construction (it only sees sorted entries).
from .catalog import AggregatorDef  # noqa: E402  (cycle-free: catalog never imports us at module load)

MU1_DIST = AggregatorDef("mu1dist", 2, lambda p, q: mu1_unordered(p, q))
