"""Iterative page-importance scores as formulas over a link relation E.

Stage 0 assigns every node 1/N via a pure length aggregation; stage k+1 sums,
over the in-neighbours y of x, the previous score of y divided by y's
out-degree, using the truncated sum (the true stage values never exceed 1, so
truncation is inert) and multiplication:

    stage0(x)   = lengthinv { x = x : y : true }
    stage_{k+1}(x) = tsum { x = x and prod(stage_k(y), outshare(y)) : y : E(y, x) }

where outshare(y) = lengthinv { y = y : z : E(y, z) } is 1/outdegree(y), and
is 0 for sinks (the aggregation's condition set is empty).  The inert
conjunct `x = x` keeps x free inside the aggregation.

Each stage uses fresh bound variables so nested stages never capture each
other's bindings.
"""

from __future__ import annotations

from .catalog import AND, PROD, LENGTH_INV, TSUM
from .logic import Agg, Conn, Const, Eq, Atom, Formula

LINK = "E"


def out_share(var: str, depth: int = 0) -> Formula:
    """1/outdegree(var), and 0 when var has no out-links."""
    z = f"z{depth}"
    return Agg(LENGTH_INV, (Eq(var, var),), (z,), (Atom(LINK, (var, z)),))


def pagerank_stage(k: int, var: str = "x") -> Formula:
    """The stage-k score of `var` as a formula over the link relation."""
    if k < 0:
        raise ValueError("stages are numbered from 0")
    if k == 0:
        y = f"y{k}"
        return Agg(LENGTH_INV, (Eq(var, var),), (y,), (Const(1.0),))
    y = f"y{k}"
    previous = pagerank_stage(k - 1, y)
    summand = Conn(AND, (Eq(var, var), Conn(PROD, (previous, out_share(y, k)))))
    return Agg(TSUM, (summand,), (y,), (Atom(LINK, (y, var)),))
