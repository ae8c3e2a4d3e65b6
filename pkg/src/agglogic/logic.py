"""Finite relational structures and the [0,1]-valued formula language.

Formulas are built from constants in [0,1], variable equalities, relational
atoms, continuous connectives, and aggregation applications that bind a tuple
of variables and carry one condition formula per aggregated argument.  The
value of an aggregation at a point is the aggregation function applied to the
sequences of inner values taken over all bound-variable tuples whose condition
evaluates to exactly 1; if any of those sequences is empty the value is 0.

Structures and formulas are immutable after construction and evaluation is
pure, so concurrent evaluation on shared objects is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .catalog import AggregatorDef, ConnectiveDef
from .errors import (
    ArityMismatchError,
    UnboundVariableError,
    UnknownSymbolError,
)

Assignment = Mapping[str, int]


@dataclass(frozen=True)
class Signature:
    """A finite relational signature: symbol name -> arity (>= 1)."""

    symbols: tuple[tuple[str, int], ...]

    def __init__(self, symbols: Mapping[str, int] | Iterable[tuple[str, int]]):
        items = tuple(sorted(dict(symbols).items()))
        if any(not name for name, _ in items):
            raise ValueError("relation symbols need nonempty names")
        if any(arity < 1 for _, arity in items):
            raise ValueError("relation symbols must have arity >= 1")
        object.__setattr__(self, "symbols", items)

    def arity(self, symbol: str) -> int:
        for name, arity in self.symbols:
            if name == symbol:
                return arity
        raise UnknownSymbolError(f"unknown relation symbol {symbol!r}")

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return any(name == symbol for name, _ in self.symbols)


class Structure:
    """A finite structure over a relational signature.

    The domain is {0, ..., n-1}; each symbol is interpreted by the set of
    tuples where it holds.  Instances are immutable by convention and can be
    backed either by explicit tuple sets or by dense boolean arrays (the form
    the random-structure sampler produces); the missing view is built lazily.
    """

    __slots__ = ("signature", "domain_size", "_tuples", "_dense")

    def __init__(self, signature: Signature, domain_size: int,
                 tables: Mapping[str, Iterable[tuple[int, ...]]] | None = None):
        if domain_size < 1:
            raise ValueError("the domain must be nonempty")
        self.signature = signature
        self.domain_size = int(domain_size)
        clean: dict[str, frozenset[tuple[int, ...]]] = {}
        tables = dict(tables or {})
        for name, arity in signature.symbols:
            rows = frozenset(tuple(int(v) for v in row) for row in tables.pop(name, ()))
            for row in rows:
                if len(row) != arity:
                    raise ArityMismatchError(
                        f"tuple {row} has length {len(row)}, but {name!r} has arity {arity}"
                    )
                if any(not 0 <= v < domain_size for v in row):
                    raise ValueError(f"tuple {row} leaves the domain of size {domain_size}")
            clean[name] = rows
        if tables:
            raise UnknownSymbolError(f"tables given for symbols outside the signature: {sorted(tables)}")
        self._tuples: dict[str, frozenset[tuple[int, ...]]] | None = clean
        self._dense: dict[str, np.ndarray] = {}

    @classmethod
    def from_dense(cls, signature: Signature, domain_size: int,
                   arrays: Mapping[str, np.ndarray]) -> "Structure":
        """Build a structure from one boolean array of shape (n,)*arity per symbol."""
        self = cls.__new__(cls)
        self.signature = signature
        self.domain_size = int(domain_size)
        dense: dict[str, np.ndarray] = {}
        arrays = dict(arrays)
        for name, arity in signature.symbols:
            arr = np.asarray(arrays.pop(name), dtype=bool)
            if arr.shape != (domain_size,) * arity:
                raise ArityMismatchError(
                    f"array for {name!r} has shape {arr.shape}, expected {(domain_size,) * arity}"
                )
            arr.setflags(write=False)
            dense[name] = arr
        if arrays:
            raise UnknownSymbolError(f"arrays given for symbols outside the signature: {sorted(arrays)}")
        self._tuples = None
        self._dense = dense
        return self

    def tuples(self, symbol: str) -> frozenset[tuple[int, ...]]:
        """The set of tuples where the relation holds."""
        if symbol not in self.signature:
            raise UnknownSymbolError(f"unknown relation symbol {symbol!r}")
        if self._tuples is None:
            self._tuples = {
                name: frozenset(map(tuple, np.argwhere(self._dense[name]).tolist()))
                for name, _ in self.signature.symbols
            }
        return self._tuples[symbol]

    @property
    def tables(self) -> dict[str, frozenset[tuple[int, ...]]]:
        return {name: self.tuples(name) for name, _ in self.signature.symbols}

    def holds(self, symbol: str, row: tuple[int, ...]) -> bool:
        if self._tuples is not None:
            if symbol not in self._tuples:
                raise UnknownSymbolError(f"unknown relation symbol {symbol!r}")
            return row in self._tuples[symbol]
        return bool(self.dense(symbol)[row])

    def dense(self, symbol: str) -> np.ndarray:
        """Boolean array of shape (n,)*arity with True where the relation holds."""
        cached = self._dense.get(symbol)
        if cached is not None:
            return cached
        arity = self.signature.arity(symbol)
        arr = np.zeros((self.domain_size,) * arity, dtype=bool)
        rows = self.tuples(symbol)
        if rows:
            idx = np.array(sorted(rows), dtype=np.intp)
            arr[tuple(idx[:, i] for i in range(arity))] = True
        arr.setflags(write=False)
        self._dense[symbol] = arr
        return arr

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Structure)
            and self.signature == other.signature
            and self.domain_size == other.domain_size
            and all(
                np.array_equal(self.dense(name), other.dense(name))
                for name, _ in self.signature.symbols
            )
        )

    def __repr__(self) -> str:
        sizes = {
            name: int(self.dense(name).sum()) for name, _ in self.signature.symbols
        }
        return f"Structure(n={self.domain_size}, tuples={sizes})"


# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class of formula nodes; all nodes are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Formula):
    """A constant truth value in [0,1].

    Values outside the interval by at most 1e-12 are clamped; anything
    further out is rejected.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not -1e-12 <= v <= 1.0 + 1e-12:
            raise ValueError(f"constant {v!r} lies outside [0, 1]")
        object.__setattr__(self, "value", min(1.0, max(0.0, v)))


@dataclass(frozen=True)
class Eq(Formula):
    """The 0/1-valued equality `left = right` between two variables."""

    left: str
    right: str


@dataclass(frozen=True)
class Atom(Formula):
    """A relational atom R(x_1, ..., x_r); 0/1-valued."""

    symbol: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Conn(Formula):
    """A continuous connective applied to child formulas."""

    conn: ConnectiveDef
    args: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.conn.arity:
            raise ArityMismatchError(
                f"connective {self.conn.name!r} has arity {self.conn.arity}, "
                f"got {len(self.args)} children"
            )


@dataclass(frozen=True)
class Agg(Formula):
    """An aggregation application F(phi_1, ..., phi_k : ybar : chi_1, ..., chi_k).

    Binds the (distinct, nonempty) variables in `bound`.  The i-th condition
    selects, for the i-th argument, which bound tuples contribute.
    """

    agg: AggregatorDef
    inner: tuple[Formula, ...]
    bound: tuple[str, ...]
    conditions: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "inner", tuple(self.inner))
        object.__setattr__(self, "bound", tuple(self.bound))
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if len(self.inner) != self.agg.arity or len(self.conditions) != self.agg.arity:
            raise ArityMismatchError(
                f"aggregator {self.agg.name!r} has arity {self.agg.arity}, "
                f"got {len(self.inner)} inner formulas and {len(self.conditions)} conditions"
            )
        if not self.bound:
            raise ValueError("aggregations must bind at least one variable")
        if len(set(self.bound)) != len(self.bound):
            raise ValueError(f"bound variables must be distinct, got {self.bound}")


TRUE = Const(1.0)
FALSE = Const(0.0)


def free_vars(f: Formula) -> frozenset[str]:
    """The free variables of a formula; aggregation binds its `bound` tuple."""
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Conn):
        out: frozenset[str] = frozenset()
        for child in f.args:
            out |= free_vars(child)
        return out
    if isinstance(f, Agg):
        out = frozenset()
        for child in f.inner:
            out |= free_vars(child)
        return out - frozenset(f.bound)
    raise TypeError(f"not a formula: {f!r}")


def _lookup(assignment: Assignment, var: str, n: int) -> int:
    try:
        value = assignment[var]
    except KeyError:
        raise UnboundVariableError(f"variable {var!r} is unbound") from None
    if not 0 <= value < n:
        raise ValueError(f"assignment sends {var!r} to {value}, outside the domain of size {n}")
    return value


def evaluate(structure: Structure, f: Formula, assignment: Assignment | None = None) -> float:
    """The value of `f` in `structure` under `assignment`, a number in [0,1].

    Deterministic: identical inputs give bit-identical outputs.
    """
    a = assignment or {}
    value = _evaluate(structure, f, a)
    assert 0.0 <= value <= 1.0, f"evaluation left [0, 1]: {value!r}"
    return value


def _evaluate(structure: Structure, f: Formula, a: Assignment) -> float:
    n = structure.domain_size
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Eq):
        return 1.0 if _lookup(a, f.left, n) == _lookup(a, f.right, n) else 0.0
    if isinstance(f, Atom):
        if f.symbol not in structure.signature:
            raise UnknownSymbolError(f"unknown relation symbol {f.symbol!r}")
        if len(f.args) != structure.signature.arity(f.symbol):
            raise ArityMismatchError(
                f"atom {f.symbol!r} used at arity {len(f.args)}, "
                f"declared {structure.signature.arity(f.symbol)}"
            )
        row = tuple(_lookup(a, v, n) for v in f.args)
        return 1.0 if structure.holds(f.symbol, row) else 0.0
    if isinstance(f, Conn):
        return f.conn(*[_evaluate(structure, child, a) for child in f.args])
    if isinstance(f, Agg):
        scope = dict(a)
        collected: list[list[float]] = [[] for _ in range(f.agg.arity)]
        for row in product(range(n), repeat=len(f.bound)):
            for var, value in zip(f.bound, row):
                scope[var] = value
            for i in range(f.agg.arity):
                if _evaluate(structure, f.conditions[i], scope) == 1.0:
                    collected[i].append(_evaluate(structure, f.inner[i], scope))
        if any(not seq for seq in collected):
            return 0.0
        return f.agg(*collected)
    raise TypeError(f"not a formula: {f!r}")


def satisfies(structure: Structure, f: Formula, assignment: Assignment | None = None) -> bool:
    """True when the formula takes the value exactly 1."""
    return evaluate(structure, f, assignment) == 1.0


def defined_set(structure: Structure, f: Formula, assignment: Assignment | None,
                ybar: tuple[str, ...]) -> set[tuple[int, ...]]:
    """The set of ybar-tuples at which `f` takes the value exactly 1.

    `assignment` covers the remaining free variables of `f`.
    """
    a = dict(assignment or {})
    out: set[tuple[int, ...]] = set()
    for row in product(range(structure.domain_size), repeat=len(ybar)):
        for var, value in zip(ybar, row):
            a[var] = value
        if _evaluate(structure, f, a) == 1.0:
            out.add(row)
    return out


# ---------------------------------------------------------------------------
# Vectorized evaluation over the full assignment grid
# ---------------------------------------------------------------------------

_GRID_CELL_BUDGET = 50_000_000


def evaluate_grid(structure: Structure, f: Formula, variables: tuple[str, ...]) -> np.ndarray:
    """Evaluate `f` at every assignment of `variables` at once.

    Returns a float64 array of shape (n,)*len(variables) whose cell at index
    (a_1, ..., a_k) equals evaluate(structure, f, {v_i: a_i}).  Agrees with
    the scalar evaluator cell by cell; connective kernels are numpy-compatible
    so everything up to aggregations is array arithmetic, and each aggregation
    reduces its bound axes with one kernel call per outer cell.
    """
    if len(set(variables)) != len(variables):
        raise ValueError("grid variables must be distinct")
    missing = free_vars(f) - set(variables)
    if missing:
        raise UnboundVariableError(f"variables {sorted(missing)} are unbound")
    n = structure.domain_size
    if n ** max(1, len(variables)) > _GRID_CELL_BUDGET:
        raise ValueError("assignment grid too large; use the scalar evaluator")
    out = _grid(structure, f, tuple(variables))
    assert float(out.min(initial=1.0)) >= 0.0 and float(out.max(initial=0.0)) <= 1.0
    return out


def _axis_index(n: int, k: int, axis: int) -> np.ndarray:
    shape = [1] * k
    shape[axis] = n
    return np.arange(n).reshape(shape)


def _grid(structure: Structure, f: Formula, variables: tuple[str, ...]) -> np.ndarray:
    n = structure.domain_size
    k = len(variables)
    shape = (n,) * k
    if isinstance(f, Const):
        return np.full(shape, f.value)
    if isinstance(f, Eq):
        left = _axis_index(n, k, variables.index(f.left))
        right = _axis_index(n, k, variables.index(f.right))
        return np.broadcast_to((left == right).astype(np.float64), shape).copy()
    if isinstance(f, Atom):
        if len(f.args) != structure.signature.arity(f.symbol):
            raise ArityMismatchError(f"atom {f.symbol!r} used at arity {len(f.args)}")
        dense = structure.dense(f.symbol)
        idx = tuple(_axis_index(n, k, variables.index(v)) for v in f.args)
        return np.broadcast_to(dense[idx].astype(np.float64), shape).copy()
    if isinstance(f, Conn):
        vals = f.conn.fn(*[_grid(structure, child, variables) for child in f.args])
        return np.clip(np.asarray(vals, dtype=np.float64), 0.0, 1.0)
    if isinstance(f, Agg):
        if set(f.bound) & set(variables):
            # a rebound variable would alias an outer axis; fall back to the
            # scalar evaluator, which scopes shadowing correctly
            out = np.empty(shape, dtype=np.float64)
            for idx in np.ndindex(shape):
                out[idx] = _evaluate(structure, f, dict(zip(variables, idx)))
            return out
        inner_vars = variables + f.bound
        if n ** len(inner_vars) > _GRID_CELL_BUDGET:
            raise ValueError("assignment grid too large; use the scalar evaluator")
        flat = n ** k
        bound_flat = n ** len(f.bound)
        inner_vals = [
            _grid(structure, g, inner_vars).reshape(flat, bound_flat) for g in f.inner
        ]
        cond_vals = [
            None if _is_true(c) else _grid(structure, c, inner_vars).reshape(flat, bound_flat)
            for c in f.conditions
        ]
        out = np.empty(flat, dtype=np.float64)
        for cell in range(flat):
            seqs = []
            empty = False
            for i in range(f.agg.arity):
                if cond_vals[i] is None:
                    seq = inner_vals[i][cell]
                else:
                    seq = inner_vals[i][cell][cond_vals[i][cell] == 1.0]
                    if seq.size == 0:
                        empty = True
                        break
                seqs.append(seq)
            out[cell] = 0.0 if empty else f.agg(*seqs)
        return out.reshape(shape)
    raise TypeError(f"not a formula: {f!r}")


def _is_true(f: Formula) -> bool:
    return isinstance(f, Const) and f.value == 1.0


def all_structures(signature: Signature, domain_size: int):
    """Yield every structure with the given signature and domain size.

    Exponential in the number of potential tuples; intended for the small
    exhaustive checks (n <= 4 over one binary symbol).
    """
    slots: list[tuple[str, tuple[int, ...]]] = []
    for name, arity in signature.symbols:
        for row in product(range(domain_size), repeat=arity):
            slots.append((name, row))
    for mask in range(2 ** len(slots)):
        tables: dict[str, set[tuple[int, ...]]] = {name: set() for name, _ in signature.symbols}
        for bit, (name, row) in enumerate(slots):
            if mask >> bit & 1:
                tables[name].add(row)
        yield Structure(signature, domain_size, tables)
