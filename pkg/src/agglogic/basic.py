"""Literal conjunctions, complete types, and guarded constant formulas.

A guarded constant formula is a conjunction of implications (guard -> value)
whose guards are 0/1-valued literal conjunctions.  When the guards are
mutually exclusive and exhaustive (the partition flag), evaluation picks the
unique active clause's value.  These are the targets of the aggregation
elimination engine and the carriers of its exactness guarantees: building one
from a quantifier-free formula and combining them under connectives are both
exact operations, not merely asymptotic ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .catalog import AND, IMPLIES, NOT, ConnectiveDef
from .errors import (
    CapExceededError,
    InconsistentGuardError,
    NonBooleanFormulaError,
    NotQuantifierFreeError,
)
from .logic import Agg, Atom, Conn, Const, Eq, Formula, Signature, Structure, free_vars

EqLiteral = tuple[str, str, bool]
AtomLiteral = tuple[str, tuple[str, ...], bool]


@dataclass(frozen=True)
class LiteralConjunction:
    """A conjunction of (in)equalities and signed relational atoms.

    Literals are stored sorted and deduplicated, so structural equality
    coincides with equality as literal sets.  The empty conjunction is the
    always-true guard.
    """

    eqs: tuple[EqLiteral, ...] = ()
    atoms: tuple[AtomLiteral, ...] = ()

    def __post_init__(self):
        eqs = tuple(sorted({(str(u), str(v), bool(s)) for u, v, s in self.eqs}))
        atoms = tuple(sorted({(str(r), tuple(args), bool(s)) for r, args, s in self.atoms}))
        object.__setattr__(self, "eqs", eqs)
        object.__setattr__(self, "atoms", atoms)

    def variables(self) -> frozenset[str]:
        out = {u for u, _, _ in self.eqs} | {v for _, v, _ in self.eqs}
        for _, args, _ in self.atoms:
            out |= set(args)
        return frozenset(out)

    @property
    def is_top(self) -> bool:
        return not self.eqs and not self.atoms

    def conjoin(self, other: "LiteralConjunction") -> "LiteralConjunction":
        return LiteralConjunction(self.eqs + other.eqs, self.atoms + other.atoms)

    def holds(self, structure: Structure, assignment: Mapping[str, int]) -> bool:
        for u, v, positive in self.eqs:
            if (assignment[u] == assignment[v]) != positive:
                return False
        for symbol, args, positive in self.atoms:
            row = tuple(assignment[v] for v in args)
            if structure.holds(symbol, row) != positive:
                return False
        return True

    def to_formula(self) -> Formula:
        """Render as a formula (folded conjunction; empty conjunction is 1)."""
        parts: list[Formula] = []
        for u, v, positive in self.eqs:
            lit: Formula = Eq(u, v)
            parts.append(lit if positive else Conn(NOT, (lit,)))
        for symbol, args, positive in self.atoms:
            lit = Atom(symbol, args)
            parts.append(lit if positive else Conn(NOT, (lit,)))
        if not parts:
            return Const(1.0)
        out = parts[0]
        for part in parts[1:]:
            out = Conn(AND, (out, part))
        return out


TOP_GUARD = LiteralConjunction()


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: str, y: str) -> None:
        self.parent[self.find(x)] = self.find(y)


def literal_sat(guard: LiteralConjunction) -> bool:
    """Satisfiability of a literal conjunction over an unconstrained domain.

    Merge positive equalities, then look for an inequality inside one merged
    class or a collapsed atom required both positively and negatively.  Over
    arbitrarily large domains this is exact.
    """
    uf = _UnionFind()
    for u, v, positive in guard.eqs:
        if positive:
            uf.union(u, v)
    for u, v, positive in guard.eqs:
        if not positive and uf.find(u) == uf.find(v):
            return False
    seen: dict[tuple[str, tuple[str, ...]], bool] = {}
    for symbol, args, positive in guard.atoms:
        key = (symbol, tuple(uf.find(a) for a in args))
        if seen.setdefault(key, positive) != positive:
            return False
    return True


def collapse_map(guard: LiteralConjunction) -> dict[str, str]:
    """Representative map induced by the positive equalities of a guard."""
    uf = _UnionFind()
    for u, v, positive in guard.eqs:
        if positive:
            uf.union(u, v)
    return {v: uf.find(v) for v in guard.variables()}


def complete_types(xvars: Sequence[str], signature: Signature, cap: int = 3
                   ) -> tuple[LiteralConjunction, ...]:
    """All complete consistent literal conjunctions over the given variables.

    Each type decides every equality between the variables (via a set
    partition) and every atom over class representatives; together the types
    partition the assignment space of every structure.  The empty variable
    tuple yields the single always-true type.
    """
    xvars = tuple(xvars)
    if len(set(xvars)) != len(xvars):
        raise ValueError("type variables must be distinct")
    if len(xvars) > cap:
        raise CapExceededError(f"complete types over {len(xvars)} variables exceed the cap {cap}")
    out: list[LiteralConjunction] = []
    for blocks in _set_partitions(xvars):
        rep = {}
        for block in blocks:
            for var in block:
                rep[var] = block[0]
        eqs = tuple(
            (xvars[i], xvars[j], rep[xvars[i]] == rep[xvars[j]])
            for i in range(len(xvars)) for j in range(i + 1, len(xvars))
        )
        reps = tuple(block[0] for block in blocks)
        slots: list[tuple[str, tuple[str, ...]]] = []
        for name, arity in signature.symbols:
            for row in product(reps, repeat=arity):
                slots.append((name, row))
        for signs in product((True, False), repeat=len(slots)):
            atoms = tuple((name, row, sign) for (name, row), sign in zip(slots, signs))
            guard = LiteralConjunction(eqs, atoms)
            assert literal_sat(guard)
            out.append(guard)
    return tuple(out)


def _set_partitions(items: tuple[str, ...]) -> Iterable[list[list[str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in _set_partitions(rest):
        for i in range(len(partial)):
            yield partial[:i] + [[first] + partial[i]] + partial[i + 1:]
        yield [[first]] + partial


def is_complete_type(theta: LiteralConjunction, xvars: Sequence[str],
                     signature: Signature) -> bool:
    """Does `theta` decide every equality and every collapsed atom over `xvars`?"""
    if not literal_sat(theta):
        return False
    decided_eqs = {(u, v): s for u, v, s in theta.eqs} | {(v, u): s for u, v, s in theta.eqs}
    xvars = tuple(xvars)
    for i in range(len(xvars)):
        for j in range(i + 1, len(xvars)):
            if (xvars[i], xvars[j]) not in decided_eqs:
                return False
    rep = collapse_map(theta) if theta.variables() else {}
    for v in xvars:
        rep.setdefault(v, v)
    decided_atoms = {(name, tuple(rep[a] for a in args)) for name, args, _ in theta.atoms}
    for name, arity in signature.symbols:
        for row in product(sorted(set(rep[v] for v in xvars)), repeat=arity):
            if (name, row) not in decided_atoms:
                return False
    return True


# ---------------------------------------------------------------------------
# Guarded constant formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasicFormula:
    """A conjunction of clauses (guard -> value) with literal-conjunction guards.

    With the partition flag set, the guards are mutually exclusive and
    exhaustive, so evaluation returns the unique active clause's value and
    coincides with the many-valued reading of the rendered conjunction.
    """

    clauses: tuple[tuple[LiteralConjunction, float], ...]
    free: tuple[str, ...]
    partition: bool = True

    def __post_init__(self):
        clauses = tuple((g, float(v)) for g, v in self.clauses)
        if not clauses:
            raise ValueError("guarded formulas need at least one clause")
        if any(not 0.0 <= v <= 1.0 for _, v in clauses):
            raise ValueError("clause values must lie in [0, 1]")
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "free", tuple(self.free))

    def evaluate(self, structure: Structure, assignment: Mapping[str, int]) -> float:
        if self.partition:
            active = [v for g, v in self.clauses if g.holds(structure, assignment)]
            assert len(active) == 1, f"partition violated: {len(active)} active guards"
            return active[0]
        value = 1.0
        for g, v in self.clauses:
            if g.holds(structure, assignment):
                value = min(value, v)
        return value

    def to_formula(self) -> Formula:
        """Render as a plain formula: the fold of (guard -> value) implications."""
        parts = [
            Conn(IMPLIES, (g.to_formula(), Const(v))) for g, v in self.clauses
        ]
        out = parts[0]
        for part in parts[1:]:
            out = Conn(AND, (out, part))
        return out

    def values(self) -> tuple[float, ...]:
        """Distinct clause values in order of first appearance."""
        seen: list[float] = []
        for _, v in self.clauses:
            if v not in seen:
                seen.append(v)
        return tuple(seen)

    def grouped_by_value(self) -> tuple[tuple[float, tuple[LiteralConjunction, ...]], ...]:
        """Clauses grouped by value, for compact rendering; the internal
        partition form is never merged."""
        groups: dict[float, list[LiteralConjunction]] = {}
        for g, v in self.clauses:
            groups.setdefault(v, []).append(g)
        return tuple((v, tuple(gs)) for v, gs in groups.items())


def _collect_atomics(f: Formula, acc: list[Formula]) -> None:
    if isinstance(f, (Eq, Atom)):
        if f not in acc:
            acc.append(f)
    elif isinstance(f, Conn):
        for child in f.args:
            _collect_atomics(child, acc)
    elif isinstance(f, Agg):
        raise NotQuantifierFreeError("aggregations cannot appear in a quantifier-free formula")
    elif not isinstance(f, Const):
        raise TypeError(f"not a formula: {f!r}")


def _eval_with_atomics(f: Formula, valuation: Mapping[Formula, bool]) -> float:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, (Eq, Atom)):
        return 1.0 if valuation[f] else 0.0
    if isinstance(f, Conn):
        return f.conn(*[_eval_with_atomics(c, valuation) for c in f.args])
    raise NotQuantifierFreeError("aggregations cannot appear in a quantifier-free formula")


def atom_to_basic(f: Formula) -> BasicFormula:
    """Exact guarded form of a 0/1-valued quantifier-free formula.

    Guards are the satisfiable sign patterns of the atomic subformulas, so the
    result is in partition form and evaluates identically to `f` on every
    structure.  Non-0/1-valued input is rejected.
    """
    atomics: list[Formula] = []
    _collect_atomics(f, atomics)
    if not atomics:
        value = _eval_with_atomics(f, {})
        if value not in (0.0, 1.0):
            raise NonBooleanFormulaError(f"constant value {value!r} is not 0/1")
        return BasicFormula(((TOP_GUARD, value),), tuple(sorted(free_vars(f))))
    clauses: list[tuple[LiteralConjunction, float]] = []
    for signs in product((True, False), repeat=len(atomics)):
        eqs = []
        atoms = []
        for node, sign in zip(atomics, signs):
            if isinstance(node, Eq):
                eqs.append((node.left, node.right, sign))
            else:
                atoms.append((node.symbol, node.args, sign))
        guard = LiteralConjunction(tuple(eqs), tuple(atoms))
        if not literal_sat(guard):
            continue
        value = _eval_with_atomics(f, dict(zip(atomics, signs)))
        if value not in (0.0, 1.0):
            raise NonBooleanFormulaError(
                f"formula takes the non-0/1 value {value!r} under {dict(zip(atomics, signs))}"
            )
        clauses.append((guard, value))
    return BasicFormula(tuple(clauses), tuple(sorted(free_vars(f))))


def combine_connective(conn: ConnectiveDef, basics: Sequence[BasicFormula]) -> BasicFormula:
    """Apply a connective to guarded formulas by refining their partitions.

    Each output guard is a satisfiable conjunction of one guard per input and
    its value is the connective applied to the clause values, so the result
    evaluates identically to the connective applied to the inputs.
    """
    if len(basics) != conn.arity:
        raise ValueError(f"connective {conn.name!r} has arity {conn.arity}, got {len(basics)}")
    if any(not b.partition for b in basics):
        raise ValueError("inputs must be in partition form")
    clauses: list[tuple[LiteralConjunction, float]] = []
    for combo in product(*[b.clauses for b in basics]):
        guard = TOP_GUARD
        for g, _ in combo:
            guard = guard.conjoin(g)
        if not literal_sat(guard):
            continue
        clauses.append((guard, conn(*[v for _, v in combo])))
    if not clauses:
        raise InconsistentGuardError("refinement of partitions produced no satisfiable guard")
    free = tuple(sorted(set().union(*[set(b.free) for b in basics])))
    return BasicFormula(tuple(clauses), free, partition=True)
