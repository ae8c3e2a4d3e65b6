"""Shared test oracles, deliberately independent of the library's evaluators.

The first-order evaluator here works on a plain nested-tuple formula syntax
and raw tuple sets, so agreement tests between it and the library exercise
two genuinely different code paths.
"""

from __future__ import annotations

from itertools import product

from agglogic import Agg, Atom, Conn, Const, Eq, MAX, MIN
from agglogic.catalog import AND, IMPLIES, NOT, OR

# Nested-tuple first-order syntax:
#   ("atom", sym, (v, ...)) | ("eq", u, v) | ("not", f) | ("and", f, g)
#   ("or", f, g) | ("imp", f, g) | ("exists", v, f) | ("forall", v, f)


def fo_eval(tables: dict[str, set[tuple[int, ...]]], n: int, node, env: dict[str, int]) -> bool:
    op = node[0]
    if op == "atom":
        return tuple(env[v] for v in node[2]) in tables[node[1]]
    if op == "eq":
        return env[node[1]] == env[node[2]]
    if op == "not":
        return not fo_eval(tables, n, node[1], env)
    if op == "and":
        return fo_eval(tables, n, node[1], env) and fo_eval(tables, n, node[2], env)
    if op == "or":
        return fo_eval(tables, n, node[1], env) or fo_eval(tables, n, node[2], env)
    if op == "imp":
        return (not fo_eval(tables, n, node[1], env)) or fo_eval(tables, n, node[2], env)
    if op == "exists":
        return any(fo_eval(tables, n, node[2], {**env, node[1]: b}) for b in range(n))
    if op == "forall":
        return all(fo_eval(tables, n, node[2], {**env, node[1]: b}) for b in range(n))
    raise ValueError(node)


def fo_free_vars(node) -> set[str]:
    op = node[0]
    if op == "atom":
        return set(node[2])
    if op == "eq":
        return {node[1], node[2]}
    if op == "not":
        return fo_free_vars(node[1])
    if op in ("and", "or", "imp"):
        return fo_free_vars(node[1]) | fo_free_vars(node[2])
    if op in ("exists", "forall"):
        return fo_free_vars(node[2]) - {node[1]}
    raise ValueError(node)


def fo_to_formula(node):
    """Translate the tuple syntax into the library AST, quantifiers becoming
    max/min aggregations with the constant-true condition."""
    op = node[0]
    if op == "atom":
        return Atom(node[1], tuple(node[2]))
    if op == "eq":
        return Eq(node[1], node[2])
    if op == "not":
        return Conn(NOT, (fo_to_formula(node[1]),))
    if op == "and":
        return Conn(AND, (fo_to_formula(node[1]), fo_to_formula(node[2])))
    if op == "or":
        return Conn(OR, (fo_to_formula(node[1]), fo_to_formula(node[2])))
    if op == "imp":
        return Conn(IMPLIES, (fo_to_formula(node[1]), fo_to_formula(node[2])))
    if op == "exists":
        return Agg(MAX, (fo_to_formula(node[2]),), (node[1],), (Const(1.0),))
    if op == "forall":
        return Agg(MIN, (fo_to_formula(node[2]),), (node[1],), (Const(1.0),))
    raise ValueError(node)


def all_binary_tables(n: int):
    """Every interpretation of one binary symbol E on {0,...,n-1}."""
    pairs = list(product(range(n), repeat=2))
    for mask in range(2 ** len(pairs)):
        yield {"E": {pairs[i] for i in range(len(pairs)) if mask >> i & 1}}


# A fixed battery of first-order formulas over one binary symbol E, mixing
# quantifier alternation, equality, and connectives; free variables x and y.
FO_BATTERY = [
    ("exists", "u", ("atom", "E", ("x", "u"))),
    ("forall", "u", ("atom", "E", ("x", "u"))),
    ("exists", "u", ("forall", "v", ("atom", "E", ("u", "v")))),
    ("forall", "u", ("exists", "v", ("atom", "E", ("u", "v")))),
    ("exists", "u", ("and", ("atom", "E", ("x", "u")), ("atom", "E", ("u", "x")))),
    ("forall", "u", ("imp", ("atom", "E", ("x", "u")), ("atom", "E", ("u", "u")))),
    ("exists", "u", ("exists", "v", ("and", ("atom", "E", ("x", "u")), ("atom", "E", ("u", "v"))))),
    ("forall", "u", ("or", ("atom", "E", ("u", "u")), ("exists", "v", ("not", ("atom", "E", ("u", "v")))))),
    ("exists", "u", ("and", ("eq", "u", "y"), ("atom", "E", ("u", "y")))),
    ("forall", "u", ("forall", "v", ("imp", ("atom", "E", ("u", "v")), ("exists", "w", ("atom", "E", ("v", "w")))))),
]
