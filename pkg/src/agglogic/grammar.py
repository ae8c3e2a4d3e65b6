"""Concrete syntax for formulas: a tokenizer, a recursive-descent parser, and
a canonical pretty-printer with parse(pretty(f)) == f on well-formed ASTs.

The grammar, loosely:

    formula     := disjunct ('->' formula)?          (right-associative)
    disjunct    := conjunct ('or' conjunct)*
    conjunct    := negation ('and' negation)*
    negation    := 'not' negation | quantified
    quantified  := ('exists' | 'forall') var+ negation | primary
    primary     := NUMBER | 'true' | 'false' | '(' formula ')'
                 | var '=' var
                 | NAME '(' formula, ... ')'         (registered connective)
                 | NAME '(' var, ... ')'             (relational atom)
                 | NAME ['[' key=value, ... ']']
                        '{' formula, ... ':' var+ ':' formula, ... '}'

`true`/`false` are the constants 1 and 0.  `exists y phi` and `forall y phi`
abbreviate the max- and min-aggregations of phi over y with the constant-true
condition.  In an aggregation, a single condition is shorthand for one copy
per aggregated formula.  Parameter values are exact decimals or fractions
(`beta=0.3`, `beta=3/10`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .catalog import (
    AggregatorDef,
    ConnectiveDef,
    MAX,
    MIN,
    builtin_aggregators,
    builtin_connectives,
    length_inverse,
    proportional_aggregator,
)
from .errors import ArityMismatchError, FormulaSyntaxError
from .logic import Agg, Atom, Conn, Const, Eq, Formula

_KEYWORDS = {"not", "and", "or", "true", "false", "exists", "forall"}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<arrow>->)"
    r"|(?P<punct>[(){}\[\],:=/]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "arrow" | "punct" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# Factories for parametric aggregators; plain registry entries take no params.
_PARAMETRIC = {
    "lengthinv": length_inverse,
    "proportional": proportional_aggregator,
}


class _Parser:
    def __init__(self, text: str,
                 connectives: Mapping[str, ConnectiveDef] | None = None,
                 aggregators: Mapping[str, AggregatorDef] | None = None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.connectives = dict(connectives or builtin_connectives())
        self.aggregators = dict(aggregators or builtin_aggregators())

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise FormulaSyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def fail(self, message: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.peek().pos)

    def _is_var(self, tok: _Token) -> bool:
        return tok.kind == "name" and tok.text not in _KEYWORDS

    # -- grammar ------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.disjunct()
        if self.peek().kind == "arrow":
            self.next()
            return Conn(self.connectives["implies"], (left, self.formula()))
        return left

    def disjunct(self) -> Formula:
        out = self.conjunct()
        while self.peek().text == "or":
            self.next()
            out = Conn(self.connectives["or"], (out, self.conjunct()))
        return out

    def conjunct(self) -> Formula:
        out = self.negation()
        while self.peek().text == "and":
            self.next()
            out = Conn(self.connectives["and"], (out, self.negation()))
        return out

    def negation(self) -> Formula:
        if self.peek().text == "not":
            self.next()
            return Conn(self.connectives["not"], (self.negation(),))
        return self.quantified()

    def quantified(self) -> Formula:
        tok = self.peek()
        if tok.text in ("exists", "forall"):
            self.next()
            if not self._is_var(self.peek()):
                raise self.fail(f"{tok.text} needs at least one bound variable")
            # the first name always binds; later names bind unless they start
            # the body (an equality, call, or aggregation)
            bound = [self.next().text]
            while self._is_var(self.peek()) and self.peek(1).text not in ("=", "(", "{", "["):
                bound.append(self.next().text)
            body = self.negation()
            agg = MAX if tok.text == "exists" else MIN
            return self._build_agg(agg, (body,), tuple(bound), (Const(1.0),), tok.pos)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.next()
        if tok.kind == "number":
            return self._const(tok)
        if tok.text == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind != "name":
            raise FormulaSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)
        if tok.text == "true":
            return Const(1.0)
        if tok.text == "false":
            return Const(0.0)
        if tok.text in ("not", "and", "or", "exists", "forall"):
            raise FormulaSyntaxError(f"misplaced keyword {tok.text!r}", tok.pos)
        follower = self.peek().text
        if follower == "=":
            self.next()
            right = self.next()
            if not self._is_var(right):
                raise FormulaSyntaxError("equality needs a variable on the right", right.pos)
            return Eq(tok.text, right.text)
        if follower == "(":
            if tok.text in self.connectives:
                return self._connective_call(tok)
            return self._atom(tok)
        if follower in ("{", "["):
            return self._aggregation(tok)
        raise FormulaSyntaxError(f"unexpected bare name {tok.text!r}", tok.pos)

    def _const(self, tok: _Token) -> Const:
        try:
            return Const(float(tok.text))
        except ValueError as err:
            raise FormulaSyntaxError(str(err), tok.pos) from None

    def _connective_call(self, tok: _Token) -> Formula:
        conn = self.connectives[tok.text]
        self.expect("(")
        args = [self.formula()]
        while self.peek().text == ",":
            self.next()
            args.append(self.formula())
        self.expect(")")
        if len(args) != conn.arity:
            raise FormulaSyntaxError(
                f"connective {tok.text!r} has arity {conn.arity}, got {len(args)}", tok.pos
            )
        return Conn(conn, tuple(args))

    def _atom(self, tok: _Token) -> Formula:
        self.expect("(")
        args = []
        while True:
            arg = self.next()
            if not self._is_var(arg):
                raise FormulaSyntaxError("relational atoms take variables", arg.pos)
            args.append(arg.text)
            if self.peek().text != ",":
                break
            self.next()
        self.expect(")")
        return Atom(tok.text, tuple(args))

    def _params(self) -> dict[str, Fraction]:
        params: dict[str, Fraction] = {}
        self.expect("[")
        while True:
            key = self.next()
            if key.kind != "name":
                raise FormulaSyntaxError("expected a parameter name", key.pos)
            self.expect("=")
            params[key.text] = self._fraction()
            if self.peek().text != ",":
                break
            self.next()
        self.expect("]")
        return params

    def _fraction(self) -> Fraction:
        num = self.next()
        if num.kind != "number":
            raise FormulaSyntaxError("expected a numeric parameter value", num.pos)
        try:
            value = Fraction(num.text)
        except ValueError as err:
            raise FormulaSyntaxError(str(err), num.pos) from None
        if self.peek().text == "/":
            self.next()
            den = self.next()
            if den.kind != "number":
                raise FormulaSyntaxError("expected a denominator", den.pos)
            value /= Fraction(den.text)
        return value

    def _aggregation(self, tok: _Token) -> Formula:
        params = self._params() if self.peek().text == "[" else {}
        agg = self._resolve_aggregator(tok, params)
        self.expect("{")
        inner = [self.formula()]
        while self.peek().text == ",":
            self.next()
            inner.append(self.formula())
        self.expect(":")
        bound = []
        while self._is_var(self.peek()):
            bound.append(self.next().text)
        if not bound:
            raise self.fail("aggregations bind at least one variable")
        self.expect(":")
        conditions = [self.formula()]
        while self.peek().text == ",":
            self.next()
            conditions.append(self.formula())
        self.expect("}")
        if len(conditions) == 1 and len(inner) > 1:
            conditions = conditions * len(inner)
        return self._build_agg(agg, tuple(inner), tuple(bound), tuple(conditions), tok.pos)

    def _resolve_aggregator(self, tok: _Token, params: dict[str, Fraction]) -> AggregatorDef:
        name = tok.text
        if name not in self.aggregators:
            raise FormulaSyntaxError(f"unknown aggregator {name!r}", tok.pos)
        if not params:
            return self.aggregators[name]
        factory = _PARAMETRIC.get(name)
        if factory is None:
            raise FormulaSyntaxError(f"aggregator {name!r} takes no parameters", tok.pos)
        try:
            return factory(**params)
        except (TypeError, ValueError) as err:
            raise FormulaSyntaxError(f"bad parameters for {name!r}: {err}", tok.pos) from None

    def _build_agg(self, agg: AggregatorDef, inner, bound, conditions, pos: int) -> Formula:
        try:
            return Agg(agg, inner, bound, conditions)
        except (ValueError, ArityMismatchError) as err:
            raise FormulaSyntaxError(str(err), pos) from None


def parse(text: str,
          connectives: Mapping[str, ConnectiveDef] | None = None,
          aggregators: Mapping[str, AggregatorDef] | None = None) -> Formula:
    """Parse source text into a formula AST."""
    parser = _Parser(text, connectives, aggregators)
    out = parser.formula()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise FormulaSyntaxError(f"unexpected trailing input {trailing.text!r}", trailing.pos)
    return out


def parse_aggregator_ref(text: str,
                         aggregators: Mapping[str, AggregatorDef] | None = None) -> AggregatorDef:
    """Resolve an aggregator reference like ``am`` or ``proportional[beta=0.3]``."""
    parser = _Parser(text, None, aggregators)
    tok = parser.next()
    if tok.kind != "name":
        raise FormulaSyntaxError("expected an aggregator name", tok.pos)
    params = parser._params() if parser.peek().text == "[" else {}
    agg = parser._resolve_aggregator(tok, params)
    trailing = parser.peek()
    if trailing.kind != "end":
        raise FormulaSyntaxError(f"unexpected trailing input {trailing.text!r}", trailing.pos)
    return agg


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

_INFIX = {"and": "and", "or": "or", "implies": "->"}


def _fmt_value(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return repr(v)


def _fmt_fraction(f: Fraction) -> str:
    # exact decimal when the denominator divides a power of ten
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        if digits == 0:
            return str(f.numerator)
        scaled = f.numerator * 10 ** digits // f.denominator
        text = f"{scaled:0{digits + 1}d}"
        return f"{text[:-digits]}.{text[-digits:]}"
    return f"{f.numerator}/{f.denominator}"


def _default_aggregators() -> Mapping[str, AggregatorDef]:
    return builtin_aggregators()


def pretty(f: Formula) -> str:
    """Canonical text of a formula; parsing it back yields an equal AST."""
    if isinstance(f, Const):
        return _fmt_value(f.value)
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Atom):
        return f"{f.symbol}({', '.join(f.args)})"
    if isinstance(f, Conn):
        if f.conn.name == "not":
            return f"not {pretty(f.args[0])}"
        op = _INFIX.get(f.conn.name)
        if op is not None:
            return f"({pretty(f.args[0])} {op} {pretty(f.args[1])})"
        return f"{f.conn.name}({', '.join(pretty(a) for a in f.args)})"
    if isinstance(f, Agg):
        name = f.agg.name
        default = _default_aggregators().get(name)
        params = ""
        if f.agg.params and f.agg != default:
            inner = ", ".join(f"{k}={_fmt_fraction(v)}" for k, v in f.agg.params)
            params = f"[{inner}]"
        inners = ", ".join(pretty(g) for g in f.inner)
        bound = " ".join(f.bound)
        if all(c == f.conditions[0] for c in f.conditions):
            conds = pretty(f.conditions[0])
        else:
            conds = ", ".join(pretty(c) for c in f.conditions)
        return f"{name}{params} {{ {inners} : {bound} : {conds} }}"
    raise TypeError(f"not a formula: {f!r}")
