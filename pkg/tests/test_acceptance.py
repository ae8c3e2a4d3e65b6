"""Acceptance gate: one test (or group) per criterion, each printing a
pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`.

Criterion 6's mean-field validation is checked three ways: against the exact
binomial oracle at eps = 0.05, at the smallest tolerance whose union-bound
justification actually holds (eps = 0.25), and literally as stated
(eps = 0.05 with fraction >= 0.95), which the oracle shows is unattainable
and is therefore a strict expected failure.  Details in the repo notes.
"""

import math
import random
from fractions import Fraction
from itertools import product

import pytest

from agglogic import (
    AM,
    GM,
    IidModel,
    MAX,
    MIN,
    MU1_DIST,
    ProbeConfig,
    Signature,
    Structure,
    TSUM,
    eliminate,
    EliminateOptions,
    evaluate,
    FreqParams,
    length_inverse,
    mu1_unordered,
    muinf_ordered,
    parse,
    pagerank_stage,
    probe_both,
    proportional_aggregator,
    quantifier_to_agg,
    validate,
    analytic_alpha,
    estimate_freq_params,
)
from agglogic.basic import LiteralConjunction, TOP_GUARD
from agglogic.catalog import RESCHER, HARTIG
from agglogic.cli import run
from agglogic.errors import ContinuityViolationError

SIG_E = Signature({"E": 2})


def report(number, label, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" -- {detail}" if detail else ""
    print(f"[acceptance] criterion {number} ({label}): {status}{suffix}", flush=True)
    assert ok, f"criterion {number} ({label}){suffix}"


# -- criterion 1 -------------------------------------------------------------

def test_criterion_1_pseudometric_suite():
    rng = random.Random(101)
    ok = True
    for _ in range(10_000):
        p = [rng.random() for _ in range(rng.randint(1, 20))]
        q = [rng.random() for _ in range(rng.randint(1, 20))]
        r = [rng.random() for _ in range(rng.randint(1, 20))]
        for metric in (mu1_unordered, muinf_ordered):
            dpq = metric(p, q)
            ok &= metric(q, p) == dpq
            ok &= 0.0 <= dpq <= 1.0
            ok &= metric(p, r) <= dpq + metric(q, r) + 1e-12
    exact = mu1_unordered((0, 0.5, 1), (0, 0, 0.5, 0.5, 1, 1))
    ok &= exact == 0.0
    report(1, "pseudometric suite", ok, f"replication instance = {exact!r}")


# -- criterion 2 -------------------------------------------------------------

def test_criterion_2_semantics_oracle():
    from helpers import FO_BATTERY, all_binary_tables, fo_eval, fo_free_vars, fo_to_formula

    checked = 0
    ok = True
    for n in (1, 2, 3):
        for tables in all_binary_tables(n):
            A = Structure(SIG_E, n, tables)
            for node in FO_BATTERY:
                formula = fo_to_formula(node)
                fvars = tuple(sorted(fo_free_vars(node)))
                for point in product(range(n), repeat=len(fvars)):
                    env = dict(zip(fvars, point))
                    want = float(fo_eval(tables, n, node, env))
                    ok &= evaluate(A, formula, env) == want
                    checked += 1
    report(2, "max/min quantifier semantics vs brute force", ok,
           f"{checked} formula evaluations over 530 structures, exact")


# -- criterion 3 -------------------------------------------------------------

def _boolean_seqs(max_len):
    for m in range(1, max_len + 1):
        yield from product((0.0, 1.0), repeat=m)


def test_criterion_3_quantifier_adapters():
    ok = True
    checked = 0
    betas = [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)]
    for beta in betas:
        adapter = proportional_aggregator(beta)
        for p in _boolean_seqs(6):
            domain = set(range(len(p)))
            witnesses = {i for i, v in enumerate(p) if v == 1.0}
            want = float(Fraction(len(witnesses), len(domain)) >= beta)
            ok &= adapter(p) == want
            checked += 1
    rescher = quantifier_to_agg(RESCHER)
    hartig = quantifier_to_agg(HARTIG)
    for p in _boolean_seqs(6):
        for q in _boolean_seqs(6):
            x1 = {i for i, v in enumerate(p) if v == 1.0}
            x2 = {i for i, v in enumerate(q) if v == 1.0}
            ok &= rescher(p, q) == float(len(x1) <= len(x2))
            ok &= hartig(p, q) == float(len(x1) == len(x2))
            checked += 2
    report(3, "quantifier adapters vs set cardinalities", ok, f"{checked} exact checks")


# -- criterion 4 -------------------------------------------------------------

def _random_params(rng, k):
    values = []
    while len(values) < k:
        c = rng.uniform(0.05, 0.95)
        if all(abs(c - v) >= 0.1 for v in values):
            values.append(c)
    raw = [rng.uniform(0.05, 1.0) for _ in range(k)]
    total = sum(raw)
    return FreqParams(tuple((c, a / total) for c, a in zip(sorted(values), raw)))


def test_criterion_4_continuity_classification():
    rng = random.Random(404)
    cfg = ProbeConfig(seed=404)
    ok = True
    agreements = 0

    def both(agg, params):
        nonlocal agreements, ok
        ct, up = probe_both(agg, params, cfg)
        ok_here = ct.verdict == up.verdict
        agreements += ok_here
        ok &= ok_here
        return ct

    # the always-continuous family at 20 random parameter tuples
    for i in range(20):
        params = _random_params(rng, rng.randint(1, 3))
        for agg in (AM, GM, TSUM,
                    length_inverse(Fraction(rng.randint(5, 100), 100))):
            ok &= both(agg, params).verdict == "pass"
        pair = (params, _random_params(rng, rng.randint(1, 2)))
        ok &= both(MU1_DIST, pair).verdict == "pass"

    # extremum aggregators: all-positive masses pass, zero mass at an
    # extremal value fails with a counterexample
    ok &= both(MAX, FreqParams(((0.2, 0.5), (0.8, 0.5)))).verdict == "pass"
    ok &= both(MIN, FreqParams(((0.2, 0.5), (0.8, 0.5)))).verdict == "pass"
    max_fail = both(MAX, FreqParams(((0.0, 1.0), (1.0, 0.0))))
    ok &= max_fail.verdict == "fail" and max_fail.counterexample is not None
    min_fail = both(MIN, FreqParams(((1.0, 1.0), (0.0, 0.0))))
    ok &= min_fail.verdict == "fail" and min_fail.counterexample is not None

    # proportional threshold: fails exactly where the 1-mass hits beta
    mass = FreqParams(((0.0, 0.7), (1.0, 0.3)))
    grid = [Fraction(i, 10) for i in range(1, 10)] + [Fraction(7, 20)]
    for beta in grid:
        verdict = both(proportional_aggregator(beta), mass).verdict
        want = "fail" if beta == Fraction(3, 10) else "pass"
        ok &= verdict == want

    # Rescher: equal mass at value 1 on both sides fails, anything else passes;
    # with no value-1 class at all the exact-1 counts vanish and it passes
    rescher = quantifier_to_agg(RESCHER)
    equal = (FreqParams(((0.5, 0.6), (1.0, 0.4))), FreqParams(((0.0, 0.6), (1.0, 0.4))))
    unequal = (FreqParams(((0.5, 0.6), (1.0, 0.4))), FreqParams(((0.0, 0.5), (1.0, 0.5))))
    ok &= both(rescher, equal).verdict == "fail"
    ok &= both(rescher, unequal).verdict == "pass"
    zero_mass_ones = (FreqParams(((0.5, 1.0), (1.0, 0.0))), FreqParams(((0.0, 1.0),)))
    ok &= both(rescher, zero_mass_ones).verdict == "fail"  # 0 = 0, flipped by one exact 1
    no_ones = (FreqParams(((0.5, 1.0),)), FreqParams(((0.0, 0.4), (0.6, 0.6))))
    ok &= both(rescher, no_ones).verdict == "pass"

    report(4, "continuity probe classification", ok,
           f"ct and up verdicts agreed on all {agreements} tuples")


# -- criterion 5 -------------------------------------------------------------

def _lits(eqs=(), atoms=()):
    return LiteralConjunction(tuple(eqs), tuple(atoms))


def test_criterion_5_frequency_parameters():
    sig = Signature({"U": 1, "E": 2})
    model = IidModel(sig, {"U": 0.5, "E": 0.3}, (200,))
    u = lambda v, s=True: ("U", (v,), s)
    e = lambda a, b, s=True: ("E", (a, b), s)
    type_of = lambda su, se: _lits(atoms=[u("x", su), e("x", "x", se)])
    combos = [
        ((), ("y",), TOP_GUARD, _lits(atoms=[u("y")])),
        ((), ("y",), TOP_GUARD, _lits(atoms=[u("y", False)])),
        ((), ("y",), TOP_GUARD, _lits(atoms=[e("y", "y")])),
        ((), ("y",), TOP_GUARD, _lits(atoms=[u("y"), e("y", "y")])),
        ((), ("y",), TOP_GUARD, _lits(atoms=[u("y", False), e("y", "y", False)])),
        ((), ("y", "z"), TOP_GUARD, _lits(atoms=[e("y", "z")])),
        (("x",), ("y", "z"), type_of(True, True), _lits(atoms=[e("y", "z")])),
        (("x",), ("y", "z"), type_of(True, False), _lits(atoms=[e("y", "z")])),
        (("x",), ("y", "z"), type_of(False, True), _lits(atoms=[e("y", "z", False)])),
        (("x",), ("y", "z"), type_of(False, False), _lits(atoms=[e("y", "z")])),
    ]
    ok = True
    worst = 0.0
    for i, (xvars, yvars, theta, guard) in enumerate(combos):
        alpha = analytic_alpha(guard, theta, model, yvars, xvars)
        est = estimate_freq_params(
            [guard], None, theta, model, 200, 200, seed=500 + i,
            yvars=yvars, xvars=xvars,
        )[0]
        pull = abs(est.alpha - alpha) / est.stderr if est.stderr > 0 else math.inf
        worst = max(worst, pull)
        ok &= abs(est.alpha - alpha) <= 3 * est.stderr
    report(5, "analytic vs empirical frequency parameters", ok,
           f"10 combos at n=200, 200 worlds; worst deviation {worst:.2f} stderr")


# -- criterion 6 -------------------------------------------------------------

MODEL6 = IidModel(SIG_E, {"E": 0.3}, (50, 100, 200))
OPTS6 = EliminateOptions(probe=ProbeConfig(seed=606))


def _binomial_row_pass(n: int, p: float, eps: float) -> float:
    """P(|Bin(n,p)/n - p| <= eps), with the same float comparison the
    estimator applies; computed in log space."""
    lg = math.lgamma
    total = 0.0
    for k in range(n + 1):
        if abs(k / n - p) <= eps:
            total += math.exp(
                lg(n + 1) - lg(k + 1) - lg(n - k + 1)
                + k * math.log(p) + (n - k) * math.log(1 - p)
            )
    return total


@pytest.fixture(scope="module")
def am_elimination():
    phi = parse("am { E(x,y) : y : true }")
    result, _ = eliminate(phi, MODEL6, OPTS6)
    return phi, result


def test_criterion_6_mean_clause_value(am_elimination):
    _, result = am_elimination
    ok = all(abs(v - 0.3) <= 1e-9 for _, v in result.clauses)
    report(6, "eliminate(am) clause value 0.3 +- 1e-9", ok,
           f"values {[v for _, v in result.clauses]}")


def test_criterion_6_mean_validation_tracks_binomial_oracle(am_elimination):
    phi, result = am_elimination
    rep = validate(phi, result, MODEL6, eps=0.05, samples=100, seed=606)
    ok = True
    details = []
    for n, frac in rep.rows:
        oracle = _binomial_row_pass(n, 0.3, 0.05) ** n
        details.append(f"n={n}: observed {frac:.2f}, oracle {oracle:.2e}")
        ok &= abs(frac - oracle) <= 0.12
    report(6, "eliminate(am) validation matches exact binomial oracle at eps=0.05",
           ok, "; ".join(details))


def test_criterion_6_mean_validation_at_self_consistent_eps(am_elimination):
    # the criterion's own justification, n*2*exp(-2*n*eps^2) < 0.02 at n=100,
    # first holds at eps ~ 0.22; at eps = 0.25 the bound is 7.5e-4
    phi, result = am_elimination
    eps = 0.25
    bound = 100 * 2 * math.exp(-2 * 100 * eps ** 2)
    rep = validate(phi, result, MODEL6, eps=eps, samples=100, seed=606)
    ok = bound < 0.02
    ok &= rep.fraction_at(100) >= 0.95 and rep.fraction_at(200) >= 0.95
    report(6, "eliminate(am) validation at the smallest union-bound-consistent eps",
           ok, f"eps={eps}, union bound {bound:.1e}, fractions {dict(rep.rows)}")


@pytest.mark.xfail(strict=True, reason=(
    "unattainable as stated: at eps=0.05 the exact binomial oracle gives a "
    "world-pass probability of 4.7e-12 (n=100) and 2.4e-10 (n=200), so the "
    "observed fraction is 0, not >= 0.95; the criterion's own union-bound "
    "justification requires eps >= 0.215"
))
def test_criterion_6_mean_validation_literal_statement(am_elimination):
    phi, result = am_elimination
    rep = validate(phi, result, MODEL6, eps=0.05, samples=100, seed=606)
    ok = rep.fraction_at(100) >= 0.95 and rep.fraction_at(200) >= 0.95
    report(6, "eliminate(am) validation, literal eps=0.05 statement", ok,
           f"fractions {dict(rep.rows)} (expected failure: tolerance is "
           f"inconsistent with its own union-bound rationale)")


def test_criterion_6_max_elimination_and_validation():
    phi = parse("max { E(x,y) : y : true }")
    result, _ = eliminate(phi, MODEL6, OPTS6)
    ok = all(v == 1.0 for _, v in result.clauses)
    rep = validate(phi, result, MODEL6, eps=0.01, samples=100, seed=607)
    isolated = 100 * 0.7 ** 100
    ok &= isolated < 1e-13
    ok &= rep.fraction_at(100) >= 0.99
    report(6, "eliminate(max) yields 1 and validates", ok,
           f"fractions {dict(rep.rows)}, isolated-vertex bound {isolated:.2e}")


def test_criterion_6_boundary_proportional_exits_3(tmp_path):
    config = tmp_path / "model.json"
    config.write_text(
        '{"signature": {"E": 2}, "probs": {"E": 0.3}, "schedule": [50, 100], "seed": 0}'
    )
    code = run([
        "eliminate", "-f", "proportional[beta=0.3] { E(x,y) : y : true }",
        "--model", str(config), "--seed", "8",
    ])
    ok = code == 3
    with pytest.raises(ContinuityViolationError):
        eliminate(parse("proportional[beta=0.3] { E(x,y) : y : true }"), MODEL6, OPTS6)
    report(6, "boundary proportional raises and exits with code 3", ok, f"exit code {code}")


# -- criterion 7 -------------------------------------------------------------

def test_criterion_7_connective_layer_exactness():
    from agglogic import atom_to_basic, combine_connective
    from agglogic.catalog import NOT, PROD
    from helpers import all_binary_tables

    battery = [
        parse("E(x, y)"),
        parse("x = y"),
        parse("not E(x, x)"),
        parse("E(x, y) and E(y, x)"),
        parse("(x = y or not E(x, y))"),
        parse("(E(x, x) -> E(y, y)) and not x = y"),
    ]
    ok = True
    checked = 0
    for f in battery:
        basic = atom_to_basic(f)
        negated = combine_connective(NOT, [basic])
        product_form = combine_connective(PROD, [basic, basic])
        for n in (1, 2, 3):
            for tables in all_binary_tables(n):
                A = Structure(SIG_E, n, tables)
                for x, y in product(range(n), repeat=2):
                    env = {"x": x, "y": y}
                    direct = evaluate(A, f, env)
                    ok &= basic.evaluate(A, env) == direct
                    ok &= evaluate(A, basic.to_formula(), env) == direct
                    ok &= negated.evaluate(A, env) == 1.0 - direct
                    ok &= product_form.evaluate(A, env) == direct * direct
                    checked += 4
    report(7, "guarded-form layer is exact", ok,
           f"{checked} bit-identical comparisons over all n<=3 structures")


# -- criterion 8 -------------------------------------------------------------

def test_criterion_8_pagerank_fidelity():
    ok = True
    # stage 0 is exactly 1/n on any structure
    for n in range(2, 11):
        A = Structure(SIG_E, n, {"E": {(0, 1 % n)}})
        for x in range(n):
            ok &= evaluate(A, pagerank_stage(0), {"x": x}) == 1.0 / n
    # stage 1 on a hand-built 4-node digraph vs an independent iteration step
    edges = {(0, 1), (0, 2), (1, 2), (2, 0), (3, 2), (3, 3)}
    A = Structure(SIG_E, 4, {"E": edges})
    outdeg = {v: sum(1 for a, _ in edges if a == v) for v in range(4)}
    base = [0.25] * 4
    expected = [
        sum(base[b] / outdeg[b] for b, a in edges if a == x and outdeg[b] > 0)
        for x in range(4)
    ]
    stage1 = pagerank_stage(1)
    worst = 0.0
    for x in range(4):
        got = evaluate(A, stage1, {"x": x})
        worst = max(worst, abs(got - expected[x]))
        ok &= abs(got - expected[x]) <= 1e-12
    report(8, "stage formulas match direct iteration", ok,
           f"stage-1 max deviation {worst:.2e} on the 4-node digraph")


# -- criterion 9 -------------------------------------------------------------

def test_criterion_9_reproducibility(tmp_path, capsys):
    config = tmp_path / "model.json"
    config.write_text(
        '{"signature": {"E": 2}, "probs": {"E": 0.3}, "schedule": [20, 40], "seed": 0}'
    )
    commands = [
        ["eval", "-f", "am { E(x,y) : y : true }", "--n", "20",
         "--model", str(config), "--seed", "3"],
        ["sample", "--model", str(config), "--n", "25", "--seed", "4"],
        ["metrics", "--p", "0,0.5,1", "--q", "0,0,0.5,0.5,1,1"],
        ["probe", "--agg", "am", "--params", "0.2:0.5,0.8:0.5",
         "--schedule", "64,256,1024", "--seed", "5"],
        ["eliminate", "-f", "am { E(x,y) : y : true }", "--model", str(config),
         "--validate", "--eps", "0.25", "--samples", "10", "--seed", "6"],
        ["validate", "-f", "max { E(x,y) : y : true }", "-g", "1",
         "--model", str(config), "--eps", "0.01", "--samples", "10", "--seed", "7"],
    ]
    ok = True
    for argv in commands:
        assert run(argv) == 0
        first = capsys.readouterr().out
        assert run(argv) == 0
        second = capsys.readouterr().out
        ok &= first == second and first.encode() == second.encode()
    report(9, "CLI records byte-identical across reruns", ok,
           f"{len(commands)} subcommand invocations")
