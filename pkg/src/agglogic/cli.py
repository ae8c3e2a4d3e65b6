"""Command-line frontend.

Subcommands: eval, sample, metrics, probe, eliminate, validate.  Every run
prints one machine-readable record (JSON by default, CSV for the row data
with --format csv); all randomness is derived from --seed, so records are
byte-identical across reruns.  Exit codes: 0 ok, 2 formula parse error,
3 continuity violation, 4 limit extrapolation not stabilized, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from itertools import product

import numpy as np

from . import __version__
from .basic import BasicFormula
from .continuity import ProbeConfig, ProbeReport, ct_probe, up_probe
from .eliminate import EliminateOptions, eliminate, validate as validate_result
from .errors import (
    AgglogicError,
    ContinuityViolationError,
    FormulaSyntaxError,
    NotStabilizedError,
)
from .grammar import parse, parse_aggregator_ref, pretty
from .logic import Atom, Agg, Conn, Formula, Signature, Structure, evaluate, free_vars
from .seqmetrics import FreqParams, mu1_unordered, muinf_ordered
from .worlds import IidModel, estimate_equivalence, load_model, sample

_RECORD_SCHEMA = {
    "command": str,
    "inputs": dict,
    "seed": int,
    "results": dict,  # always carries a "rows" list of flat dicts
    "version": str,
}


def validate_record(record: dict) -> None:
    """Check a run record against the published shape (see _RECORD_SCHEMA)."""
    for key, kind in _RECORD_SCHEMA.items():
        if key not in record:
            raise ValueError(f"record is missing {key!r}")
        if not isinstance(record[key], kind):
            raise ValueError(f"record field {key!r} has type {type(record[key]).__name__}")
    if not isinstance(record["results"].get("rows"), list):
        raise ValueError("record results must carry a 'rows' list")


def _jsonable(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(record: dict, fmt: str) -> None:
    validate_record(record)
    if fmt == "json":
        print(json.dumps(record, sort_keys=True, indent=2))
        return
    rows = record["results"]["rows"]
    fields = sorted({key for row in rows for key in row})
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=fields)
    writer.writeheader()
    for row in rows:
        writer.writerow({
            k: v if isinstance(v, (int, float, str)) else json.dumps(v, sort_keys=True)
            for k, v in row.items()
        })
    sys.stdout.write(out.getvalue())


def _record(command: str, inputs: dict, seed: int, results: dict) -> dict:
    return {
        "command": command,
        "inputs": _jsonable(inputs),
        "seed": int(seed),
        "results": _jsonable(results),
        "version": __version__,
    }


def _infer_signature(f: Formula) -> Signature:
    arities: dict[str, int] = {}
    def walk(node: Formula):
        if isinstance(node, Atom):
            seen = arities.setdefault(node.symbol, len(node.args))
            if seen != len(node.args):
                raise AgglogicError(
                    f"symbol {node.symbol!r} used at arities {seen} and {len(node.args)}"
                )
        elif isinstance(node, Conn):
            for child in node.args:
                walk(child)
        elif isinstance(node, Agg):
            for child in node.inner + node.conditions:
                walk(child)
    walk(f)
    return Signature(arities or {"E": 2})


def _world_for(args, formula: Formula) -> Structure:
    if args.model:
        model = _load_model(args)
        return sample(model, args.n, args.seed)
    signature = _infer_signature(formula)
    model = IidModel(signature, {name: 0.0 for name in signature.names()}, (args.n,))
    return sample(model, args.n, args.seed)


def _load_model(args) -> IidModel:
    model = load_model(args.model)
    if getattr(args, "schedule", None):
        sizes = tuple(int(s) for s in args.schedule.split(","))
        model = IidModel(model.signature, dict(model.probs), sizes, model.default_seed)
    return model


def _parse_seq(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip() != ""]


def _parse_freq_params(text: str) -> list[FreqParams]:
    out = []
    for chunk in text.split(";"):
        pairs = []
        for item in chunk.split(","):
            c, _, a = item.partition(":")
            pairs.append((float(c), float(a)))
        out.append(FreqParams(tuple(pairs)))
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

_EVAL_ROW_CAP = 100_000


def _cmd_eval(args) -> dict:
    formula = parse(args.formula)
    world = _world_for(args, formula)
    variables = tuple(sorted(free_vars(formula)))
    rows = []
    if not variables:
        rows.append({"value": evaluate(world, formula)})
    elif world.domain_size ** len(variables) > _EVAL_ROW_CAP:
        raise AgglogicError(
            f"{world.domain_size ** len(variables)} assignments exceed the "
            f"evaluation cap {_EVAL_ROW_CAP}"
        )
    else:
        for point in product(range(world.domain_size), repeat=len(variables)):
            assignment = dict(zip(variables, point))
            rows.append({
                "assignment": assignment,
                "value": evaluate(world, formula, assignment),
            })
    results = {"rows": rows, "free_variables": list(variables), "n": world.domain_size}
    return _record("eval", {"formula": args.formula, "n": args.n, "model": args.model},
                   args.seed, results)


def _cmd_sample(args) -> dict:
    model = _load_model(args)
    world = sample(model, args.n, args.seed)
    rows = []
    for name, _ in model.signature.symbols:
        for row in sorted(world.tuples(name)):
            rows.append({"symbol": name, "tuple": list(row)})
    results = {
        "rows": rows,
        "n": world.domain_size,
        "counts": {name: len(world.tuples(name)) for name, _ in model.signature.symbols},
    }
    return _record("sample", {"model": args.model, "n": args.n}, args.seed, results)


def _cmd_metrics(args) -> dict:
    p = _parse_seq(args.p)
    q = _parse_seq(args.q)
    row = {"mu1_unordered": mu1_unordered(p, q), "muinf_ordered": muinf_ordered(p, q)}
    return _record("metrics", {"p": args.p, "q": args.q}, args.seed, {"rows": [row]})


def _probe_config(args) -> ProbeConfig:
    kwargs = {"seed": args.seed}
    if args.schedule:
        kwargs["lengths"] = tuple(int(s) for s in args.schedule.split(","))
    if args.trials:
        kwargs["trials"] = args.trials
    return ProbeConfig(**kwargs)


def _report_rows(report: ProbeReport) -> list[dict]:
    return [
        {"kind": report.kind, "n": n, "deviation": dev}
        for n, dev in report.deviations
    ]


def _summarize(report: ProbeReport) -> dict:
    out = {"verdict": report.verdict, "max_deviation": report.max_deviation}
    if report.counterexample is not None:
        ce = report.counterexample
        out["counterexample"] = {
            "gap": ce.gap,
            "value_p": ce.value_p,
            "value_q": ce.value_q,
            "lengths_p": [len(s) for s in ce.seqs_p],
            "lengths_q": [len(s) for s in ce.seqs_q],
        }
    return out


def _cmd_probe(args) -> dict:
    agg = parse_aggregator_ref(args.agg)
    params = _parse_freq_params(args.params)
    cfg = _probe_config(args)
    ct = ct_probe(agg, params, cfg)
    up = up_probe(agg, params, cfg)
    results = {
        "rows": _report_rows(ct) + _report_rows(up),
        "ct": _summarize(ct),
        "up": _summarize(up),
        "agree": ct.verdict == up.verdict,
    }
    return _record("probe", {"agg": args.agg, "params": args.params,
                             "schedule": args.schedule, "trials": args.trials},
                   args.seed, results)


def _basic_rows(result: BasicFormula) -> list[dict]:
    return [
        {"guard": pretty(guard.to_formula()), "value": value}
        for guard, value in result.clauses
    ]


def _cmd_eliminate(args) -> dict:
    formula = parse(args.formula)
    model = _load_model(args)
    options = EliminateOptions(probe=ProbeConfig(seed=args.seed), nudge=args.nudge)
    result, trace = eliminate(formula, model, options)
    results = {
        "rows": _basic_rows(result),
        "formula": pretty(result.to_formula()),
        "trace": [_trace_record(entry) for entry in trace.records()],
    }
    if args.validate:
        report = validate_result(formula, result, model, args.eps, args.samples, args.seed)
        results["validation"] = {
            "eps": report.eps,
            "samples": report.samples,
            "fractions": [{"n": n, "fraction": frac} for n, frac in report.rows],
        }
    return _record("eliminate",
                   {"formula": args.formula, "model": args.model, "eps": args.eps,
                    "samples": args.samples, "validate": args.validate, "nudge": args.nudge},
                   args.seed, results)


def _trace_record(entry: dict) -> dict:
    out = dict(entry)
    if "types" in out:
        out["types"] = [
            {
                "guard": pretty(item["type"].to_formula()),
                "params": item["params"],
                "ct": item["ct"],
                "up": item["up"],
                "value": item["value"],
                "method": item["method"],
            }
            for item in out["types"]
        ]
    return out


def _cmd_validate(args) -> dict:
    formula = parse(args.formula)
    model = _load_model(args)
    if args.against:
        other = parse(args.against)
        report = estimate_equivalence(formula, other, model, args.eps, args.samples, args.seed)
    else:
        options = EliminateOptions(probe=ProbeConfig(seed=args.seed))
        result, _ = eliminate(formula, model, options)
        report = validate_result(formula, result, model, args.eps, args.samples, args.seed)
    rows = [{"n": n, "fraction": frac} for n, frac in report.rows]
    return _record("validate",
                   {"formula": args.formula, "against": args.against, "model": args.model,
                    "eps": args.eps, "samples": args.samples},
                   args.seed, {"rows": rows})


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="agglogic")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, model_required=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--model", required=model_required,
                       help="model config (JSON or TOML): signature, probs, schedule, seed")

    p = sub.add_parser("eval", help="evaluate a formula on one sampled world")
    p.add_argument("--formula", "-f", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)

    p = sub.add_parser("sample", help="sample one random structure")
    p.add_argument("--n", type=int, required=True)
    common(p, model_required=True)

    p = sub.add_parser("metrics", help="distances between two sequences")
    p.add_argument("--p", required=True, help="comma-separated entries in [0,1]")
    p.add_argument("--q", required=True)
    common(p)

    p = sub.add_parser("probe", help="continuity probes for an aggregator")
    p.add_argument("--agg", required=True, help="aggregator name, e.g. proportional[beta=0.3]")
    p.add_argument("--params", required=True,
                   help="frequency parameters: 'c:alpha,c:alpha' per argument, ';' between arguments")
    p.add_argument("--schedule", help="comma-separated probe lengths")
    p.add_argument("--trials", type=int)
    common(p)

    p = sub.add_parser("eliminate", help="rewrite into a guarded constant formula")
    p.add_argument("--formula", "-f", required=True)
    p.add_argument("--validate", action="store_true")
    p.add_argument("--nudge", action="store_true")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--schedule", help="override the model's domain-size schedule")
    common(p, model_required=True)

    p = sub.add_parser("validate", help="Monte Carlo equivalence check of two formulas")
    p.add_argument("--formula", "-f", required=True)
    p.add_argument("--against", "-g", help="second formula; defaults to the elimination result")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--schedule", help="override the model's domain-size schedule")
    common(p, model_required=True)

    return top


_DISPATCH = {
    "eval": _cmd_eval,
    "sample": _cmd_sample,
    "metrics": _cmd_metrics,
    "probe": _cmd_probe,
    "eliminate": _cmd_eliminate,
    "validate": _cmd_validate,
}


def run(argv=None) -> int:
    """Run one subcommand; returns the process exit code instead of exiting."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        record = _DISPATCH[args.command](args)
    except FormulaSyntaxError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return 2
    except ContinuityViolationError as err:
        print(f"continuity violation: {err}", file=sys.stderr)
        return 3
    except NotStabilizedError as err:
        print(f"not stabilized: {err}", file=sys.stderr)
        return 4
    except (AgglogicError, OSError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    _emit(record, args.format)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
