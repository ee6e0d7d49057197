"""``kinship-lr`` command line.

Exit codes: 0 success, 1 validation or usage error, 2 I/O or parse error.
Degenerate likelihood ratios are results, not failures: they are reported
with warnings and exit 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .diagnostics import sort_diagnostics
from .oracle import run_oracle
from .scenario import (
    SCHEMA,
    ScenarioError,
    check_scenario,
    compile_scenario,
    dumps_report,
    evaluate,
    load_scenario,
    pedigree_report,
    sweep,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _print_problems(problems, stream=None):
    stream = stream or sys.stderr
    by_file: dict[str, list] = {}
    for filename, diag in problems:
        by_file.setdefault(filename, []).append(diag)
    for filename, diags in by_file.items():
        for d in sort_diagnostics(diags):
            print(d.format(filename), file=stream)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def format_report(report: dict, timestamps: bool = False) -> str:
    lines = []
    if timestamps:
        lines.append(f"generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    h = report["hypotheses"]
    lines.append(f"scenario: {report['scenario']['name']}")
    lines.append(f"H0 (null): {h['null']}")
    lines.append(f"H1 (alt):  {h['alt']}")
    lines.append(f"prior odds H1:H0 = {_fmt(h['prior_odds_alt_vs_null'])}")
    if report["items"]:
        lines.append("")
        lines.append(f"{'item':<26} {'kind':<12} {'LR = P(E|H1)/P(E|H0)':>22} {'1/LR = P(E|H0)/P(E|H1)':>24}")
        for e in report["items"]:
            lines.append(f"{e['id']:<26} {e['kind']:<12} {_fmt(e['lr']):>22} {_fmt(e['inverse_lr']):>24}")
    o = report["overall"]
    lines.append("")
    lines.append(f"overall LR (H1 over H0): {_fmt(o['lr'])}   [{o['method']}]")
    lines.append(f"overall 1/LR (H0 over H1): {_fmt(o['inverse_lr'])}")
    p = report["posterior"]
    lines.append(f"posterior odds H1:H0 = {_fmt(p['odds_alt_vs_null'])}; "
                 f"P(H1|E) = {_fmt(p['probability_alt'])}; P(H0|E) = {_fmt(p['probability_null'])}")
    if "network" in report:
        n = report["network"]
        lines.append("")
        lines.append(f"network model {n['model']} (hypothesis node {n['hypothesis_node']}):")
        for e in n["items"]:
            lines.append(f"  {e['id']:<14} LR {_fmt(e['lr'])}  1/LR {_fmt(e['inverse_lr'])}")
        lines.append(f"  product of items {_fmt(n['product_of_items'])}; joint two-clamp LR {_fmt(n['joint_lr'])}")
    if "selection" in report:
        s = report["selection"]
        lines.append("")
        lines.append(f"selection effect: per-trial p = {_fmt(s['per_trial_probability'])} ({s['per_trial_source']}), "
                     f"E[trials] = {_fmt(s['trials']['expected'])}")
        lines.append(f"  P(at least one such find) = {_fmt(s['at_least_one_probability'])}")
        if "adjusted_onomasticon_lr" in s:
            lines.append(f"  selection-adjusted onomasticon LR = {_fmt(s['adjusted_onomasticon_lr'])} "
                         "(not used in the overall LR)")
    if "pedigrees" in report:
        lines.extend(_pedigree_lines(report["pedigrees"]))
    if "sweep" in report:
        lines.append("")
        axes = [a["path"] for a in report["sweep"]["axes"]]
        lines.append("sweep: " + ", ".join(axes))
        for row in report["sweep"]["rows"]:
            vals = ", ".join(f"{k}={_fmt(v)}" for k, v in row["values"].items())
            lines.append(f"  {vals}:  LR {_fmt(row['overall_lr'])}  1/LR {_fmt(row['inverse_lr'])}")
    for note in report.get("notes", []):
        lines.append(f"note: {note}")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _pedigree_lines(p: dict) -> list[str]:
    lines = ["", f"pedigree posterior ({', '.join(p['markers'])}; mutation rate {_fmt(p['mutation_rate'])}):"]
    for r in p["candidates"]:
        mark = "  <- most probable" if r["argmax"] else ""
        post = "undefined" if r["posterior"] is None else _fmt(r["posterior"])
        lines.append(f"  {r['label']:<24} prior {_fmt(r['prior'])}  posterior {post}{mark}")
    return lines


def _write_machine(report: dict, path: str | None):
    if path:
        Path(path).write_text(dumps_report(report), encoding="utf-8")


def _parse_axis(text: str):
    if "=" not in text:
        raise _UsageError(f"--axis expects <path>=<v1,v2,...>, got {text!r}")
    path, values = text.split("=", 1)
    out = []
    for v in values.split(","):
        v = v.strip()
        if not v:
            raise _UsageError(f"empty value in --axis {text!r}")
        try:
            out.append(json.loads(v))
        except json.JSONDecodeError:
            out.append(v)
    return path.strip(), out


def cmd_validate(args) -> int:
    scenario = load_scenario(args.path)
    problems = check_scenario(scenario)
    _print_problems(problems)
    return EXIT_OK


def cmd_eval(args) -> int:
    compiled = compile_scenario(load_scenario(args.path))
    report = evaluate(compiled)
    report["command"] = "eval"
    sys.stdout.write(format_report(report, args.timestamps))
    _write_machine(report, args.machine)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.path)
    if args.axis:
        axes = [_parse_axis(a) for a in args.axis]
    else:
        axes = [(a["path"], list(a["values"])) for a in scenario.raw.get("sweep", [])]
    if not axes:
        raise _UsageError("no sweep axes: pass --axis <path>=<values> or add a 'sweep' section")
    compile_scenario(scenario)
    try:
        report = sweep(scenario, axes)
    except KeyError as exc:
        raise _UsageError(str(exc.args[0])) from None
    report["command"] = "sweep"
    sys.stdout.write(format_report(report, args.timestamps))
    _write_machine(report, args.machine)
    return EXIT_OK


def cmd_pedigrees(args) -> int:
    compiled = compile_scenario(load_scenario(args.path))
    if compiled.pedigrees is None:
        raise _UsageError("scenario has no 'pedigrees' section")
    ped = pedigree_report(compiled)
    report = {"schema": SCHEMA, "command": "pedigrees", "scenario": {"name": compiled.name}, "pedigrees": ped,
              "warnings": list(compiled.warnings)}
    if ped["undefined"]:
        report["warnings"].append("all candidate pedigrees have zero likelihood; posterior undefined")
    lines = []
    if args.timestamps:
        lines.append(f"generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    lines.append(f"scenario: {compiled.name}")
    lines.extend(_pedigree_lines(ped))
    lines.extend(f"warning: {w}" for w in report["warnings"])
    sys.stdout.write("\n".join(lines) + "\n")
    _write_machine(report, args.machine)
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be at least 1")
    ran, mismatch = run_oracle(args.seed, args.count)
    result = {"schema": SCHEMA, "command": "oracle", "seed": args.seed, "count": args.count, "cases_run": ran,
              "passed": mismatch is None}
    if mismatch is not None:
        fixture = json.dumps(mismatch.fixture(), sort_keys=True, indent=2)
        print(f"oracle mismatch in case {ran}: {mismatch.detail}")
        print(fixture)
        if args.path:
            Path(args.path).write_text(fixture + "\n", encoding="utf-8")
        result["counterexample"] = mismatch.fixture()
    else:
        print(f"oracle: {ran} random networks (seed {args.seed}) agree with enumeration")
    if args.machine:
        Path(args.machine).write_text(json.dumps(result, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if mismatch is None else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="kinship-lr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    def common(p, machine=True):
        if machine:
            p.add_argument("--machine", metavar="PATH", help="write the structured report here")
        p.add_argument("--timestamps", action="store_true", help="stamp the human-readable output")

    p = sub.add_parser("validate", help="check a scenario and every file it references")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate all evidence items and the overall LR")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="evaluate over a parameter grid")
    p.add_argument("path")
    p.add_argument("--axis", action="append", default=[], metavar="PATH=V1,V2,...")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pedigrees", help="posterior over candidate pedigrees")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_pedigrees)

    p = sub.add_parser("oracle", help="check elimination against enumeration on random networks")
    p.add_argument("path", nargs="?", help="where to write a counterexample fixture")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--machine", metavar="PATH")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        return args.func(args)
    except _UsageError as exc:
        print(f"kinship-lr: usage error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        _print_problems(exc.problems)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
