"""Batch front end: run scenarios, on/off comparisons, validation.

Exit codes: 0 success, 1 scenario or file error, 2 simulation divergence,
64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import scenario as sc
from . import sim

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_DIVERGED = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridfm", description="Hybrid force-motion probing simulator.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario key (repeatable)")
    common.add_argument("--seed", type=int, help="shorthand for --set seed=N")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, text in (("run", "simulate one scenario"), ("compare", "simulate with the estimator on and off")):
        p = sub.add_parser(verb, parents=[common], help=text)
        p.add_argument("scenario", help="scenario file or shipped scenario name")
        p.add_argument("--out", type=Path, default=Path("."), metavar="DIR", help="output directory")
    p = sub.add_parser("validate", parents=[common], help="check a scenario file")
    p.add_argument("scenario")
    sub.add_parser("list-scenarios", parents=[common], help="list shipped scenarios")
    return parser


def _overrides(args) -> list[str]:
    items = list(args.overrides)
    if args.seed is not None:
        items.append(f"seed={args.seed}")
    return items


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text, end="" if text.endswith("\n") else "\n")


def _write_run(out: Path, stem: str, records, summary) -> None:
    with open(out / f"{stem}.csv", "w", newline="") as f:
        sim.write_csv(records, f)
    (out / f"{stem}.summary.txt").write_text(sim.format_summary(summary))


def _cmd_run(args, scenario) -> int:
    records, summary = sim.run(scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_run(args.out, scenario.name, records, summary)
    _say(args, sim.summary_record(summary, scenario.name))
    return EXIT_OK


def _cmd_compare(args, scenario) -> int:
    result = sim.compare(scenario)
    args.out.mkdir(parents=True, exist_ok=True)
    for label, (records, summary) in (("on", result.on), ("off", result.off)):
        _write_run(args.out, f"{scenario.name}.{label}", records, summary)
    delta = "".join(f"{k}={sim.format_value(v)}\n" for k, v in result.delta.items())
    (args.out / f"{scenario.name}.delta.txt").write_text(delta)
    _say(args, sim.summary_record(result.on[1], f"{scenario.name}.on"))
    _say(args, sim.summary_record(result.off[1], f"{scenario.name}.off"))
    return EXIT_OK


def _cmd_validate(args) -> int:
    values, lines, _ = sc.load_values(args.scenario, _overrides(args))
    problems = sc.validate(values, lines)
    for d in problems:
        print(f"{args.scenario}: {d}", file=sys.stderr)
    if problems:
        return EXIT_SCENARIO
    _say(args, f"{args.scenario}: ok")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")

    if args.verb == "list-scenarios":
        for path in sc.shipped_scenarios():
            _say(args, path.stem)
        return EXIT_OK
    try:
        if args.verb == "validate":
            return _cmd_validate(args)
        scenario = sc.load(args.scenario, _overrides(args))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except sc.ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{args.scenario}: {d}", file=sys.stderr)
        return EXIT_SCENARIO

    try:
        return _cmd_run(args, scenario) if args.verb == "run" else _cmd_compare(args, scenario)
    except (sim.SimulationDiverged, sim.NoContactReached) as exc:
        print(f"error: {scenario.name}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
