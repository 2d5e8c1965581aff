"""``netsync`` command line.

Exit codes: 0 success, 1 input error, 2 certificate not satisfied,
3 simulation diverged.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from typing import Optional

import yaml

from . import runner
from .errors import NetsyncError
from .scenario import PRESETS, Scenario, ScenarioError, build, dumps, load, preset, with_seed

EXIT_OK, EXIT_INPUT, EXIT_UNCERTIFIED, EXIT_DIVERGED = 0, 1, 2, 3

SWEEP_FORMAT = "%.17g"


def _load(path: str) -> Scenario:
    if path.startswith("preset:"):
        return preset(path.split(":", 1)[1])
    try:
        return load(path)
    except OSError as exc:
        raise ScenarioError(path, f"cannot read scenario: {exc.strerror}") from None


def _write_json(path: str, doc: dict):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_certify(args) -> int:
    sc = _load(args.scenario)
    rep = runner.certify(build(sc))
    print(runner.format_certificate(rep))
    print(json.dumps(rep, indent=2))
    path = args.report or os.path.join(args.out or sc.output.directory, "certificate.json")
    _write_json(path, rep)
    return EXIT_OK if rep["satisfied"] else EXIT_UNCERTIFIED


def cmd_simulate(args) -> int:
    sc = _load(args.scenario)
    if args.seed is not None:
        sc = with_seed(sc, args.seed)
    out = args.out or sc.output.directory
    setup = build(sc)
    res = runner.simulate(setup, per_node=True if args.per_node else None)
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, "trajectory.csv")
    res.trajectory.to_csv(csv_path)
    summary = dict(res.summary, csv=csv_path)
    _write_json(os.path.join(out, "summary.json"), summary)
    print(json.dumps(summary, indent=2))
    if res.trajectory.diverged:
        print(f"error: state diverged after t={res.trajectory.divergence_time:.6g}; partial trajectory kept",
              file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _parse_values(text: Optional[str]) -> list:
    if text is None or not text.strip():
        return []
    out = []
    for tok in text.split(","):
        out.append(_scalar(tok.strip()))
    return out


def _scalar(tok: str):
    for conv in (int, float):
        try:
            return conv(tok)
        except ValueError:
            pass
    v = yaml.safe_load(tok)
    return tok if v is None else v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return "nan" if isinstance(v, float) and math.isnan(v) else SWEEP_FORMAT % v
    return str(v)


def cmd_sweep(args) -> int:
    sc = _load(args.scenario)
    if args.seed is not None:
        sc = with_seed(sc, args.seed)
    rows = runner.sweep(sc, args.axis, _parse_values(args.values), jobs=args.jobs)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(runner.SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_preset(args) -> int:
    sc = preset(args.name)
    if args.print or not args.out:
        sys.stdout.write(dumps(sc))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps(sc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netsync", description="Certify and simulate mismatched oscillator networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="spectral certificates and the error bound")
    c.add_argument("scenario", help="scenario YAML file, or preset:NAME")
    c.add_argument("--report", help="structured report path (default OUT/certificate.json)")
    c.add_argument("--out", help="output directory (default from the scenario)")
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("simulate", help="integrate one scenario and write the trajectory CSV")
    s.add_argument("scenario")
    s.add_argument("--out", help="output directory (default from the scenario)")
    s.add_argument("--seed", type=int, help="override both the mismatch and the initial-state seed")
    s.add_argument("--per-node", action="store_true", help="add per-node error columns")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run one scenario per value of a scalar field")
    w.add_argument("scenario")
    w.add_argument("--axis", required=True, help="dotted field path, e.g. controller.k")
    w.add_argument("--values", default="", help="comma-separated values")
    w.add_argument("--seed", type=int)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", help="CSV path (default stdout)")
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("preset", help="emit a built-in scenario")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("--print", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NetsyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
