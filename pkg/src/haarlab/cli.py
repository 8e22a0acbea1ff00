"""``lab``: run an experiment suite and write a JSON report.

Exit status 0 when every hard check passes, 1 on a failing check, 2 on an
invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import BACKENDS, GENERATORS, SUITES, ConfigError, ExperimentConfig, run_suite


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--depth", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--both-backends", action="store_true",
                   help="run sandwich / lower-bound with shift and hilbert")
    p.add_argument("--generator", choices=GENERATORS)
    p.add_argument("--out", help="report path (JSON)")
    p.add_argument("--emit-csv", metavar="DIR", help="write materialized matrices / kernels here")
    p.add_argument("--witness", metavar="FILE",
                   help="JSON list of [x, y] cells (or a BmoReport) to replay in the bmo suite")
    p.add_argument("--quiet", action="store_true")
    return p


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("depth", "dim", "trials", "tolerance", "seed", "backend", "generator", "out"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    return ExperimentConfig.from_mapping(data)


def _load_witness(path):
    if path is None:
        return None
    try:
        with open(path) as fh:
            w = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read witness {path}: {exc}") from None
    if isinstance(w, dict):
        w = w.get("witness_cells", [])
    return [tuple(c) for c in w]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        witness = _load_witness(args.witness)
    except (ConfigError, TypeError) as exc:
        print(f"lab: invalid config: {exc}", file=sys.stderr)
        return 2
    backends = BACKENDS if args.both_backends else None
    status, report = run_suite(args.suite, cfg, witness=witness, emit_csv=args.emit_csv,
                               backends=backends)
    if not args.quiet:
        for name, sec in report["sections"].items():
            for c in sec["checks"]:
                mark = "PASS" if c["passed"] else "FAIL"
                print(f"{mark}  {name}/{c['name']}  value={c['value']}  limit={c['limit']}")
        if report["failures"]:
            print(f"{len(report['failures'])} failing check(s)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
