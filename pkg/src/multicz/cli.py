"""Command line entry point: ``multicz <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import sys

import yaml

from .suite import DEFAULT_CONFIG, apply_overrides, run_suite

SUBCOMMANDS = {
    "orlicz": ["orlicz"],
    "maximal": ["weak_type"],
    "weights": ["weights"],
    "operator": ["operator"],
    "commutator": ["route"],
    "endpoint": ["maximal_endpoint", "commutator_endpoint"],
    "sharpness": ["maximal_sharpness", "commutator_sharpness"],
}


def load_config(path: str) -> dict:
    with open(path) as fh:
        config = yaml.safe_load(fh) or {}
    if not isinstance(config, dict):
        raise ValueError("config must be a mapping")
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multicz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(SUBCOMMANDS) + ["suite"]:
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, help="grid points (a power of two)")
        p.add_argument("--window", type=float, help="half width R of the window")
        p.add_argument("--family", choices=["dyadic", "shifted"])
        p.add_argument("--m", type=int, help="arity")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=None, help="output directory for CSV files")
        p.add_argument("--config", default=None, help="YAML config file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.config:
        config = load_config(args.config)
    elif args.command == "suite":
        config = DEFAULT_CONFIG
    else:
        ids = SUBCOMMANDS[args.command]
        config = {"experiments": [{"id": i} for i in ids],
                  "assertions": [a for a in DEFAULT_CONFIG["assertions"] if a["experiment"] in ids]}
    config = apply_overrides(config, n=args.n, window=args.window, family=args.family, m=args.m,
                             seed=args.seed)
    config["out"] = args.out or config.get("out") or "suite_out"
    reports, ok = run_suite(config)
    for r in reports:
        stats = ", ".join(f"{k}={v:.6g}" for k, v in sorted(r.summary.items()))
        print(f"{r.experiment}: {stats}")
    print("assertions:", "pass" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
