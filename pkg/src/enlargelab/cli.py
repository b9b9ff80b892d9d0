"""Command line: ``enlargelab run <experiment> [...]`` and ``enlargelab list``."""

import argparse
import sys

from .errors import ConfigError, UsageError
from .experiments import DESCRIPTIONS, EXPERIMENTS, load_config, run

EXIT_FAIL = 1
EXIT_USAGE = 2


def build_parser():
    parser = argparse.ArgumentParser(prog="enlargelab", description="Filtration-enlargement Monte Carlo checks")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("experiment")
    p_run.add_argument("--config", help="key = value config file")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--paths", type=int, dest="n_paths")
    p_run.add_argument("--mesh-exp", type=int, dest="mesh_exp")
    p_run.add_argument("--out")
    sub.add_parser("list", help="list experiments")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in EXPERIMENTS:
            print(f"{name:26s}{DESCRIPTIONS[name]}")
        return 0
    try:
        cfg = load_config(args.config, args.experiment, seed=args.seed, n_paths=args.n_paths,
                          mesh_exp=args.mesh_exp, out=args.out)
        result = run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for row in result.rows:
        print(f"{'PASS' if row['pass'] else 'FAIL'}  {row['test']:40s} {row['statistic']:.6g}")
    print(f"wrote {result.files['summary.csv']}")
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
