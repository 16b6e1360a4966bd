"""Command-line entry point: ``augshuffle <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError
from .config import build_config, read_config_file
from .experiments import run_sweep, write_csv

SUBCOMMANDS = {
    "simulate": "Monte Carlo MSE of each protocol",
    "accountant": "instantiated privacy parameters and analytic loss",
    "attack": "poisoning gain under the maximal gain attack",
    "collude": "actual epsilon as the colluding fraction grows",
    "cost": "communication cost in bits",
    "verify-dp": "exact (epsilon/2, delta_hat) certification of the proposed protocols",
}

# flag name -> (config key, help)
_FLAGS = {
    "--protocol": ("protocols", "comma-separated protocol kinds"),
    "--eps": ("epsilons", "comma-separated target epsilons"),
    "--delta": ("delta", "target delta"),
    "--beta": ("beta", "sampling probability of the proposed protocols"),
    "--n": ("n", "synthetic dataset size"),
    "--d": ("d", "domain size"),
    "--runs": ("runs", "Monte Carlo runs per cell"),
    "--seed": ("seed", "root seed"),
    "--zipf": ("zipf", "Zipf exponent of the synthetic dataset"),
    "--dataset": ("dataset", "dataset file (integers or csv categories)"),
    "--format": ("dataset_format", "dataset format: auto, int or csv"),
    "--defense": ("defense", "threshold, normalize or threshold+normalize"),
    "--alpha-sig": ("alpha_sig", "significance level of the threshold defense"),
    "--alpha-bits": ("alpha_bits", "ciphertext size in bits"),
    "--local-epsilon": ("local_epsilon", "override the baselines' local epsilon"),
    "--wang-a": ("wang_a", "uniform dummy fraction for single-message baselines"),
    "--fraction": ("attack_fraction", "fake-user fraction n'/(n+n')"),
    "--targets": ("n_targets", "number of target items"),
    "--omega-ratios": ("omega_ratios", "comma-separated colluding fractions"),
    "--jobs": ("jobs", "worker processes"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="augshuffle", description="Augmented-shuffle frequency estimation experiments.")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in SUBCOMMANDS.items():
        sub = subs.add_parser(name, help=text, description=text)
        sub.add_argument("--config", help="key = value config file; flags override it")
        sub.add_argument("--output", "-o", help="CSV output path (default stdout)")
        sub.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")
        for flag, (key, help_text) in _FLAGS.items():
            sub.add_argument(flag, dest=key, default=None, help=help_text)
    return parser


def _summary(command, rows):
    lines = []
    for row in rows:
        if row.metric.startswith("skipped"):
            lines.append(f"{row.protocol} eps={row.epsilon:g}: {row.metric}")
        elif command == "verify-dp" and row.metric == "certified_delta":
            lines.append(f"{row.protocol} eps={row.epsilon:g} beta={row.beta:.6g}: certified (eps, delta) = "
                         f"({row.epsilon:g}, {row.value:.3e}), target delta {row.delta:g}")
        elif command == "simulate" and row.metric == "mse":
            lines.append(f"{row.protocol} eps={row.epsilon:g}: mse {row.value:.4e} +- {row.stderr:.1e}")
        elif command == "attack" and row.metric == "gain":
            lines.append(f"{row.protocol} eps={row.epsilon:g}: gain {row.value:.4f} +- {row.stderr:.1e}")
    if not lines:
        lines.append(f"{command}: {len(rows)} row(s)")
    return "\n".join(lines)


def main(argv=None):
    """Run the CLI; returns 0 on success, 2 on config errors, 1 otherwise."""
    try:
        args = build_parser().parse_args(argv)
        options = vars(args)
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {key: options[key] for key, _ in _FLAGS.values()}
        config = build_config(file_values, overrides)
    except ConfigError as err:
        print(f"augshuffle: config error: {err}", file=sys.stderr)
        return 2
    try:
        rows = run_sweep(args.command, config)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                write_csv(rows, fh)
        else:
            write_csv(rows, sys.stdout)
        if not args.quiet:
            print(_summary(args.command, rows), file=sys.stderr)
    except Exception as err:  # noqa: BLE001 - every runtime failure maps to exit 1
        print(f"augshuffle: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
