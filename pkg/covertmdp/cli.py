#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Command line interface: ``covertmdp <subcommand> [options]``"""

import argparse
import logging
import os
import sys

from .harness import OUTPUT_DIR_ENV, ExperimentConfig, run
from .util.exceptions import GuardError, ParameterError

__all__ = ["main", "build_parser"]

logger = logging.getLogger("covertmdp")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_GUARD = 3

# Subcommand to ExperimentConfig.mode
_MODES = {
    "eval": "eval",
    "covert-lp": "covert-lp",
    "detect": "detect",
    "exponents": "exponents",
    "adversary": "adversary",
    "sweep": "exponent-sweep",
}


def _int_list(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers: {}".format(text))


def _float_list(text):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated reals: {}".format(text))


def _add_model(parser, adversary=False):
    parser.add_argument("--mdp", required=True, help="MDP JSON file")
    parser.add_argument("--pi-star", required=True, help="Controller policy JSON file")
    if adversary:
        parser.add_argument("--pi-adv", required=True, help="Adversarial policy JSON file")


def _add_detector(parser):
    parser.add_argument(
        "--detector", choices=("np", "hoeffding", "stein"), default="hoeffding"
    )
    parser.add_argument("--eta", type=float, default=0.1, help="Detector threshold")
    parser.add_argument(
        "--alpha-max", type=float, default=0.1, help="Type I budget of the stein detector"
    )


def _add_lengths(parser):
    parser.add_argument(
        "--n",
        dest="n_values",
        type=_int_list,
        default=(8, 10, 12, 14, 16, 18),
        help="Comma separated sequence lengths (default: 8,10,...,18)",
    )
    parser.add_argument("--replications", type=int, default=1000)
    parser.add_argument(
        "--exact", action="store_true", help="Enumerate all sequences instead of simulating"
    )


def build_parser():
    """Argument parser of the ``covertmdp`` command."""
    parser = argparse.ArgumentParser(
        prog="covertmdp",
        description="Covert adversarial actuation in finite recurrent MDPs.",
    )
    parser.add_argument("--seed", type=int, default=None, help="Master seed (default: 0)")
    parser.add_argument(
        "--out",
        default=None,
        help="Output CSV path (default: <mode>.csv in ${})".format(OUTPUT_DIR_ENV),
    )
    parser.add_argument(
        "--threads", type=int, default=None, help="Worker threads; never changes results"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)

    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("eval", help="Average rewards, regret and stationary distributions")
    _add_model(cmd, adversary=True)

    cmd = sub.add_parser("covert-lp", help="Optimal perfectly covert policy")
    _add_model(cmd)

    cmd = sub.add_parser("detect", help="Error rates of a detector")
    _add_model(cmd, adversary=True)
    _add_detector(cmd)
    _add_lengths(cmd)

    cmd = sub.add_parser("exponents", help="Theoretical error exponents")
    _add_model(cmd, adversary=True)
    _add_detector(cmd)

    cmd = sub.add_parser("adversary", help="Regret maximization under covertness")
    _add_model(cmd)
    cmd.add_argument("--eta", type=float, required=True, help="Controller's type I exponent")
    group = cmd.add_mutually_exclusive_group(required=True)
    group.add_argument("--eta-beta", type=float, help="Type II exponent budget")
    group.add_argument(
        "--frontier", type=_float_list, help="Comma separated ascending budgets"
    )

    cmd = sub.add_parser("sweep", help="Measured against theoretical error exponents")
    _add_model(cmd, adversary=True)
    _add_detector(cmd)
    _add_lengths(cmd)

    cmd = sub.add_parser("run", help="Run a stored experiment configuration")
    cmd.add_argument("--config", required=True, help="ExperimentConfig JSON file")

    return parser


def _default_output(mode):
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), "{}.csv".format(mode))


def _config_from_args(args):
    if args.command == "run":
        config = ExperimentConfig.from_json(
            args.config, master_seed=args.seed, output_path=args.out
        )
        return config

    mode = _MODES[args.command]
    fields = dict(
        mdp_path=args.mdp,
        pi_star_path=args.pi_star,
        pi_adv_path=getattr(args, "pi_adv", None),
        mode=mode,
        master_seed=0 if args.seed is None else args.seed,
        output_path=args.out or _default_output(mode),
    )
    for name in (
        "detector",
        "eta",
        "alpha_max",
        "eta_beta",
        "frontier",
        "n_values",
        "replications",
        "exact",
    ):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    return ExperimentConfig(**fields)


def main(argv=None):
    """Entry point of the ``covertmdp`` command.

    Returns
    -------
    status : int
        0 on success, 2 on invalid input, 3 when a problem is too large
        to enumerate exactly
    """
    args = build_parser().parse_args(argv)

    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)

    try:
        config = _config_from_args(args)
        logger.info("Running mode '%s' with seed %d", config.mode, config.master_seed)
        csv_path, sidecar_path = run(config, n_jobs=args.threads)
    except ParameterError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_INVALID
    except GuardError as exc:
        logger.error("guard violation: %s", exc)
        return EXIT_GUARD

    logger.info("Wrote %s and %s", csv_path, sidecar_path)
    print(csv_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
