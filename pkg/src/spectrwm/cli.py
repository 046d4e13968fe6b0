"""Command line front end: spectrwm <experiment> [--key value ...].

Configuration precedence: command line flags, then --config file, then
the SPECTRWM_SEED environment variable (seed only), then the
experiment's documented defaults.  Exit codes: 0 success, 2 threshold
violation (a conclusive slope outside its acceptance band), 1 error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from spectrwm.estimators import EstimatorError
from spectrwm.experiments import EXPERIMENTS, ConfigError, resolve_config, run_experiment

_FLAGS = {
    "n": "grid size",
    "h": "jump size",
    "h_values": "comma separated jump sizes",
    "n_values": "comma separated grid sizes",
    "replicas": "independent replicas",
    "seed": "master seed",
    "horizon": "time horizon",
    "sigma": "noise amplitude",
    "lam": "damping (heat) or quadratic coupling (kpz)",
    "nu": "viscosity",
    "variant": "jump variant: academic, fast, detailed-balance",
    "nonlinearity": "stencil: central or one-sided",
    "ic": "initial condition name",
    "ic_amplitude": "initial condition amplitude",
    "cn_n": "grid size for the reference scheme",
    "pcn_steps": "chain length for the benchmark sampler",
    "pcn_rho": "autoregression factor for the benchmark sampler",
    "pcn_eps": "constant-mode mass for the benchmark sampler",
    "pcn_burn_fraction": "fraction of the chain discarded as burn-in",
    "samples": "holding time draws per cell",
    "snapshots": "trajectory snapshot count",
    "stop_level": "divergence threshold on |u| and |mean u|",
    "functions": "random test functions",
    "states": "random states per test function",
    "slope_min": "lower slope acceptance bound",
    "slope_max": "upper slope acceptance bound",
}


class _Parser(argparse.ArgumentParser):
    # the exit-code contract reserves 2 for threshold violations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="spectrwm",
        description="Spectral random walk experiments for periodic 1-d stochastic PDEs.",
    )
    names = sorted(EXPERIMENTS)
    parser.add_argument("experiment", nargs="?", choices=names,
                        help="experiment to run")
    parser.add_argument("--experiment", dest="experiment_flag", choices=names,
                        help="alternative to the positional name")
    parser.add_argument("--config", type=Path,
                        help="key = value file; a finished run's meta.txt works")
    parser.add_argument("--out", type=Path, default=Path("spectrwm-out"),
                        help="output directory (default: spectrwm-out)")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    for key, help_text in _FLAGS.items():
        flag = "--" + ("lambda" if key == "lam" else key.replace("_", "-"))
        parser.add_argument(flag, dest=key, default=None, metavar="V", help=help_text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse exits on usage errors and --help; surface the code instead
        return int(err.code or 0)
    name = args.experiment
    if args.experiment_flag is not None:
        if name is not None and name != args.experiment_flag:
            print(
                "spectrwm: error: positional experiment %r conflicts with --experiment %r"
                % (name, args.experiment_flag),
                file=sys.stderr,
            )
            return 1
        name = args.experiment_flag
    if name is None:
        print("spectrwm: error: no experiment named; choose from %s"
              % ", ".join(sorted(EXPERIMENTS)), file=sys.stderr)
        return 1
    overrides = {key: getattr(args, key) for key in _FLAGS if getattr(args, key) is not None}
    try:
        config = resolve_config(name, config_path=args.config, overrides=overrides)
        result = run_experiment(name, config, args.out, figures=not args.no_figures)
    except (ConfigError, EstimatorError, OSError, ValueError, RuntimeError) as err:
        print("spectrwm: error: %s" % err, file=sys.stderr)
        return 1
    print("%s: %s" % (result.name, result.summary))
    print("results in %s" % result.out_dir)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
