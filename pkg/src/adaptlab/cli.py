"""Command-line front end.

    adaptlab run <config.toml>     simulate one experiment, write CSV + report
    adaptlab scenario <name>       run a preset bundle and its checks
    adaptlab validate <config.toml>  check a config without running it
    adaptlab list-scenarios        show the shipped presets

Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 diverged.
The default output directory is --out, else $ADAPTLAB_OUT, else ./runs.
"""

import argparse
import os
import sys

from .config import load_experiment
from .exceptions import ConfigError
from .scenarios import PRESET_NAMES, load_preset, run_scenario
from .simulate import run_experiment

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _add_common_flags(sub):
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--dt", type=float, default=None, help="override integrator step")
    sub.add_argument("--seed", type=int, default=None, help="override seed")
    sub.add_argument("--decimate", type=int, default=None,
                     help="log every K-th step")


def _overrides(args):
    out = {}
    if args.dt is not None:
        out["experiment.dt"] = args.dt
    if args.seed is not None:
        out["experiment.seed"] = args.seed
    if args.decimate is not None:
        out["experiment.decimate"] = args.decimate
    return out


def _out_dir(args):
    return args.out or os.environ.get("ADAPTLAB_OUT", "runs")


def _cmd_run(args):
    try:
        cfg = load_experiment(args.config, overrides=_overrides(args))
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    traj, report = run_experiment(cfg)
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{cfg.name}.csv")
    traj.to_csv(csv_path)
    with open(os.path.join(out_dir, f"{cfg.name}-report.txt"), "w") as fh:
        fh.write(report.to_text())
    print(report.to_text(), end="")
    print(f"wrote {csv_path}")
    if traj.status == "diverged":
        print("run diverged; trajectory is partial", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_PASS


def _cmd_scenario(args):
    if args.name not in PRESET_NAMES:
        print(f"unknown scenario {args.name!r}; available presets:", file=sys.stderr)
        for name in PRESET_NAMES:
            print(f"  {name}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_scenario(args.name, out_dir=_out_dir(args),
                              overrides=_overrides(args))
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_CONFIG
    print(result.summary_text(), end="")
    return EXIT_PASS if result.passed else EXIT_ASSERTION


def _cmd_validate(args):
    try:
        cfg = load_experiment(args.config)
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.config}: valid ({cfg.mode} run '{cfg.name}', "
          f"horizon {cfg.horizon:g})")
    return EXIT_PASS


def _cmd_list_scenarios(args):
    for name in PRESET_NAMES:
        desc = load_preset(name).get("scenario", {}).get("description", "")
        print(f"{name}: {desc}")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adaptlab",
        description="Adaptive estimation laws and online optimizers, side by side.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one experiment config")
    p_run.add_argument("config")
    _add_common_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_sc = sub.add_parser("scenario", help="run a preset scenario")
    p_sc.add_argument("name")
    _add_common_flags(p_sc)
    p_sc.set_defaults(fn=_cmd_scenario)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    p_ls = sub.add_parser("list-scenarios", help="list shipped presets")
    p_ls.set_defaults(fn=_cmd_list_scenarios)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
