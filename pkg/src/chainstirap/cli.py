"""Command-line entry point: one subcommand per experiment.

    chainstirap fidelity-sweep --mu0 1.0 --j0 0.1 --t-max-grid 5,10,15,20
    chainstirap run --config sweep.yaml --jobs 4 --out sweep.csv

Settings come from an optional flat YAML/JSON config file, overridden by
command-line flags.  Exit status is 0 on success, 2 for invalid
configuration and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
from pathlib import Path
from typing import Sequence

import yaml

from . import __version__
from .errors import ChainStirapError, ConfigError, NumericalError
from .experiments import EXPERIMENTS, ExperimentConfig, records_to_csv, records_to_json, run_experiment

log = logging.getLogger("chainstirap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

HELP = {
    "spectrum": "Bound state, energy gap and wavevector roots versus dense diagonalization, "
                "plus the four-level eigenvalue flow (Fig. 2).",
    "eigen-flow": "Four lowest instantaneous eigenvalues of the full Hamiltonian over the pulse (Fig. 2(b)).",
    "operator-fidelity": "Operator fidelity P_AB versus J0/mu0 and distance, and the largest J0 "
                         "keeping it above 99.5%% (Fig. 3).",
    "adiabaticity": "Adiabaticity profile, its maximum versus distance and versus t_max (Fig. 4).",
    "evolve": "Populations of A, B, the defect mode and the medium over one protocol (Fig. 5(b)-(c), (e)-(f)).",
    "fidelity-sweep": "Final fidelity versus t_max, full model and three-level model (Fig. 5(a), (d)).",
    "min-time-vs-distance": "Minimal transfer time versus A-B distance with a log-linear fit (Fig. 6).",
    "robustness": "Fidelity under coupling disorder (seeded ensembles) and dephasing (Fig. 7).",
}


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = argparse.SUPPRESS
    p.add_argument("--config", metavar="FILE", help="flat YAML or JSON file with configuration keys")
    p.add_argument("--n-sites", default=d, help="medium length N (odd, default 39)")
    p.add_argument("--mu0", default=d, help="defect energy(ies) in units of J, comma separated")
    p.add_argument("--j0", default=d, help="peak coupling J0 in units of J (default 0.1*mu0)")
    p.add_argument("--j0-ratio", default=d, help="J0/mu0 value(s), used when --j0 is not given")
    dist = p.add_mutually_exclusive_group()
    dist.add_argument("--distance", "-d", default=d, help="A-B distance(s) d, odd and >= 5")
    dist.add_argument("--l", dest="l", default=d, help="attachment offset(s) l = (d - 3)/2")
    p.add_argument("--t-max", default=d, help="protocol duration in units of pi/J0 (default 19)")
    p.add_argument("--t-max-grid", default=d, help="comma-separated t_max values in units of pi/J0")
    p.add_argument("--gamma", default=d, help="dephasing rate(s) in units of J0")
    p.add_argument("--delta", default=d, help="coupling disorder strength(s)")
    p.add_argument("--realizations", default=d, help="disorder ensemble size (default 100)")
    p.add_argument("--seed", default=d, help="base seed (default 0)")
    p.add_argument("--method", default=d, choices=["full", "effective", "both", "master"],
                   help="dynamics model")
    p.add_argument("--n-samples", default=d, help="time samples per trajectory (default 501)")
    p.add_argument("--jobs", "-j", default=d, help="concurrent sweep points (default 1)")
    p.add_argument("--format", default=d, choices=["csv", "json"], help="output format")
    p.add_argument("--out", "-o", default=d, metavar="PATH", help="output file (default stdout)")
    p.add_argument("--no-timestamp", action="store_true", default=d,
                   help="omit the generated-at header and wall-time column")
    p.add_argument("--verbose", "-v", action="store_true", default=False, help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainstirap",
        description="Adiabatic state transfer through a defected tight-binding chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True, metavar="EXPERIMENT")
    for name, text in HELP.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    run = sub.add_parser("run", parents=[common], help="run the experiment named in --experiment or the config file",
                         description="Run the experiment named by --experiment or by the config file.")
    run.add_argument("--experiment", default=argparse.SUPPRESS, choices=list(EXPERIMENTS))
    return parser


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a flat mapping")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config key {key!r} is nested; only flat key/value pairs are accepted")
    return data


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = vars(args).copy()
    command = values.pop("command")
    path = values.pop("config", None)
    values.pop("verbose", None)
    merged = load_config_file(path) if path else {}
    merged = {str(k).replace("-", "_"): v for k, v in merged.items()}
    # a distance given on the command line replaces an l from the file and vice versa
    if "distance" in values or "l" in values:
        for key in ("distance", "d", "l"):
            merged.pop(key, None)
    if values.pop("no_timestamp", False):
        merged.pop("no_timestamp", None)
        merged["timestamp"] = False
    merged.update(values)
    if command != "run":
        if merged.get("experiment", command) != command:
            log.info("config experiment %r overridden by subcommand %r", merged["experiment"], command)
        merged["experiment"] = command
    elif "experiment" not in merged:
        raise ConfigError("run needs --experiment or an 'experiment' key in the config file")
    return ExperimentConfig.from_mapping(merged)


def render(records, config: ExperimentConfig) -> str:
    stamp = None
    if config.timestamp:
        now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        stamp = f"{now} by chainstirap {__version__} ({config.experiment})"
    if config.format == "json":
        return records_to_json(records, include_wall_time=config.timestamp) + "\n"
    return records_to_csv(records, stamp)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        log.info("running %s", config.experiment)
        records = run_experiment(config)
        text = render(records, config)
        if config.out:
            Path(config.out).write_text(text)
        else:
            sys.stdout.write(text)
    except NumericalError as exc:
        print(f"chainstirap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ChainStirapError, ValueError) as exc:
        print(f"chainstirap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
