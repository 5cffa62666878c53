"""Command-line entry point: ``gipkernel <subcommand> [options]``.

Exit status is 0 on success, 1 on usage or input errors and 2 on numerical
failure (including a failed certification).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig, default_position_clip, run_data_efficiency, run_monte_carlo
from .data import (
    TrajectoryConfig,
    generate_trajectory,
    label_with_dynamics,
    perturb_kinematics,
    read_dataset,
    read_real_log,
    write_dataset,
)
from .dynamics import load_robot
from .errors import NumericalFailureError
from .estimators import ESTIMATOR_NAMES, estimator_from_dict, make_estimator
from .features import (
    PUBLISHED_MONOMIAL_COUNTS,
    Convention,
    certify_polynomial_dynamics,
    count_monomials,
    enumerate_monomials,
    random_states,
)
from .metrics import gmse, mse, nmse

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    return cfg


def _out_path(args, path) -> Path:
    p = Path(path)
    if args.out_dir and not p.is_absolute():
        p = Path(args.out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _read_data(path, mapping_path):
    if mapping_path:
        with open(mapping_path) as fh:
            mapping = json.load(fh)
        return read_real_log(path, mapping, dt=mapping.get("dt"))
    return read_dataset(path)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    model = load_robot(args.robot or cfg.robot)
    seed = cfg.seed
    true_model = perturb_kinematics(model, seed) if args.perturb else model
    traj = TrajectoryConfig(
        n_sinusoids=cfg.n_sinusoids, omega_range=cfg.omega_range, duration=args.samples * cfg.dt,
        dt=cfg.dt, seed=seed, position_clip=cfg.position_clip or default_position_clip(model),
    )
    t, states = generate_trajectory(model.n, traj)
    noise = cfg.noise_std if args.noise_std is None else args.noise_std
    ds = label_with_dynamics(true_model, states, noise, seed + 1, t)
    ds.meta["perturbed"] = bool(args.perturb)
    out = _out_path(args, args.out)
    write_dataset(ds, out)
    print(f"wrote {len(ds)} samples to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    model = load_robot(args.robot or cfg.robot)
    ds = _read_data(args.data, args.mapping)
    if args.epochs is not None:
        cfg.optimizer.epochs = args.epochs
    optimizer = None if args.no_optimize else cfg.optimizer
    est = make_estimator(args.estimator, model, optimizer=optimizer, seed=cfg.seed, noise_var=cfg.init_noise_var)
    est.fit(ds.states, ds.torques)
    out = _out_path(args, args.out)
    with open(out, "w") as fh:
        json.dump(est.to_dict(), fh)
    print(f"trained {est.name} on {len(ds)} samples, model written to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ds = _read_data(args.data, args.mapping)
    report = {}
    for path in args.model:
        with open(path) as fh:
            est = estimator_from_dict(json.load(fh))
        pred = est.predict(ds.states)
        report[est.name if est.name not in report else str(path)] = {
            "nmse": nmse(ds.torques, pred).tolist(),
            "mse": mse(ds.torques, pred).tolist(),
            "gmse": gmse(ds.torques, pred),
        }
    for name, r in report.items():
        cells = " ".join(f"{v:.3e}" for v in r["nmse"])
        print(f"{name}: nMSE per joint {cells}  GMSE {r['gmse']:.3e}")
    if args.out:
        with open(_out_path(args, args.out), "w") as fh:
            json.dump(report, fh, indent=2)
    return EXIT_OK


def _print_summary(summary):
    for name, stats in summary["estimators"].items():
        if "nmse" in stats:
            med = " ".join(f"{s['median']:.3e}" if s["median"] is not None else "nan" for s in stats["nmse"].values())
            print(f"{name}: median nMSE per joint {med}")
        else:
            med = " ".join(
                f"{size}:{s['median']:.3e}" if s["median"] is not None else f"{size}:nan"
                for size, s in stats.items()
            )
            print(f"{name}: median GMSE {med}")


def cmd_monte_carlo(args) -> int:
    cfg = _load_config(args)
    if args.trials is not None:
        cfg.trials = args.trials
    result = run_monte_carlo(cfg)
    _print_summary(result.summary)
    return EXIT_OK


def cmd_data_efficiency(args) -> int:
    cfg = _load_config(args)
    if args.trials is not None:
        cfg.trials = args.trials
    result = run_data_efficiency(cfg, args.grid)
    _print_summary(result.summary)
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _load_config(args)
    model = load_robot(args.robot or cfg.robot)
    for conv in Convention:
        print(f"monomial count ({conv.value}): {count_monomials(model.joint_types, conv)}")
    letters = "".join(t.letter for t in model.joint_types)
    if letters in PUBLISHED_MONOMIAL_COUNTS:
        print(f"published count for {letters}: {PUBLISHED_MONOMIAL_COUNTS[letters]}")
    monomials = enumerate_monomials(model.joint_types, reduced=True)
    samples = random_states(model.joint_types, int(np.ceil(args.oversampling * len(monomials))), cfg.seed)
    reports = certify_polynomial_dynamics(model, samples, None, monomials, oversampling=args.oversampling)
    ok = True
    for r in reports:
        print(f"joint {r.joint_index + 1}: relative residual {r.residual:.3e} "
              f"(rank {r.rank}/{r.n_monomials}) {'PASS' if r.passed else 'FAIL'}")
        ok &= r.passed
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment configuration JSON file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out-dir", help="directory for all relative output paths")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = _Parser(prog="gipkernel", description="GP inverse-dynamics learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="generate a labelled dataset")
    p.add_argument("--robot", help="robot JSON file or shipped model name")
    p.add_argument("--out", required=True, help="output CSV dataset")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--noise-std", type=float)
    p.add_argument("--perturb", action="store_true", help="label with a perturbed copy of the robot")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="fit an estimator and save it as JSON")
    p.add_argument("--robot", help="nominal robot JSON file or shipped model name")
    p.add_argument("--data", required=True, help="dataset CSV or robot log")
    p.add_argument("--mapping", help="column mapping JSON for robot logs")
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES, default="GIP", type=str.upper)
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--epochs", type=int)
    p.add_argument("--no-optimize", action="store_true", help="keep initial hyperparameters")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score saved models on a dataset")
    p.add_argument("--model", required=True, action="append", help="model JSON (repeatable)")
    p.add_argument("--data", required=True, help="dataset CSV or robot log")
    p.add_argument("--mapping", help="column mapping JSON for robot logs")
    p.add_argument("--out", help="metrics JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("monte-carlo", parents=[common], help="Monte-Carlo estimator comparison")
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_monte_carlo)

    p = sub.add_parser("data-efficiency", parents=[common], help="GMSE versus training size")
    p.add_argument("--trials", type=int)
    p.add_argument("--grid", type=int, nargs="+")
    p.set_defaults(func=cmd_data_efficiency)

    p = sub.add_parser("certify-prop1", parents=[common],
                       help="check that the torques are polynomials in the augmented input")
    p.add_argument("--robot", help="robot JSON file or shipped model name")
    p.add_argument("--oversampling", type=float, default=2.0)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
