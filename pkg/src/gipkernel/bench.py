"""Monte-Carlo estimator comparison and data-efficiency curves.

Each trial draws a kinematic perturbation of the nominal robot (optional),
a training and a test trajectory, and label noise, all from the seed tuple
``(config.seed, trial)``.  Data are generated with the perturbed robot;
model-based estimators only ever see the nominal one.  Test labels are
noiseless by default so that the metrics measure the error against the
true dynamics.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import TrajectoryConfig, generate_trajectory, label_with_dynamics, perturb_kinematics
from .dynamics import JointType, RobotModel, load_robot
from .errors import InvalidInputError, NumericalFailureError
from .estimators import ESTIMATOR_NAMES, make_estimator
from .gp import OptimizerConfig
from .metrics import boxplot_stats, mse, nmse

__all__ = [
    "ExperimentConfig",
    "TrialData",
    "BenchResult",
    "default_position_clip",
    "make_trial_data",
    "run_monte_carlo",
    "run_data_efficiency",
]

log = logging.getLogger(__name__)

RECORD_FIELDS = ["trial", "estimator", "joint", "train_size", "nmse", "mse", "gmse",
                 "status", "seed", "trial_seeds", "seconds"]


def default_position_clip(model: RobotModel) -> list:
    """[-2.5, 2.5] rad for revolute joints and [-0.2, 0.2] m for prismatic ones."""
    return [[-2.5, 2.5] if t is JointType.REVOLUTE else [-0.2, 0.2] for t in model.joint_types]


@dataclass
class ExperimentConfig:
    """Everything that defines a benchmark run; see ``docs/experiment_config.md``."""

    robot: str = "scara"
    estimators: list = field(default_factory=lambda: ["FE", "PP", "SP", "RBF", "GIP"])
    trials: int = 20
    train_size: int = 2000
    test_size: int = 2000
    noise_std: float = 0.01
    test_noise: bool = False
    perturb_kinematics: bool = True
    seed: int = 0
    dt: float = 0.05
    n_sinusoids: int = 200
    omega_range: tuple = (-2.0, 2.0)
    position_clip: list | None = None
    grid: list = field(default_factory=lambda: [250, 500, 1000, 2000, 4000])
    init_noise_var: float = 1e-3
    optimizer: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig(learning_rate=0.1, epochs=50, batch_size=500)
    )
    out_dir: str | None = None

    def __post_init__(self):
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerConfig(**self.optimizer)
        self.estimators = [e.upper() for e in self.estimators]
        if not self.estimators:
            raise InvalidInputError("estimator list must not be empty")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise InvalidInputError(f"unknown estimators {sorted(unknown)}")
        if self.train_size < 1 or self.test_size < 1 or self.trials < 1:
            raise InvalidInputError("train_size, test_size and trials must be >= 1")
        if self.noise_std < 0:
            raise InvalidInputError("noise_std must be non-negative")
        self.omega_range = tuple(self.omega_range)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["omega_range"] = list(self.omega_range)
        return doc

    def load_model(self) -> RobotModel:
        return load_robot(self.robot)


@dataclass
class TrialData:
    nominal: RobotModel
    true_model: RobotModel
    train_states: object
    train_torques: np.ndarray
    test_states: object
    test_torques: np.ndarray
    seeds: tuple


def _trial_seeds(seed: int, trial: int) -> tuple:
    # independent streams for perturbation, train/test trajectories and noise
    return tuple(int(s) for s in np.random.SeedSequence([seed, trial]).generate_state(5))


def make_trial_data(config: ExperimentConfig, trial: int, nominal: RobotModel | None = None,
                    train_size: int | None = None) -> TrialData:
    nominal = nominal or config.load_model()
    seeds = _trial_seeds(config.seed, trial)
    true_model = perturb_kinematics(nominal, seeds[0]) if config.perturb_kinematics else nominal
    clip = config.position_clip or default_position_clip(nominal)

    def trajectory(size, seed):
        cfg = TrajectoryConfig(
            n_sinusoids=config.n_sinusoids, omega_range=config.omega_range,
            duration=size * config.dt, dt=config.dt, seed=seed, position_clip=clip,
        )
        return generate_trajectory(nominal.n, cfg)

    train_size = train_size or config.train_size
    t_tr, s_tr = trajectory(train_size, seeds[1])
    t_te, s_te = trajectory(config.test_size, seeds[2])
    train = label_with_dynamics(true_model, s_tr, config.noise_std, seeds[3], t_tr)
    test = label_with_dynamics(true_model, s_te, config.noise_std if config.test_noise else 0.0, seeds[4], t_te)
    return TrialData(nominal, true_model, train.states, train.torques, test.states, test.torques, seeds)


def _evaluate(config, name, data: TrialData, train_idx=None, trial=0):
    """Fit one estimator and score it; failures become records, not exceptions."""
    states, torques = data.train_states, data.train_torques
    if train_idx is not None:
        states, torques = states[train_idx], torques[train_idx]
    n = data.nominal.n
    base = {"trial": trial, "estimator": name, "train_size": len(torques),
            "seed": config.seed, "trial_seeds": " ".join(map(str, data.seeds))}
    start = time.perf_counter()
    try:
        est = make_estimator(name, data.nominal, optimizer=config.optimizer,
                             seed=data.seeds[1], noise_var=config.init_noise_var)
        est.fit(states, torques)
        pred = est.predict(data.test_states)
        per_mse = mse(data.test_torques, pred)
        per_nmse = nmse(data.test_torques, pred)
        status = "ok" if np.all(np.isfinite(pred)) else "non_finite"
    except (NumericalFailureError, InvalidInputError, np.linalg.LinAlgError) as exc:
        log.warning("%s failed on trial %d: %s", name, trial, exc)
        per_mse = per_nmse = np.full(n, np.nan)
        status = f"failed: {type(exc).__name__}"
    seconds = time.perf_counter() - start
    total = float(np.sum(per_mse))
    return [
        {**base, "joint": j + 1, "nmse": float(per_nmse[j]), "mse": float(per_mse[j]),
         "gmse": total, "status": status, "seconds": round(seconds, 3)}
        for j in range(n)
    ]


@dataclass
class BenchResult:
    records: list
    summary: dict

    def values(self, estimator: str, key: str = "nmse", joint: int | None = None, train_size=None):
        """Collect ``key`` over records matching the filters."""
        return np.array([
            r[key] for r in self.records
            if r["estimator"] == estimator
            and (joint is None or r["joint"] == joint)
            and (train_size is None or r["train_size"] == train_size)
        ], dtype=float)

    def write(self, out_dir, stem: str):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
            writer.writeheader()
            for r in self.records:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        with open(out / f"{stem}_summary.json", "w") as fh:
            json.dump(self.summary, fh, indent=2)


def run_monte_carlo(config: ExperimentConfig) -> BenchResult:
    """Train and score every estimator on ``config.trials`` independent trials.

    Returns one record per (trial, estimator, joint) and a summary with
    boxplot statistics of nMSE per estimator and joint, and of GMSE per
    estimator.  Results are written to ``config.out_dir`` when it is set.
    """
    nominal = config.load_model()
    records = []
    for trial in range(config.trials):
        data = make_trial_data(config, trial, nominal)
        for name in config.estimators:
            records.extend(_evaluate(config, name, data, trial=trial))
            log.info("trial %d %s done", trial, name)
    summary = {"config": config.to_dict(), "estimators": {}}
    for name in config.estimators:
        rows = [r for r in records if r["estimator"] == name]
        joints = sorted({r["joint"] for r in rows})
        gm = [r["gmse"] for r in rows if r["joint"] == 1]
        summary["estimators"][name] = {
            "nmse": {str(j): boxplot_stats([r["nmse"] for r in rows if r["joint"] == j]) for j in joints},
            "gmse": boxplot_stats(gm),
            "failures": sum(1 for r in rows if r["joint"] == 1 and r["status"] != "ok"),
        }
    result = BenchResult(records, summary)
    if config.out_dir:
        result.write(config.out_dir, "monte_carlo")
    return result


def run_data_efficiency(config: ExperimentConfig, grid=None) -> BenchResult:
    """GMSE as a function of training-set size.

    For each of ``config.trials`` repeats one training trajectory with
    ``max(grid)`` samples is generated and shuffled; every grid point trains
    on a prefix of that shuffled set, so the subsets are nested.
    """
    grid = sorted(int(g) for g in (grid or config.grid))
    if not grid or grid[0] < 1:
        raise InvalidInputError("grid must contain positive sizes")
    nominal = config.load_model()
    records = []
    for trial in range(config.trials):
        data = make_trial_data(config, trial, nominal, train_size=grid[-1])
        order = np.random.default_rng(data.seeds[3] + 1).permutation(grid[-1])
        for size in grid:
            for name in config.estimators:
                records.extend(_evaluate(config, name, data, train_idx=order[:size], trial=trial))
    summary = {"config": config.to_dict(), "grid": grid, "estimators": {}}
    for name in config.estimators:
        summary["estimators"][name] = {
            str(size): boxplot_stats([
                r["gmse"] for r in records
                if r["estimator"] == name and r["train_size"] == size and r["joint"] == 1
            ])
            for size in grid
        }
    result = BenchResult(records, summary)
    if config.out_dir:
        result.write(config.out_dir, "data_efficiency")
    return result
