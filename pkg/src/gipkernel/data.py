"""Trajectories, labelled datasets and the CSV dataset format.

File format
-----------
Line 1 is ``#`` followed by a JSON object with the metadata (``n`` is
required).  Line 2 holds the column names ``t, q1..qn, dq1..dqn,
ddq1..ddqn, tau1..taun``.  Every following line is one sample written with
17 significant digits, so a write/read round trip is lossless.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import JointState, RobotModel, inverse_dynamics
from .errors import InvalidInputError, ParseError

__all__ = [
    "Dataset",
    "TrajectoryConfig",
    "SumOfSinusoids",
    "generate_trajectory",
    "label_with_dynamics",
    "perturb_kinematics",
    "differentiate_causal",
    "read_dataset",
    "write_dataset",
    "read_real_log",
    "downsample",
    "dataset_columns",
]


@dataclass
class Dataset:
    states: JointState
    torques: np.ndarray
    timestamps: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.torques = np.asarray(self.torques, dtype=float)
        if self.states.q.ndim != 2:
            raise InvalidInputError("dataset states must be a batch of shape (N, n)")
        if self.torques.shape != self.states.q.shape:
            raise InvalidInputError(
                f"torques shape {self.torques.shape} does not match states {self.states.q.shape}"
            )
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=float)
            if self.timestamps.shape != (len(self),):
                raise InvalidInputError("one timestamp per sample is required")
            if len(self) > 1 and np.any(np.diff(self.timestamps) <= 0):
                raise InvalidInputError("timestamps must be strictly increasing")

    def __len__(self):
        return self.states.q.shape[0]

    @property
    def n(self) -> int:
        return self.states.n

    @property
    def inputs(self) -> np.ndarray:
        """``(N, 3n)`` table ``[q, dq, ddq]``."""
        return self.states.as_array()

    def subset(self, idx) -> "Dataset":
        return Dataset(
            self.states[idx],
            self.torques[idx],
            None if self.timestamps is None else self.timestamps[idx],
            dict(self.meta),
        )


@dataclass
class TrajectoryConfig:
    """Random sum-of-sinusoids excitation.

    ``position_clip`` is an ``(n, 2)`` array of ``(low, high)`` limits; the
    trajectory is centered in each interval and scaled so its sampled peak
    excursion reaches but never crosses the limits.  ``None`` means
    ``[-1, 1]`` for every joint.
    """

    n_sinusoids: int = 200
    omega_range: tuple = (-2.0, 2.0)
    amplitude_range: tuple = (-1.0, 1.0)
    duration: float = 100.0
    dt: float = 0.05
    seed: int = 0
    position_clip: object = None

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if not np.all(np.isfinite(self.omega_range)) or len(self.omega_range) != 2:
            raise InvalidInputError("omega_range must be two finite numbers")
        if self.n_sinusoids < 1 or not self.duration > 0:
            raise InvalidInputError("need at least one sinusoid and a positive duration")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class SumOfSinusoids:
    """``q_i(t) = offset_i + scale_i * sum_k A_ik sin(w_ik t + phi_ik)``.

    Velocities and accelerations are the exact derivatives of the same sum.
    """

    amplitudes: np.ndarray
    omegas: np.ndarray
    phases: np.ndarray
    offset: np.ndarray | None = None
    scale: np.ndarray | None = None

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        self.omegas = np.atleast_2d(np.asarray(self.omegas, dtype=float))
        self.phases = np.atleast_2d(np.asarray(self.phases, dtype=float))
        n = self.amplitudes.shape[0]
        self.offset = np.zeros(n) if self.offset is None else np.asarray(self.offset, dtype=float)
        self.scale = np.ones(n) if self.scale is None else np.asarray(self.scale, dtype=float)

    def _raw(self, t):
        t = np.asarray(t, dtype=float)[:, None, None]
        arg = self.omegas * t + self.phases
        s, c = np.sin(arg), np.cos(arg)
        q = np.sum(self.amplitudes * s, axis=-1)
        dq = np.sum(self.amplitudes * self.omegas * c, axis=-1)
        ddq = -np.sum(self.amplitudes * self.omegas ** 2 * s, axis=-1)
        return q, dq, ddq

    def __call__(self, t) -> JointState:
        q, dq, ddq = self._raw(t)
        return JointState(self.offset + self.scale * q, self.scale * dq, self.scale * ddq)


def generate_trajectory(n: int, config: TrajectoryConfig):
    """Random excitation trajectory for ``n`` joints.

    Returns ``(timestamps, states)`` with ``states`` a batched
    :class:`JointState` of shape ``(N, n)``.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = np.random.default_rng(config.seed)
    K = config.n_sinusoids
    amps = rng.uniform(*config.amplitude_range, size=(n, K))
    omegas = rng.uniform(*config.omega_range, size=(n, K))
    phases = rng.uniform(0.0, 2 * np.pi, size=(n, K))
    if config.position_clip is None:
        clip = np.tile([-1.0, 1.0], (n, 1))
    else:
        clip = np.asarray(config.position_clip, dtype=float).reshape(n, 2)
    t = np.arange(config.n_samples) * config.dt
    traj = SumOfSinusoids(amps, omegas, phases)
    raw_q, _, _ = traj._raw(t)
    peak = np.max(np.abs(raw_q), axis=0)
    peak[peak == 0] = 1.0
    traj.offset = clip.mean(axis=1)
    traj.scale = 0.5 * (clip[:, 1] - clip[:, 0]) / peak
    return t, traj(t)


def label_with_dynamics(
    model: RobotModel,
    states: JointState,
    noise_std: float = 0.0,
    seed=None,
    timestamps=None,
    with_actuator: bool = False,
) -> Dataset:
    """Torques from rigid-body dynamics plus i.i.d. Gaussian noise per joint."""
    if noise_std < 0:
        raise InvalidInputError("noise_std must be non-negative")
    tau = inverse_dynamics(model, states, with_actuator=with_actuator)
    if noise_std > 0:
        tau = tau + np.random.default_rng(seed).normal(0.0, noise_std, size=tau.shape)
    meta = {"robot": model.name, "noise_std": noise_std, "seed": seed, "source": "simulated", "n": model.n}
    return Dataset(states, tau, timestamps, meta)


def perturb_kinematics(
    model: RobotModel, seed=None, length_range: float = 0.05, angle_range_deg: float = 5.0
) -> RobotModel:
    """Uniform perturbation of every DH length and angle; dynamics untouched."""
    rng = np.random.default_rng(seed)
    ang = np.deg2rad(angle_range_deg)
    links = []
    for link in model.links:
        da, dd = rng.uniform(-length_range, length_range, size=2)
        dalpha, dtheta = rng.uniform(-ang, ang, size=2)
        links.append(
            replace(
                link,
                dh_a=link.dh_a + da,
                dh_d_offset=link.dh_d_offset + dd,
                dh_alpha=link.dh_alpha + dalpha,
                dh_theta_offset=link.dh_theta_offset + dtheta,
            )
        )
    return model.with_links(links)


def differentiate_causal(q, dt: float | None = None, timestamps=None, jitter_tol: float = 0.01):
    """Backward differences of a uniformly sampled series.

    Returns ``(dq, ddq, valid)``; ``dq`` is undefined at the first sample and
    ``ddq`` at the first two, which ``valid`` marks as False.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if q.shape[0] < 3:
        raise InvalidInputError("need at least 3 samples")
    if timestamps is not None:
        steps = np.diff(np.asarray(timestamps, dtype=float))
        dt_est = float(np.median(steps))
        if dt_est <= 0 or np.max(np.abs(steps - dt_est)) > jitter_tol * dt_est:
            raise InvalidInputError("timestamps are not uniform within tolerance")
        dt = dt_est if dt is None else dt
    if dt is None or not dt > 0:
        raise InvalidInputError("a positive dt or uniform timestamps are required")
    dq = np.full_like(q, np.nan)
    ddq = np.full_like(q, np.nan)
    dq[1:] = (q[1:] - q[:-1]) / dt
    ddq[2:] = (dq[2:] - dq[1:-1]) / dt
    valid = np.ones(q.shape[0], dtype=bool)
    valid[:2] = False
    return dq, ddq, valid


def downsample(dataset: Dataset, step: int) -> Dataset:
    if step < 1:
        raise InvalidInputError("step must be >= 1")
    out = dataset.subset(slice(0, None, step))
    out.meta["downsample_step"] = int(step) * int(dataset.meta.get("downsample_step", 1))
    return out


# ---------------------------------------------------------------------------
# files


def dataset_columns(n: int) -> list:
    return (
        ["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"dq{i}" for i in range(1, n + 1)]
        + [f"ddq{i}" for i in range(1, n + 1)] + [f"tau{i}" for i in range(1, n + 1)]
    )


def write_dataset(dataset: Dataset, path):
    n = dataset.n
    meta = dict(dataset.meta)
    meta["n"] = n
    t = dataset.timestamps if dataset.timestamps is not None else np.arange(len(dataset), dtype=float)
    table = np.column_stack([t, dataset.inputs, dataset.torques])
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(meta) + "\n")
        fh.write(",".join(dataset_columns(n)) + "\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_dataset(path) -> Dataset:
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ParseError("missing '#' metadata header", line=1)
        try:
            meta = json.loads(first[1:])
            n = int(meta["n"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad metadata header: {exc}", line=1) from exc
        if n < 1:
            raise ParseError("n must be >= 1", line=1)
        expected = dataset_columns(n)
        header = fh.readline().strip().split(",")
        if header != expected:
            raise ParseError(f"expected columns {expected}, got {header}", line=2)
        rows = []
        for lineno, row in enumerate(csv.reader(fh), start=3):
            if not row:
                continue
            if len(row) != len(expected):
                raise ParseError(f"row has {len(row)} columns, expected {len(expected)}", line=lineno)
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"non-numeric cell: {exc}", line=lineno) from exc
    table = np.array(rows, dtype=float).reshape(-1, len(expected))
    states = JointState(table[:, 1:1 + n], table[:, 1 + n:1 + 2 * n], table[:, 1 + 2 * n:1 + 3 * n])
    try:
        return Dataset(states, table[:, 1 + 3 * n:], table[:, 0], meta)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc


def read_real_log(path, mapping: dict, dt: float | None = None) -> Dataset:
    """Ingest a robot log through a column mapping.

    ``mapping`` names CSV header columns: ``time`` (optional), ``q`` (list),
    ``dq`` (optional list; differentiated from ``q`` if absent), and either
    ``tau`` (list) or ``current`` (list) together with ``torque_gain``
    (list of N*m/A factors).  Accelerations always come from causal
    differentiation of the velocities; samples without a valid derivative
    are dropped.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration as exc:
            raise ParseError("empty log file", line=1) from exc
        index = {name: i for i, name in enumerate(header)}
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"row has {len(row)} columns, expected {len(header)}", line=lineno)
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"non-numeric cell: {exc}", line=lineno) from exc
    table = np.array(rows, dtype=float)

    def cols(names):
        try:
            return table[:, [index[c] for c in names]]
        except KeyError as exc:
            raise ParseError(f"column {exc} not found in log header") from exc

    t = cols([mapping["time"]])[:, 0] if mapping.get("time") else None
    q = cols(mapping["q"])
    if mapping.get("dq"):
        dq = cols(mapping["dq"])
        # ddq is the backward difference of the logged velocities
        _, _, valid = differentiate_causal(q, dt=dt, timestamps=t)
        step = dt if dt is not None else float(np.median(np.diff(t)))
        ddq = np.full_like(dq, np.nan)
        ddq[1:] = (dq[1:] - dq[:-1]) / step
        valid[1] = True
    else:
        dq, ddq, valid = differentiate_causal(q, dt=dt, timestamps=t)
    if mapping.get("tau"):
        tau = cols(mapping["tau"])
    elif mapping.get("current"):
        gain = np.asarray(mapping.get("torque_gain", 1.0), dtype=float)
        tau = cols(mapping["current"]) * gain
    else:
        raise InvalidInputError("mapping needs either 'tau' or 'current' columns")
    keep = valid
    states = JointState(q[keep], dq[keep], ddq[keep])
    meta = {"robot": mapping.get("robot", "real"), "noise_std": None, "seed": None, "source": "real_log", "n": q.shape[1]}
    return Dataset(states, tau[keep], None if t is None else t[keep], meta)
