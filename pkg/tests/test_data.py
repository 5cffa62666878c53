import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from gipkernel.data import (
    Dataset,
    SumOfSinusoids,
    TrajectoryConfig,
    dataset_columns,
    differentiate_causal,
    downsample,
    generate_trajectory,
    label_with_dynamics,
    perturb_kinematics,
    read_dataset,
    read_real_log,
    write_dataset,
)
from gipkernel.dynamics import JointState, builtin_robot, inverse_dynamics
from gipkernel.errors import InvalidInputError, ParseError
from gipkernel.features import random_states


def test_single_sinusoid_derivatives_exact():
    traj = SumOfSinusoids([[1.0]], [[1.0]], [[0.0]])
    t = np.linspace(0, 10, 101)
    s = traj(t)
    assert_array_equal(s.q[:, 0], np.sin(t))
    assert_array_equal(s.dq[:, 0], np.cos(t))
    assert_array_equal(s.ddq[:, 0], -np.sin(t))


def test_trajectory_derivatives_match_finite_differences():
    cfg = TrajectoryConfig(duration=20.0, dt=1e-3, seed=3, position_clip=[[-2, 2], [0, 0.3]])
    t, s = generate_trajectory(2, cfg)
    dq_fd = (s.q[2:] - s.q[:-2]) / (2 * cfg.dt)
    ddq_fd = (s.dq[2:] - s.dq[:-2]) / (2 * cfg.dt)
    assert np.max(np.abs(dq_fd - s.dq[1:-1])) / np.abs(s.dq).max() < 1e-4
    assert np.max(np.abs(ddq_fd - s.ddq[1:-1])) / np.abs(s.ddq).max() < 1e-4


def test_trajectory_respects_clip_and_seed():
    clip = [[-2.5, 2.5], [-0.2, 0.4]]
    cfg = TrajectoryConfig(duration=50.0, seed=9, position_clip=clip)
    t, s = generate_trajectory(2, cfg)
    assert len(t) == cfg.n_samples == 1000
    for j, (lo, hi) in enumerate(clip):
        assert s.q[:, j].min() >= lo - 1e-12 and s.q[:, j].max() <= hi + 1e-12
        assert max(s.q[:, j].max() - hi, lo - s.q[:, j].min()) == pytest.approx(0.0, abs=1e-12)
    _, again = generate_trajectory(2, cfg)
    assert_array_equal(again.as_array(), s.as_array())
    _, other = generate_trajectory(2, TrajectoryConfig(duration=50.0, seed=10, position_clip=clip))
    assert not np.allclose(other.q, s.q)


@pytest.mark.parametrize("bad", [{"dt": 0.0}, {"omega_range": (0.0, np.inf)}, {"n_sinusoids": 0}])
def test_trajectory_config_validation(bad):
    with pytest.raises(InvalidInputError):
        TrajectoryConfig(**bad)


def test_noiseless_labels_equal_dynamics():
    model = builtin_robot("scara")
    s = random_states(model.joint_types, 50, 0)
    ds = label_with_dynamics(model, s, 0.0)
    assert_array_equal(ds.torques, inverse_dynamics(model, s))
    assert ds.meta["source"] == "simulated"


def test_label_noise_statistics():
    model = builtin_robot("rr")
    s = random_states(model.joint_types, 10_000, 1)
    truth = inverse_dynamics(model, s)
    noise = label_with_dynamics(model, s, 0.01, seed=2).torques - truth
    assert_allclose(noise.std(axis=0), 0.01, rtol=0.05)
    assert abs(np.corrcoef(noise.T)[0, 1]) < 0.05
    again = label_with_dynamics(model, s, 0.01, seed=2).torques - truth
    assert_array_equal(again, noise)
    with pytest.raises(InvalidInputError):
        label_with_dynamics(model, s, -1.0)


def test_perturbation_bounds_and_determinism():
    model = builtin_robot("scara")
    a, b = perturb_kinematics(model, 5), perturb_kinematics(model, 5)
    assert a == b
    for old, new in zip(model.links, a.links):
        assert abs(new.dh_a - old.dh_a) <= 0.05 and abs(new.dh_d_offset - old.dh_d_offset) <= 0.05
        assert abs(new.dh_alpha - old.dh_alpha) <= np.deg2rad(5)
        assert abs(new.dh_theta_offset - old.dh_theta_offset) <= np.deg2rad(5)
        assert (new.mass, new.com, new.inertia) == (old.mass, old.com, old.inertia)
    s = random_states(model.joint_types, 10, 0)
    assert np.linalg.norm(inverse_dynamics(a, s) - inverse_dynamics(model, s)) > 0


def test_causal_differences_exact_on_polynomials():
    t = np.arange(10) * 0.1
    dq, ddq, valid = differentiate_causal(t, dt=0.1)
    assert_allclose(dq[1:, 0], 1.0, rtol=1e-12)
    assert_allclose(ddq[2:, 0], 0.0, atol=1e-12)
    _, ddq, _ = differentiate_causal(t ** 2, timestamps=t)
    assert_allclose(ddq[2:, 0], 2.0, rtol=1e-9)
    assert_array_equal(valid, [False, False] + [True] * 8)


def test_causal_derivative_of_sinusoid_at_fast_sampling():
    dt = 8e-3
    t = np.arange(2000) * dt
    dq, _, _ = differentiate_causal(np.sin(t), dt=dt)
    assert np.max(np.abs(dq[1:, 0] - np.cos(t[1:]))) < 1e-2


def test_nonuniform_timestamps_rejected():
    t = np.array([0.0, 0.1, 0.2, 0.35, 0.4])
    with pytest.raises(InvalidInputError):
        differentiate_causal(t, timestamps=t)
    with pytest.raises(InvalidInputError):
        differentiate_causal([1.0, 2.0])


@pytest.fixture
def dataset():
    model = builtin_robot("scara")
    t, s = generate_trajectory(4, TrajectoryConfig(duration=2.0, dt=0.05, seed=1))
    return label_with_dynamics(model, s, 0.01, seed=3, timestamps=t)


def test_file_round_trip_is_lossless(dataset, tmp_path):
    path = tmp_path / "d.csv"
    write_dataset(dataset, path)
    back = read_dataset(path)
    assert_array_equal(back.inputs, dataset.inputs)
    assert_array_equal(back.torques, dataset.torques)
    assert_array_equal(back.timestamps, dataset.timestamps)
    assert back.meta["robot"] == "scara" and back.meta["n"] == 4
    header = path.read_text().splitlines()[1].split(",")
    assert header == dataset_columns(4) and len(header) == 17


def test_malformed_rows_report_line_numbers(dataset, tmp_path):
    path = tmp_path / "d.csv"
    write_dataset(dataset, path)
    lines = path.read_text().splitlines()
    lines[4] = ",".join(lines[4].split(",")[:-1])
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="line 5") as info:
        read_dataset(path)
    assert info.value.line == 5
    lines = path.read_text().splitlines()
    lines[4] = ",".join(["x"] * 17)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="line 5"):
        read_dataset(path)
    path.write_text("t,q1\n")
    with pytest.raises(ParseError, match="line 1"):
        read_dataset(path)


def test_downsample(dataset):
    assert_array_equal(downsample(dataset, 1).inputs, dataset.inputs)
    half = downsample(dataset, 2)
    assert len(half) == 20 and half.meta["downsample_step"] == 2
    assert_array_equal(half.inputs, dataset.inputs[::2])
    assert len(downsample(dataset, 1000)) == 1
    with pytest.raises(InvalidInputError):
        downsample(dataset, 0)


def test_downsample_large():
    n = 40_000
    s = JointState(np.zeros((n, 1)), np.zeros((n, 1)), np.zeros((n, 1)))
    assert len(downsample(Dataset(s, np.zeros((n, 1))), 10)) == 4000


def test_dataset_invariants():
    s = random_states("RR", 3, 0)
    with pytest.raises(InvalidInputError):
        Dataset(s, np.zeros((4, 2)))
    with pytest.raises(InvalidInputError):
        Dataset(s, np.zeros((3, 2)), timestamps=[0.0, 0.0, 1.0])


def test_real_log_ingestion_with_current_mapping(tmp_path):
    """A log with positions, velocities and motor currents becomes a dataset."""
    model = builtin_robot("rr")
    dt = 8e-3
    t, s = generate_trajectory(2, TrajectoryConfig(duration=400 * dt, dt=dt, seed=4))
    tau = inverse_dynamics(model, s)
    gain = np.array([2.0, 4.0])
    rows = np.column_stack([t, s.q, s.dq, tau / gain])
    path = tmp_path / "log.csv"
    np.savetxt(path, rows, delimiter=",", header="time,p1,p2,v1,v2,i1,i2", comments="")
    mapping = {"time": "time", "q": ["p1", "p2"], "dq": ["v1", "v2"],
               "current": ["i1", "i2"], "torque_gain": gain.tolist()}
    ds = read_real_log(path, mapping)
    assert len(ds) == 399 and ds.meta["source"] == "real_log"
    assert_allclose(ds.torques, tau[1:], rtol=1e-12)
    assert np.max(np.abs(ds.states.ddq - s.ddq[1:])) < 0.05 * np.abs(s.ddq).max()
    no_vel = {k: v for k, v in mapping.items() if k != "dq"}
    assert len(read_real_log(path, no_vel)) == 398
    with pytest.raises(ParseError):
        read_real_log(path, {**mapping, "q": ["nope", "p2"]})
