import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gipkernel.bench import ExperimentConfig, make_trial_data, run_data_efficiency, run_monte_carlo
from gipkernel.dynamics import builtin_robot, inverse_dynamics
from gipkernel.errors import InvalidInputError, UndefinedMetricError
from gipkernel.estimators import FisherianEstimator, GpEstimator, estimator_from_dict, make_estimator
from gipkernel.features import random_states
from gipkernel.gp import OptimizerConfig
from gipkernel.metrics import boxplot_stats, gmse, mse, nmse

FAST = OptimizerConfig(learning_rate=0.1, epochs=3, batch_size=50)


def small_config(**kw):
    base = dict(robot="rr", trials=1, train_size=60, test_size=40, optimizer=FAST, estimators=["GIP"])
    base.update(kw)
    return ExperimentConfig(**base)


def test_metric_definitions():
    rng = np.random.default_rng(0)
    y = rng.normal(size=(500, 3))
    assert_allclose(nmse(y, y), 0.0)
    assert_allclose(nmse(y, y.mean(axis=0)), 1.0)
    pred = y + 0.1
    assert_allclose(mse(y, pred), 0.01)
    assert gmse(y, pred) == pytest.approx(0.03)
    with pytest.raises(UndefinedMetricError):
        nmse(np.ones(10), np.zeros(10))
    with pytest.raises(InvalidInputError):
        mse([1.0], [1.0])


def test_boxplot_stats_against_numpy():
    values = np.r_[np.arange(1.0, 11.0), 100.0]
    stats = boxplot_stats(values)
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    assert (stats["q1"], stats["median"], stats["q3"]) == (q1, med, q3)
    assert stats["outliers"] == [100.0] and stats["whisker_high"] == 10.0
    assert boxplot_stats([np.nan])["n"] == 0


def test_fisherian_estimator_exact_on_own_model():
    model = builtin_robot("scara")
    s = random_states(model.joint_types, 100, 0)
    est = FisherianEstimator(model).fit(s, inverse_dynamics(model, s))
    test = random_states(model.joint_types, 30, 1)
    assert_allclose(est.predict(test), inverse_dynamics(model, test), rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("name", ["PP", "SP", "RBF", "GIP", "FE"])
def test_estimators_round_trip_through_json(name):
    model = builtin_robot("rp")
    s = random_states(model.joint_types, 40, 2)
    est = make_estimator(name, model, optimizer=FAST, seed=1).fit(s, inverse_dynamics(model, s))
    back = estimator_from_dict(json.loads(json.dumps(est.to_dict())))
    test = random_states(model.joint_types, 10, 3)
    assert_allclose(back.predict(test), est.predict(test), rtol=1e-10, atol=1e-12)


def test_gp_estimator_rejects_unknown_kind():
    with pytest.raises(InvalidInputError):
        GpEstimator("NN", builtin_robot("rr"))
    with pytest.raises(InvalidInputError):
        make_estimator("NN", builtin_robot("rr"))


def test_predictive_variance_is_returned_per_joint():
    model = builtin_robot("rr")
    s = random_states(model.joint_types, 30, 4)
    est = make_estimator("GIP", model).fit(s, inverse_dynamics(model, s))
    mean, var = est.predict(random_states(model.joint_types, 5, 5), return_var=True)
    assert mean.shape == var.shape == (5, 2) and np.all(var >= 0)


def test_config_validation_and_json(tmp_path):
    with pytest.raises(InvalidInputError):
        ExperimentConfig(estimators=[])
    with pytest.raises(InvalidInputError):
        ExperimentConfig(estimators=["NN"])
    with pytest.raises(InvalidInputError):
        ExperimentConfig(train_size=0)
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_dict({"trails": 3})
    cfg = small_config()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = ExperimentConfig.from_json_file(path)
    assert again.to_dict() == cfg.to_dict()
    assert isinstance(again.optimizer, OptimizerConfig)


def test_monte_carlo_smoke_and_outputs(tmp_path):
    cfg = small_config(out_dir=str(tmp_path))
    res = run_monte_carlo(cfg)
    assert len(res.records) == 2
    assert {r["joint"] for r in res.records} == {1, 2}
    assert all(r["status"] == "ok" for r in res.records)
    assert res.records[0]["gmse"] == pytest.approx(sum(r["mse"] for r in res.records))
    summary = json.loads((tmp_path / "monte_carlo_summary.json").read_text())
    assert summary["estimators"]["GIP"]["nmse"]["1"]["n"] == 1
    lines = (tmp_path / "monte_carlo.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("trial,estimator,joint")


def test_monte_carlo_is_reproducible():
    cfg = small_config(trials=2, estimators=["FE", "RBF"])
    a, b = run_monte_carlo(cfg), run_monte_carlo(cfg)
    assert [r["nmse"] for r in a.records] == [r["nmse"] for r in b.records]
    assert a.records[0]["trial_seeds"] != a.records[-1]["trial_seeds"]


def test_parametric_prior_on_own_model_is_exact():
    cfg = small_config(robot="scara", noise_std=0.0, perturb_kinematics=False, estimators=["PP"],
                       train_size=300, test_size=200, optimizer=OptimizerConfig(learning_rate=0.1, epochs=30))
    res = run_monte_carlo(cfg)
    assert np.all(res.values("PP") < 1e-6), res.values("PP")


def test_parametric_prior_degrades_with_wrong_kinematics():
    kw = dict(robot="scara", noise_std=0.0, estimators=["PP"], train_size=300, test_size=200,
              optimizer=OptimizerConfig(learning_rate=0.1, epochs=30))
    exact = run_monte_carlo(small_config(perturb_kinematics=False, **kw)).values("PP")
    biased = run_monte_carlo(small_config(perturb_kinematics=True, **kw)).values("PP")
    assert np.sum(biased > exact) >= 3


def test_trial_data_uses_perturbed_model_for_labels():
    cfg = small_config(robot="scara", noise_std=0.0)
    data = make_trial_data(cfg, 0)
    assert data.true_model != data.nominal
    assert_allclose(data.train_torques, inverse_dynamics(data.true_model, data.train_states))


def test_data_efficiency_nested_subsets(tmp_path):
    cfg = small_config(estimators=["FE", "GIP"], out_dir=str(tmp_path))
    res = run_data_efficiency(cfg, grid=[20, 60])
    sizes = sorted({r["train_size"] for r in res.records})
    assert sizes == [20, 60]
    assert set(res.summary["estimators"]["GIP"]) == {"20", "60"}
    assert (tmp_path / "data_efficiency.csv").exists()
    single = run_data_efficiency(small_config(), grid=[60])
    mc = run_monte_carlo(small_config())
    assert len(single.records) == len(mc.records)
    with pytest.raises(InvalidInputError):
        run_data_efficiency(cfg, grid=[0])


def test_failures_are_recorded_not_raised(monkeypatch):
    from gipkernel import estimators as est_mod
    from gipkernel.errors import NumericalFailureError

    def boom(self, states, torques):
        raise NumericalFailureError("forced", jitters=[0.0])

    monkeypatch.setattr(est_mod.GpEstimator, "fit", boom)
    res = run_monte_carlo(small_config())
    assert all(r["status"].startswith("failed") and np.isnan(r["nmse"]) for r in res.records)
    assert res.summary["estimators"]["GIP"]["failures"] == 1
