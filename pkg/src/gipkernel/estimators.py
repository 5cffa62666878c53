"""Inverse-dynamics estimators compared by the benchmark.

``FE``
    Least-squares identification of the dynamics parameters through the
    regressor of a nominal robot model.
``PP``
    GP with a linear kernel on the nominal regressor row of each joint.
``SP``
    GP with the ``PP`` kernel plus an RBF on the raw state.
``RBF``
    GP with an ARD RBF kernel on the raw state ``[q, dq, ddq]``.
``GIP``
    GP with the geometrically inspired polynomial kernel on the augmented
    input.

Every GP estimator trains one independent model per joint.  Targets are
divided by their root mean square before training and predictions are
scaled back, so the same initial hyperparameters suit any torque range.
"""

from __future__ import annotations

import logging

import numpy as np

from .dynamics import JointState, RobotModel, fisherian_identify, regressor, robot_from_dict, robot_to_dict
from .errors import InvalidInputError
from .features import augment
from .gp import GpModel, OptimizerConfig, fit, optimize_hyperparameters, predict
from .kernels import RBF, Kernel, LinearPP, gip_kernel, semiparametric_kernel

__all__ = [
    "ESTIMATOR_NAMES",
    "Estimator",
    "FisherianEstimator",
    "GpEstimator",
    "make_estimator",
    "estimator_from_dict",
]

log = logging.getLogger(__name__)

ESTIMATOR_NAMES = ("FE", "PP", "SP", "RBF", "GIP")
GP_KINDS = ("PP", "SP", "RBF", "GIP")


class Estimator:
    name = "base"

    def fit(self, states: JointState, torques) -> "Estimator":
        raise NotImplementedError

    def predict(self, states: JointState) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class FisherianEstimator(Estimator):
    """Parameters identified by least squares on the nominal regressor."""

    name = "FE"

    def __init__(self, model: RobotModel, rcond: float | None = None):
        self.model = model
        self.rcond = rcond
        self.weights = None

    def fit(self, states, torques):
        phi = regressor(self.model, states)
        self.weights = fisherian_identify(phi, np.asarray(torques, dtype=float), rcond=self.rcond)
        return self

    def predict(self, states):
        if self.weights is None:
            raise InvalidInputError("estimator has not been fitted")
        return regressor(self.model, states) @ self.weights

    def to_dict(self):
        return {"estimator": self.name, "robot": robot_to_dict(self.model), "weights": self.weights.tolist()}


class GpEstimator(Estimator):
    """One GP per joint on a kernel and input map chosen by ``kind``.

    Parameters
    ----------
    kind : {"PP", "SP", "RBF", "GIP"}
    model : RobotModel
        Nominal robot.  ``PP`` and ``SP`` evaluate its regressor; the other
        kinds only use its joint types.
    optimizer : OptimizerConfig, optional
        Hyperparameter training schedule; ``None`` keeps the initial values.
    noise_var : float
        Initial noise variance in units of the scaled targets.
    seed : int
        Seeds the random initial hyperparameters (uniform in ``[-1, 1]``
        in log space) and the mini-batch order.
    """

    def __init__(
        self,
        kind: str,
        model: RobotModel,
        optimizer: OptimizerConfig | None = None,
        noise_var: float = 1e-3,
        seed: int = 0,
        randomize: bool = True,
    ):
        kind = kind.upper()
        if kind not in GP_KINDS:
            raise InvalidInputError(f"unknown GP estimator {kind!r}; expected one of {GP_KINDS}")
        self.name = kind
        self.model = model
        self.optimizer = optimizer
        self.noise_var = float(noise_var)
        self.seed = int(seed)
        self.randomize = randomize
        self.joint_models: list[GpModel] = []
        self.scales = None
        self.traces: list[list] = []

    # -- inputs -------------------------------------------------------------

    def inputs(self, states: JointState, joint: int) -> np.ndarray:
        """Kernel input rows for ``joint``."""
        if self.name == "GIP":
            return augment(states, self.model.joint_types).as_array()
        raw = states.as_array()
        if self.name == "RBF":
            return raw
        phi = regressor(self.model, states)[:, joint, :]
        return phi if self.name == "PP" else np.hstack([raw, phi])

    def initial_kernel(self, joint: int) -> Kernel:
        n = self.model.n
        if self.name == "GIP":
            kernel = gip_kernel(self.model.joint_types)
        elif self.name == "RBF":
            kernel = RBF(list(range(3 * n)))
        elif self.name == "PP":
            kernel = LinearPP(list(range(self.model.n_params)))
        else:
            kernel = semiparametric_kernel(3 * n, self.model.n_params)
        if self.randomize:
            kernel.randomize(np.random.default_rng([self.seed, joint]))
        return kernel

    # -- training -----------------------------------------------------------

    def fit(self, states, torques):
        torques = np.asarray(torques, dtype=float)
        if torques.shape != states.q.shape:
            raise InvalidInputError("torques must have shape (N, n)")
        rms = np.sqrt(np.mean(torques ** 2, axis=0))
        self.scales = np.where(rms > 0, rms, 1.0)
        self.joint_models, self.traces = [], []
        for j in range(self.model.n):
            X = self.inputs(states, j)
            y = torques[:, j] / self.scales[j]
            kernel = self.initial_kernel(j)
            noise_var = self.noise_var
            trace = []
            if self.optimizer is not None:
                cfg = OptimizerConfig(**{**self.optimizer.__dict__, "seed": self.optimizer.seed + 7919 * j})
                result = optimize_hyperparameters(kernel, X, y, cfg, noise_var=noise_var)
                kernel, noise_var, trace = result.kernel, result.noise_var, result.trace
            self.joint_models.append(fit(kernel, X, y, noise_var))
            self.traces.append(trace)
            log.debug("%s joint %d trained, noise %.3g", self.name, j, noise_var)
        return self

    def predict(self, states, return_var: bool = False):
        if not self.joint_models:
            raise InvalidInputError("estimator has not been fitted")
        means, variances = [], []
        for j, gp in enumerate(self.joint_models):
            out = predict(gp, self.inputs(states, j), return_var=return_var)
            if return_var:
                means.append(out[0] * self.scales[j])
                variances.append(out[1] * self.scales[j] ** 2)
            else:
                means.append(out * self.scales[j])
        mean = np.column_stack(means)
        return (mean, np.column_stack(variances)) if return_var else mean

    def to_dict(self):
        return {
            "estimator": self.name,
            "robot": robot_to_dict(self.model),
            "scales": self.scales.tolist(),
            "joints": [gp.to_dict() for gp in self.joint_models],
        }


def make_estimator(name: str, model: RobotModel, optimizer=None, seed: int = 0, noise_var: float = 1e-3) -> Estimator:
    name = name.upper()
    if name == "FE":
        return FisherianEstimator(model)
    if name in GP_KINDS:
        return GpEstimator(name, model, optimizer=optimizer, seed=seed, noise_var=noise_var)
    raise InvalidInputError(f"unknown estimator {name!r}; expected one of {ESTIMATOR_NAMES}")


def estimator_from_dict(doc: dict) -> Estimator:
    """Rebuild a fitted estimator serialized by ``to_dict``."""
    model = robot_from_dict(doc["robot"])
    name = doc["estimator"]
    if name == "FE":
        est = FisherianEstimator(model)
        est.weights = np.asarray(doc["weights"], dtype=float)
        return est
    est = GpEstimator(name, model)
    est.scales = np.asarray(doc["scales"], dtype=float)
    est.joint_models = [GpModel.from_dict(d) for d in doc["joints"]]
    return est
