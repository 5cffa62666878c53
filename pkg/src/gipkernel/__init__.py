"""Gaussian-process learning of robot inverse dynamics with polynomial kernels.

The package bundles a rigid-body dynamics engine for serial manipulators,
the polynomial lift of joint states, a composable kernel library, exact GP
regression with marginal-likelihood training, data generation utilities and
a benchmark harness.
"""

from .dynamics import (
    ActuatorSpec,
    JointState,
    JointType,
    LinkSpec,
    RobotModel,
    builtin_robot,
    coriolis_matrix,
    fisherian_identify,
    forward_kinematics,
    gravity_vector,
    inertia_matrix,
    inverse_dynamics,
    load_robot,
    regressor,
)
from .errors import (
    InvalidInputError,
    ModelValidationError,
    NumericalFailureError,
    ParseError,
    UndefinedMetricError,
)
from .features import (
    Convention,
    augment,
    certify_polynomial_dynamics,
    count_monomials,
    enumerate_monomials,
    evaluate_monomials,
)
from .gp import GpModel, OptimizerConfig, fit, log_marginal_likelihood, optimize_hyperparameters, predict
from .kernels import MPK, RBF, LinearPP, Poly, Product, Sum, gip_kernel, semiparametric_kernel
from .metrics import gmse, mse, nmse

__version__ = "0.1.0"

__all__ = [
    "ActuatorSpec",
    "JointState",
    "JointType",
    "LinkSpec",
    "RobotModel",
    "builtin_robot",
    "coriolis_matrix",
    "fisherian_identify",
    "forward_kinematics",
    "gravity_vector",
    "inertia_matrix",
    "inverse_dynamics",
    "load_robot",
    "regressor",
    "InvalidInputError",
    "ModelValidationError",
    "NumericalFailureError",
    "ParseError",
    "UndefinedMetricError",
    "Convention",
    "augment",
    "certify_polynomial_dynamics",
    "count_monomials",
    "enumerate_monomials",
    "evaluate_monomials",
    "GpModel",
    "OptimizerConfig",
    "fit",
    "log_marginal_likelihood",
    "optimize_hyperparameters",
    "predict",
    "MPK",
    "RBF",
    "LinearPP",
    "Poly",
    "Product",
    "Sum",
    "gip_kernel",
    "semiparametric_kernel",
    "gmse",
    "mse",
    "nmse",
]
