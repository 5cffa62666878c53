"""Exact Gaussian process regression for a single output.

Training solves ``(K + s2 I) alpha = y`` through a Cholesky factor; the
hyperparameters (kernel ``theta`` and ``log s2``) are tuned by minimizing the
negative log marginal likelihood with Adam.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalFailureError
from .kernels import Kernel, kernel_from_dict

__all__ = [
    "GpModel",
    "OptimizerConfig",
    "OptimizationResult",
    "fit",
    "predict",
    "log_marginal_likelihood",
    "adam_minimize",
    "optimize_hyperparameters",
]

log = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_STOP = 1e-4


def _cholesky_with_jitter(A: np.ndarray):
    """Lower Cholesky factor of ``A``, escalating diagonal jitter on failure.

    Jitter starts at ``1e-10 * mean(diag A)`` and grows tenfold up to
    ``1e-4 * mean(diag A)``.
    """
    scale = float(np.mean(np.diag(A)))
    if not np.isfinite(scale):
        raise NumericalFailureError("Gram matrix has non-finite entries")
    scale = abs(scale) if scale != 0 else 1.0
    tried = [0.0]
    try:
        return scipy.linalg.cholesky(A, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START
    while jitter <= JITTER_STOP * (1 + 1e-9):
        tried.append(jitter * scale)
        try:
            L = scipy.linalg.cholesky(
                A + jitter * scale * np.eye(A.shape[0]), lower=True, check_finite=False
            )
            return L, jitter * scale
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalFailureError(
        f"Cholesky failed for jitters {tried}", jitters=tried
    )


@dataclass
class GpModel:
    """A trained single-output GP.

    ``chol`` is the lower factor of ``K(X, X) + (noise_var + jitter) I`` and
    ``alpha`` the corresponding solve against ``y``.
    """

    kernel: Kernel
    noise_var: float
    X: np.ndarray
    y: np.ndarray
    alpha: np.ndarray | None = None
    chol: np.ndarray | None = None
    jitter: float = 0.0

    @property
    def trained(self) -> bool:
        return self.alpha is not None and self.chol is not None

    def to_dict(self) -> dict:
        if not self.trained:
            raise InvalidInputError("model has not been fitted")
        return {
            "kernel": self.kernel.to_dict(),
            "noise_var": float(self.noise_var),
            "jitter": float(self.jitter),
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "alpha": self.alpha.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GpModel":
        model = fit(
            kernel_from_dict(doc["kernel"]),
            np.asarray(doc["X"], dtype=float),
            np.asarray(doc["y"], dtype=float),
            doc["noise_var"],
        )
        # the stored weights are authoritative; refit only provides the factor
        model.alpha = np.asarray(doc["alpha"], dtype=float)
        return model


def fit(kernel: Kernel, X, y, noise_var: float) -> GpModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidInputError("X must be a non-empty 2-D array")
    if y.shape != (X.shape[0],):
        raise InvalidInputError(f"y must have shape ({X.shape[0]},), got {y.shape}")
    if not noise_var >= 0:
        raise InvalidInputError("noise_var must be non-negative")
    K = kernel(X)
    K[np.diag_indices_from(K)] += noise_var
    L, jitter = _cholesky_with_jitter(K)
    alpha = scipy.linalg.cho_solve((L, True), y, check_finite=False)
    return GpModel(kernel, float(noise_var), X, y, alpha, L, jitter)


def predict(model: GpModel, Xs, return_var: bool = True, batch_size: int = 4096):
    """Posterior mean (and variance) at the rows of ``Xs``."""
    if not isinstance(model, GpModel) or not model.trained:
        raise InvalidInputError("predict needs a fitted GpModel")
    Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
    mean = np.empty(Xs.shape[0])
    var = np.empty(Xs.shape[0]) if return_var else None
    for start in range(0, Xs.shape[0], batch_size):
        rows = slice(start, start + batch_size)
        Ks = model.kernel(Xs[rows], model.X)
        mean[rows] = Ks @ model.alpha
        if return_var:
            v = scipy.linalg.solve_triangular(model.chol, Ks.T, lower=True, check_finite=False)
            var[rows] = model.kernel.diag(Xs[rows]) - np.sum(v * v, axis=0)
    if return_var:
        np.maximum(var, 0.0, out=var)
        return mean, var
    return mean


def log_marginal_likelihood(model: GpModel, with_gradient: bool = True):
    """Log evidence of the training targets and its gradient.

    The gradient is taken with respect to ``[kernel.theta, log noise_var]``.
    """
    if not model.trained:
        raise InvalidInputError("model has not been fitted")
    y, alpha, L = model.y, model.alpha, model.chol
    n = y.shape[0]
    value = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2 * np.pi)
    if not with_gradient:
        return float(value)
    Kinv, info = scipy.linalg.lapack.dpotri(L, lower=1)
    if info != 0:
        raise NumericalFailureError(f"inverse from Cholesky factor failed (info={info})")
    Kinv = np.tril(Kinv) + np.tril(Kinv, -1).T
    W = np.outer(alpha, alpha) - Kinv
    grad = 0.5 * model.kernel.contract_gradients(model.X, W)
    return float(value), np.append(grad, 0.5 * model.noise_var * np.trace(W))


@dataclass
class OptimizerConfig:
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 200
    batch_size: int = 0
    seed: int = 0
    min_noise_var: float = 1e-10

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise InvalidInputError("beta1 and beta2 must lie in (0, 1)")
        if self.epochs < 1 or self.batch_size < 0:
            raise InvalidInputError("epochs must be >= 1 and batch_size >= 0")


def adam_minimize(fun, x0, config: OptimizerConfig, batches=None, project=None):
    """Minimize ``fun(x, batch) -> (loss, grad)`` with Adam.

    ``batches`` is a callable ``epoch -> iterable of batch descriptors``
    (default: one ``None`` batch per epoch, i.e. full batch).  ``project``
    optionally maps each iterate back into the feasible set.

    Returns the iterate with the lowest epoch loss, that loss and the list of
    per-epoch losses.
    """
    x = np.array(x0, dtype=float)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    t = 0
    trace = []
    best_x, best_loss = x.copy(), np.inf
    for epoch in range(config.epochs):
        losses = []
        start_x = x.copy()
        for batch in (batches(epoch) if batches is not None else [None]):
            loss, grad = fun(x, batch)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise NumericalFailureError(
                    f"non-finite loss {loss} at epoch {epoch}, parameters {x.tolist()}"
                )
            losses.append(loss)
            t += 1
            m = config.beta1 * m + (1 - config.beta1) * grad
            v = config.beta2 * v + (1 - config.beta2) * grad * grad
            m_hat = m / (1 - config.beta1 ** t)
            v_hat = v / (1 - config.beta2 ** t)
            x = x - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
            if project is not None:
                x = project(x)
        epoch_loss = float(np.mean(losses))
        trace.append(epoch_loss)
        # full batch: the loss belongs to the iterate it was evaluated at
        candidate = start_x if batches is None else x
        if epoch_loss < best_loss:
            best_loss, best_x = epoch_loss, candidate.copy()
    return best_x, best_loss, trace


@dataclass
class OptimizationResult:
    kernel: Kernel
    noise_var: float
    loss: float
    trace: list = field(default_factory=list)


def optimize_hyperparameters(
    kernel: Kernel,
    X,
    y,
    config: OptimizerConfig | None = None,
    noise_var: float = 1e-2,
    train_noise: bool = True,
) -> OptimizationResult:
    """Tune ``kernel.theta`` (and the noise) by Adam on the negative log evidence.

    The loss is the negative log marginal likelihood divided by the batch
    size.  With ``batch_size > 0`` each epoch visits disjoint random batches
    of the training set.  The kernel passed in is not modified.
    """
    config = config or OptimizerConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    N = X.shape[0]
    work = kernel.copy()
    n_theta = work.n_theta
    log_floor = np.log(config.min_noise_var)

    def loss_grad(params, batch):
        work.theta = params[:n_theta]
        s2 = float(np.exp(params[n_theta]))
        Xb, yb = (X, y) if batch is None else (X[batch], y[batch])
        model = fit(work, Xb, yb, s2)
        value, grad = log_marginal_likelihood(model)
        if not train_noise:
            grad[-1] = 0.0
        return -value / len(yb), -grad / len(yb)

    rng = np.random.default_rng(config.seed)
    size = config.batch_size

    def shuffled_batches(epoch):
        perm = rng.permutation(N)
        return [perm[i:i + size] for i in range(0, N - size + 1, size)]

    batches = shuffled_batches if 0 < size < N else None

    def project(params):
        params[n_theta] = max(params[n_theta], log_floor)
        return params

    x0 = np.append(work.theta, np.log(max(noise_var, config.min_noise_var)))
    best, loss, trace = adam_minimize(loss_grad, x0, config, batches, project)
    work.theta = best[:n_theta]
    log.debug("hyperparameter optimization finished at loss %.6g", loss)
    return OptimizationResult(work, float(np.exp(best[n_theta])), loss, trace)
