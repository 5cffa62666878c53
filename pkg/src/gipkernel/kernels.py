"""Covariance functions with log-space hyperparameters and analytic gradients.

Kernels form a composition tree: leaves (:class:`RBF`, :class:`Poly`,
:class:`MPK`, :class:`LinearPP`) read a subset of input columns given by
``dims``; :class:`Sum` and :class:`Product` combine children.  All
variance-like quantities are stored as logarithms, so any real parameter
vector ``theta`` is a valid kernel.

``gradients(X)`` yields ``dK/dtheta_k`` for every trainable scalar in the
order of ``theta``; it is a generator so that large Gram matrices are
produced one at a time.  ``contract_gradients(X, W)`` returns the vector
``sum(W * dK/dtheta_k)`` for a symmetric ``W`` directly, which is all the
marginal-likelihood gradient needs and avoids forming the derivative Grams.
"""

from __future__ import annotations

import copy
import json

import numpy as np

from .dynamics import parse_joint_types
from .errors import InvalidInputError
from .features import AugmentedLayout

__all__ = [
    "Kernel",
    "RBF",
    "Poly",
    "MPK",
    "LinearPP",
    "Sum",
    "Product",
    "gip_kernel",
    "semiparametric_kernel",
    "kernel_gradient",
    "kernel_from_dict",
    "kernel_from_json",
]


class Kernel:
    """Base class of the composition tree."""

    kind = "kernel"

    def __call__(self, X, Z=None) -> np.ndarray:
        raise NotImplementedError

    def diag(self, X) -> np.ndarray:
        raise NotImplementedError

    def gradients(self, X):
        raise NotImplementedError

    def contract_gradients(self, X, W) -> np.ndarray:
        """``[sum(W * dK) for dK in gradients(X)]`` for symmetric ``W``."""
        return np.array([np.sum(W * dk) for dk in self.gradients(X)], dtype=float)

    def leaves(self):
        return [self]

    # -- parameters -----------------------------------------------------

    @property
    def theta(self) -> np.ndarray:
        parts = [
            np.ravel(leaf.params[name])
            for leaf in self.leaves()
            for name in leaf.param_order
            if name not in leaf.fixed
        ]
        return np.concatenate(parts) if parts else np.zeros(0)

    @theta.setter
    def theta(self, value):
        value = np.asarray(value, dtype=float)
        if value.shape != (self.n_theta,):
            raise InvalidInputError(f"theta must have shape ({self.n_theta},), got {value.shape}")
        pos = 0
        for leaf in self.leaves():
            for name in leaf.param_order:
                if name in leaf.fixed:
                    continue
                shape = leaf.params[name].shape
                size = int(np.prod(shape))
                leaf.params[name] = value[pos:pos + size].reshape(shape).copy()
                pos += size

    @property
    def n_theta(self) -> int:
        return sum(
            leaf.params[name].size
            for leaf in self.leaves()
            for name in leaf.param_order
            if name not in leaf.fixed
        )

    def param_names(self) -> list:
        names = []
        for i, leaf in enumerate(self.leaves()):
            for name in leaf.param_order:
                if name in leaf.fixed:
                    continue
                arr = leaf.params[name]
                if arr.ndim == 0:
                    names.append(f"{i}:{leaf.kind}.{name}")
                else:
                    names.extend(
                        f"{i}:{leaf.kind}.{name}[{','.join(map(str, idx))}]"
                        for idx in np.ndindex(arr.shape)
                    )
        return names

    def randomize(self, rng=None, low=-1.0, high=1.0) -> "Kernel":
        """Draw every trainable log-parameter uniformly from ``[low, high]``."""
        rng = np.random.default_rng(rng)
        self.theta = rng.uniform(low, high, size=self.n_theta)
        return self

    def copy(self) -> "Kernel":
        return copy.deepcopy(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        raise NotImplementedError

    def k(self, x, z) -> float:
        """Scalar evaluation on two single input vectors."""
        return float(self(np.atleast_2d(x), np.atleast_2d(z))[0, 0])

    def __add__(self, other):
        return Sum([self, other])

    def __mul__(self, other):
        return Product([self, other])


class _Leaf(Kernel):
    param_order: tuple = ()

    def __init__(self, dims, fixed=()):
        dims = list(range(dims)) if isinstance(dims, (int, np.integer)) else list(dims)
        if not dims or min(dims) < 0:
            raise InvalidInputError("a kernel needs at least one non-negative input column")
        self.dims = dims
        self.fixed = set(fixed)
        self.params = {}

    @property
    def d(self):
        return len(self.dims)

    def _take(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise InvalidInputError(f"inputs must be 2-D, got shape {X.shape}")
        if max(self.dims) >= X.shape[1]:
            raise InvalidInputError(
                f"{self.kind} reads column {max(self.dims)} but inputs have {X.shape[1]}"
            )
        return X[:, self.dims]

    def _pair(self, X, Z):
        Xs = self._take(X)
        Zs = Xs if Z is None else self._take(Z)
        return Xs, Zs

    def _set(self, name, value, shape):
        arr = np.array(value, dtype=float)
        if arr.shape != shape:
            arr = np.broadcast_to(arr, shape).copy()
        self.params[name] = arr

    def to_dict(self):
        doc = {
            "kind": self.kind,
            "dims": list(self.dims),
            "params": {k: np.asarray(v).tolist() for k, v in self.params.items()},
        }
        if self.fixed:
            doc["fixed"] = sorted(self.fixed)
        return doc

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims})"


class RBF(_Leaf):
    """``lambda * exp(-sum_j (x_j - z_j)^2 / l_j^2)``.

    Parameters ``log_lambda`` (scalar) and ``log_lengthscale`` (one per
    input column), so that the diagonal metric is ``l_j^2``.
    """

    kind = "rbf"
    param_order = ("log_lambda", "log_lengthscale")

    def __init__(self, dims, log_lambda=0.0, log_lengthscale=0.0, fixed=()):
        super().__init__(dims, fixed)
        self._set("log_lambda", log_lambda, ())
        self._set("log_lengthscale", log_lengthscale, (self.d,))

    def _sqdist_terms(self, Xs, Zs):
        ell2 = np.exp(2.0 * self.params["log_lengthscale"])
        for j in range(self.d):
            yield (Xs[:, j, None] - Zs[None, :, j]) ** 2 / ell2[j]

    def __call__(self, X, Z=None):
        Xs, Zs = self._pair(X, Z)
        dist = np.zeros((Xs.shape[0], Zs.shape[0]))
        for term in self._sqdist_terms(Xs, Zs):
            dist += term
        return np.exp(self.params["log_lambda"]) * np.exp(-dist)

    def diag(self, X):
        return np.full(self._take(X).shape[0], np.exp(self.params["log_lambda"]))

    def gradients(self, X):
        K = self(X)
        if "log_lambda" not in self.fixed:
            yield K
        if "log_lengthscale" not in self.fixed:
            Xs = self._take(X)
            for term in self._sqdist_terms(Xs, Xs):
                yield 2.0 * K * term

    def contract_gradients(self, X, W):
        A = W * self(X)
        out = []
        if "log_lambda" not in self.fixed:
            out.append(A.sum())
        if "log_lengthscale" not in self.fixed:
            Xs = self._take(X)
            ell2 = np.exp(2.0 * self.params["log_lengthscale"])
            # sum_ij A_ij (x_i - x_j)^2 = 2 x^T diag(rowsum A) x - 2 x^T A x
            quad = 2.0 * (A.sum(axis=1) @ Xs ** 2) - 2.0 * np.sum(Xs * (A @ Xs), axis=0)
            out.extend(2.0 * quad / ell2)
        return np.asarray(out, dtype=float)


class Poly(_Leaf):
    """Inhomogeneous polynomial kernel ``(s2 + x^T diag(sig) z)^p``."""

    kind = "poly"
    param_order = ("log_sigma_p2", "log_sigma_diag")

    def __init__(self, dims, degree=2, log_sigma_p2=0.0, log_sigma_diag=0.0, fixed=()):
        super().__init__(dims, fixed)
        if int(degree) < 1:
            raise InvalidInputError("polynomial degree must be >= 1")
        self.degree = int(degree)
        self._set("log_sigma_p2", log_sigma_p2, ())
        self._set("log_sigma_diag", log_sigma_diag, (self.d,))

    def _base(self, Xs, Zs):
        sig = np.exp(self.params["log_sigma_diag"])
        return np.exp(self.params["log_sigma_p2"]) + (Xs * sig) @ Zs.T

    def __call__(self, X, Z=None):
        Xs, Zs = self._pair(X, Z)
        return self._base(Xs, Zs) ** self.degree

    def diag(self, X):
        Xs = self._take(X)
        sig = np.exp(self.params["log_sigma_diag"])
        return (np.exp(self.params["log_sigma_p2"]) + (Xs ** 2) @ sig) ** self.degree

    def gradients(self, X):
        Xs = self._take(X)
        base = self._base(Xs, Xs)
        outer = self.degree * base ** (self.degree - 1)
        if "log_sigma_p2" not in self.fixed:
            yield outer * np.exp(self.params["log_sigma_p2"])
        if "log_sigma_diag" not in self.fixed:
            sig = np.exp(self.params["log_sigma_diag"])
            for j in range(self.d):
                yield outer * (sig[j] * np.outer(Xs[:, j], Xs[:, j]))

    def contract_gradients(self, X, W):
        Xs = self._take(X)
        A = W * (self.degree * self._base(Xs, Xs) ** (self.degree - 1))
        out = []
        if "log_sigma_p2" not in self.fixed:
            out.append(np.exp(self.params["log_sigma_p2"]) * A.sum())
        if "log_sigma_diag" not in self.fixed:
            sig = np.exp(self.params["log_sigma_diag"])
            out.extend(sig * np.sum(Xs * (A @ Xs), axis=0))
        return np.asarray(out, dtype=float)

    def to_dict(self):
        doc = super().to_dict()
        doc["degree"] = self.degree
        return doc


class MPK(_Leaf):
    """Product of ``degree`` linear kernels with distinct parameters.

    ``k(x, z) = prod_s (s2_s + x^T diag(sig_s) z)``; ``log_sigma2`` has shape
    ``(degree,)`` and ``log_sigma_diag`` shape ``(degree, d)``.  With all
    factors tied it coincides with :class:`Poly` of the same degree.
    """

    kind = "mpk"
    param_order = ("log_sigma2", "log_sigma_diag")

    def __init__(self, dims, degree=2, log_sigma2=0.0, log_sigma_diag=0.0, fixed=()):
        super().__init__(dims, fixed)
        if int(degree) < 1:
            raise InvalidInputError("MPK degree must be >= 1")
        self.degree = int(degree)
        self._set("log_sigma2", log_sigma2, (self.degree,))
        self._set("log_sigma_diag", log_sigma_diag, (self.degree, self.d))

    def _factors(self, Xs, Zs):
        s2 = np.exp(self.params["log_sigma2"])
        sig = np.exp(self.params["log_sigma_diag"])
        return [s2[s] + (Xs * sig[s]) @ Zs.T for s in range(self.degree)]

    def __call__(self, X, Z=None):
        Xs, Zs = self._pair(X, Z)
        out = None
        for f in self._factors(Xs, Zs):
            out = f if out is None else out * f
        return out

    def diag(self, X):
        Xs = self._take(X)
        s2 = np.exp(self.params["log_sigma2"])
        sig = np.exp(self.params["log_sigma_diag"])
        return np.prod(s2[:, None] + sig @ (Xs ** 2).T, axis=0)

    def gradients(self, X):
        Xs = self._take(X)
        factors = self._factors(Xs, Xs)
        others = []
        for s in range(self.degree):
            rest = np.ones_like(factors[0])
            for t, f in enumerate(factors):
                if t != s:
                    rest = rest * f
            others.append(rest)
        if "log_sigma2" not in self.fixed:
            s2 = np.exp(self.params["log_sigma2"])
            for s in range(self.degree):
                yield others[s] * s2[s]
        if "log_sigma_diag" not in self.fixed:
            sig = np.exp(self.params["log_sigma_diag"])
            for s in range(self.degree):
                for j in range(self.d):
                    yield others[s] * (sig[s, j] * np.outer(Xs[:, j], Xs[:, j]))

    def contract_gradients(self, X, W):
        Xs = self._take(X)
        factors = self._factors(Xs, Xs)
        weighted = []
        for s in range(self.degree):
            A = W
            for t, f in enumerate(factors):
                if t != s:
                    A = A * f
            weighted.append(A)
        out = []
        if "log_sigma2" not in self.fixed:
            s2 = np.exp(self.params["log_sigma2"])
            out.extend(s2[s] * weighted[s].sum() for s in range(self.degree))
        if "log_sigma_diag" not in self.fixed:
            sig = np.exp(self.params["log_sigma_diag"])
            for s in range(self.degree):
                out.extend(sig[s] * np.sum(Xs * (weighted[s] @ Xs), axis=0))
        return np.asarray(out, dtype=float)

    def to_dict(self):
        doc = super().to_dict()
        doc["degree"] = self.degree
        return doc


class LinearPP(_Leaf):
    """Linear kernel on regressor rows, ``phi(x) diag(w) phi(z)^T``.

    The input columns are a row of the rigid-body regressor for one joint;
    ``log_w_prior_diag`` holds the log prior variances of the dynamics
    parameters (prior mean zero).
    """

    kind = "linear_pp"
    param_order = ("log_w_prior_diag",)

    def __init__(self, dims, log_w_prior_diag=0.0, fixed=()):
        super().__init__(dims, fixed)
        self._set("log_w_prior_diag", log_w_prior_diag, (self.d,))

    def __call__(self, X, Z=None):
        Xs, Zs = self._pair(X, Z)
        return (Xs * np.exp(self.params["log_w_prior_diag"])) @ Zs.T

    def diag(self, X):
        Xs = self._take(X)
        return (Xs ** 2) @ np.exp(self.params["log_w_prior_diag"])

    def gradients(self, X):
        if "log_w_prior_diag" in self.fixed:
            return
        Xs = self._take(X)
        w = np.exp(self.params["log_w_prior_diag"])
        for j in range(self.d):
            yield w[j] * np.outer(Xs[:, j], Xs[:, j])

    def contract_gradients(self, X, W):
        if "log_w_prior_diag" in self.fixed:
            return np.zeros(0)
        Xs = self._take(X)
        return np.exp(self.params["log_w_prior_diag"]) * np.sum(Xs * (W @ Xs), axis=0)


class _Composite(Kernel):
    def __init__(self, children):
        children = list(children)
        if not children:
            raise InvalidInputError(f"{self.kind} needs at least one child")
        flat = []
        for c in children:
            # flatten nested nodes of the same kind
            flat.extend(c.children if type(c) is type(self) else [c])
        self.children = flat

    def leaves(self):
        return [leaf for c in self.children for leaf in c.leaves()]

    def to_dict(self):
        return {"kind": self.kind, "children": [c.to_dict() for c in self.children]}

    def __repr__(self):
        return f"{type(self).__name__}({self.children!r})"


class Sum(_Composite):
    kind = "sum"

    def __call__(self, X, Z=None):
        return sum(c(X, Z) for c in self.children)

    def diag(self, X):
        return sum(c.diag(X) for c in self.children)

    def gradients(self, X):
        for c in self.children:
            yield from c.gradients(X)

    def contract_gradients(self, X, W):
        return np.concatenate([c.contract_gradients(X, W) for c in self.children])


class Product(_Composite):
    kind = "product"

    def __call__(self, X, Z=None):
        out = self.children[0](X, Z)
        for c in self.children[1:]:
            out = out * c(X, Z)
        return out

    def diag(self, X):
        out = self.children[0].diag(X)
        for c in self.children[1:]:
            out = out * c.diag(X)
        return out

    def gradients(self, X):
        grams = [c(X) for c in self.children]
        for j, c in enumerate(self.children):
            if c.n_theta == 0:
                continue
            rest = None
            for i, g in enumerate(grams):
                if i != j:
                    rest = g if rest is None else rest * g
            for dk in c.gradients(X):
                yield dk if rest is None else rest * dk

    def contract_gradients(self, X, W):
        # d(prod)/d(child) = rest * d(child), so child j sees weights W * rest
        grams = [c(X) for c in self.children]
        parts = []
        for j, c in enumerate(self.children):
            if c.n_theta == 0:
                continue
            A = W
            for i, g in enumerate(grams):
                if i != j:
                    A = A * g
            parts.append(c.contract_gradients(X, A))
        return np.concatenate(parts) if parts else np.zeros(0)


_KINDS = {cls.kind: cls for cls in (RBF, Poly, MPK, LinearPP, Sum, Product)}


def kernel_from_dict(doc: dict) -> Kernel:
    try:
        kind = doc["kind"]
        cls = _KINDS[kind]
    except KeyError as exc:
        raise InvalidInputError(f"unknown kernel document {doc!r}") from exc
    if issubclass(cls, _Composite):
        return cls([kernel_from_dict(c) for c in doc["children"]])
    kwargs = dict(doc.get("params", {}))
    if "degree" in doc:
        kwargs["degree"] = doc["degree"]
    return cls(doc["dims"], fixed=doc.get("fixed", ()), **kwargs)


def kernel_from_json(text: str) -> Kernel:
    return kernel_from_dict(json.loads(text))


def kernel_gradient(kernel: Kernel, X) -> np.ndarray:
    """All Gram derivatives stacked: shape ``(n_theta, N, N)``."""
    X = np.asarray(X, dtype=float)
    grads = list(kernel.gradients(X))
    if not grads:
        return np.zeros((0, X.shape[0], X.shape[0]))
    return np.stack(grads)


def gip_kernel(joint_types) -> Product:
    """Geometrically inspired polynomial kernel on the augmented input.

    One degree-2 MPK on ``(cos q_b, sin q_b)`` per revolute joint, one
    degree-2 MPK on ``q_b`` per prismatic joint and a degree-1 MPK on
    ``[ddq, dq_v]``, all multiplied together.
    """
    layout = AugmentedLayout(parse_joint_types(joint_types))
    children = [MPK(layout.cs_pair(b), degree=2) for b in range(layout.n_r)]
    children += [MPK([layout.prism.start + b], degree=2) for b in range(layout.n_p)]
    children.append(MPK(layout.av_columns(), degree=1))
    return Product(children)


def semiparametric_kernel(raw_dim: int, n_params: int) -> Sum:
    """RBF on the raw state plus a linear regressor kernel.

    Expects inputs laid out as ``[q, dq, ddq, phi_i]``: the first
    ``raw_dim`` columns feed the RBF and the next ``n_params`` the
    regressor kernel.
    """
    return Sum([
        LinearPP(list(range(raw_dim, raw_dim + n_params))),
        RBF(list(range(raw_dim))),
    ])
