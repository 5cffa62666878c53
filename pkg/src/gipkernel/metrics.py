"""Error metrics and boxplot statistics."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError

__all__ = ["mse", "nmse", "gmse", "boxplot_stats"]


def _pair(y, y_hat):
    y = np.asarray(y, dtype=float)
    y_hat = np.broadcast_to(np.asarray(y_hat, dtype=float), y.shape)
    if y.shape[0] < 2:
        raise InvalidInputError("metrics need at least two samples")
    return y, y_hat


def mse(y, y_hat):
    """Mean squared error along the first axis (per column for 2-D input)."""
    y, y_hat = _pair(y, y_hat)
    return np.mean((y - y_hat) ** 2, axis=0)


def nmse(y, y_hat):
    """MSE divided by the (population) variance of the targets."""
    y, y_hat = _pair(y, y_hat)
    var = np.var(y, axis=0)
    if np.any(var <= 0):
        raise UndefinedMetricError("nMSE is undefined for constant targets")
    return mse(y, y_hat) / var


def gmse(y, y_hat) -> float:
    """Sum of per-joint MSEs for ``(N, n)`` torque tables."""
    y, y_hat = _pair(y, y_hat)
    if y.ndim != 2:
        raise InvalidInputError("gmse expects (N, n) tables")
    return float(np.sum(mse(y, y_hat)))


def boxplot_stats(values) -> dict:
    """Quartiles, Tukey whiskers (1.5 IQR) and outliers of finite values."""
    v = np.asarray(values, dtype=float)
    v = np.sort(v[np.isfinite(v)])
    if v.size == 0:
        return {"n": 0, "median": None, "q1": None, "q3": None,
                "whisker_low": None, "whisker_high": None, "outliers": []}
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo) & (v <= hi)]
    return {
        "n": int(v.size),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in v[(v < lo) | (v > hi)]],
    }
