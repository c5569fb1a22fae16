"""State observables: weighted mean, weighted dispersion, variation, and the pinning jump."""

from __future__ import annotations

import numpy as np


def weighted_mean(x, xi) -> float:
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x.shape != xi.shape:
        raise ValueError("state and weight vectors differ in length")
    return float(xi @ x)


def lyapunov_V(x, xi) -> float:
    """Weighted dispersion ``sum(xi * (x - xbar)**2)``."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    xbar = weighted_mean(x, xi)
    return float(xi @ (x - xbar) ** 2)


def impulse_jump(x, r: int, b: float, s: float) -> np.ndarray:
    y = np.array(x, dtype=float, copy=True)
    y[r] = y[r] + b * (s - y[r])
    return y


def variation_metric(x, s: float = 0.0) -> float:
    """Total absolute deviation from the target, ``sum(|x_i - s|)``."""
    return float(np.abs(np.asarray(x, dtype=float) - s).sum())
