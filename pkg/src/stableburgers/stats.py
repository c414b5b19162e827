"""Small estimation helpers shared by the Monte Carlo modules."""

from __future__ import annotations

import numpy as np

Z95 = 1.959963984540054

__all__ = ["Z95", "wilson_interval", "wilson_half_width", "linear_fit", "weighted_linear_fit"]


def wilson_interval(successes, n, z: float = Z95):
    """Wilson score interval for a binomial proportion (vectorised)."""
    k = np.asarray(successes, dtype=float)
    n = np.asarray(n, dtype=float)
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return centre - half, centre + half


def wilson_half_width(successes, n, z: float = Z95):
    lo, hi = wilson_interval(successes, n, z)
    return (hi - lo) / 2.0


def linear_fit(x, y):
    """Ordinary least squares ``y = a + b x``; returns ``(b, stderr_b, a)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points for a slope with standard error")
    xm = x.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise ValueError("abscissae are all equal")
    b = np.sum((x - xm) * (y - y.mean())) / sxx
    a = y.mean() - b * xm
    resid = y - a - b * x
    s2 = np.sum(resid**2) / (x.size - 2)
    return float(b), float(np.sqrt(s2 / sxx)), float(a)


def weighted_linear_fit(x, y, w):
    """Weighted least squares with weights ``w`` = inverse variances.

    The standard error uses the known variances, inflated by the reduced
    chi-square when the scatter exceeds them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points for a weighted slope")
    design = np.column_stack([np.ones_like(x), x])
    info = design.T @ (w[:, None] * design)
    cov = np.linalg.inv(info)
    coef = cov @ design.T @ (w * y)
    resid = y - design @ coef
    chi2 = float(np.sum(w * resid**2) / (x.size - 2))
    se = float(np.sqrt(cov[1, 1] * max(1.0, chi2)))
    return float(coef[1]), se, float(coef[0])
