"""Strictly stable laws, Levy paths and their integrals on uniform grids.

The law of ``Z_1`` is fixed by its Levy-Khintchine exponent

    Psi(lam) = scale * |lam|**alpha * (1 - 1j*beta*sign(lam)*tan(pi*alpha/2)),

i.e. ``E[exp(1j*lam*Z_1)] = exp(-Psi(lam))``.  Draws come from the
Chambers-Mallows-Stuck transform, rescaled so that the characteristic function
matches ``Psi`` exactly (``scale`` plays the role of ``sigma**alpha``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

__all__ = [
    "StableParams",
    "GridPath",
    "TwoSidedPath",
    "positivity_parameter",
    "characteristic_exponent",
    "integral_exponent",
    "sample_stable",
    "stable_from_uniforms",
    "sample_path",
    "sample_paths",
    "integrate_path",
    "integrate_values",
    "two_sided_data",
    "add_drift",
]


@dataclass(frozen=True)
class StableParams:
    """Index ``alpha`` in (0, 2], skewness ``beta`` in [-1, 1], ``scale`` > 0."""

    alpha: float
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        a, b, s = self.alpha, self.beta, self.scale
        if not (math.isfinite(a) and 0.0 < a <= 2.0):
            raise ValueError(f"alpha must satisfy alpha ∈ (0,2], got {a!r}")
        if not (math.isfinite(b) and -1.0 <= b <= 1.0):
            raise ValueError(f"beta must satisfy beta ∈ [-1,1], got {b!r}")
        if not (math.isfinite(s) and s > 0.0):
            raise ValueError(f"scale must be positive, got {s!r}")
        if a == 1.0 and b != 0.0:
            raise ValueError(
                "alpha = 1 with beta != 0 is excluded: the exponent "
                "has a tan(pi/2) singularity there (asymmetric Cauchy)"
            )

    @property
    def rho(self) -> float:
        return positivity_parameter(self)

    @property
    def sigma(self) -> float:
        """Classical scale ``sigma = scale**(1/alpha)``."""
        return self.scale ** (1.0 / self.alpha)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "scale": self.scale}


def positivity_parameter(params: StableParams) -> float:
    """``rho = P[Z_1 > 0]``.

    Completely asymmetric cases return the exact boundary values
    (``1/alpha`` and ``1 - 1/alpha`` when ``alpha > 1``; 0 or 1 for
    subordinators when ``alpha < 1``).
    """
    a, b = params.alpha, params.beta
    if a == 2.0 or b == 0.0:
        return 0.5
    if abs(b) == 1.0:
        if a > 1.0:
            return 1.0 / a if b < 0 else 1.0 - 1.0 / a
        if a < 1.0:
            return 1.0 if b > 0 else 0.0
    return 0.5 + math.atan(b * math.tan(math.pi * a / 2.0)) / (math.pi * a)


def characteristic_exponent(params: StableParams, lam):
    """``Psi(lam) = -log E[exp(i lam Z_1)]``."""
    lam = np.asarray(lam, dtype=float)
    a, b = params.alpha, params.beta
    tilt = 0.0 if a == 2.0 else b * math.tan(math.pi * a / 2.0)
    return params.scale * np.abs(lam) ** a * (1.0 - 1j * tilt * np.sign(lam))


def integral_exponent(params: StableParams, lam):
    """Exponent of ``A_1 = int_0^1 Z_s ds``: same shape, scale divided by ``alpha + 1``."""
    return characteristic_exponent(params, lam) / (params.alpha + 1.0)


def stable_from_uniforms(alpha: float, beta: float, u: np.ndarray) -> np.ndarray:
    """Map uniform pairs ``u[..., 0:2]`` in [0, 1) to unit-scale stable draws.

    Uses ``V = pi*(u0 - 1/2)`` and ``W = -log(1 - u1)``.  The result has
    exponent ``|lam|**alpha * (1 - i beta sign(lam) tan(pi alpha / 2))``.
    """
    u = np.asarray(u, dtype=float)
    v = np.pi * (u[..., 0] - 0.5)
    w = -np.log1p(-u[..., 1])
    if alpha == 1.0:
        return np.tan(v)
    if alpha == 2.0:
        return 2.0 * np.sin(v) * np.sqrt(w)
    t = math.tan(math.pi * alpha / 2.0)
    shift = math.atan(beta * t) / alpha
    # CMS gives sigma = 1 in the (1 + beta^2 tan^2)^(1/2alpha)-rescaled form; undo it
    rescale = (1.0 + beta * beta * t * t) ** (1.0 / (2.0 * alpha))
    av = alpha * (v + shift)
    with np.errstate(divide="ignore", over="ignore"):
        out = (
            rescale
            * np.sin(av)
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - av) / w) ** ((1.0 - alpha) / alpha)
        )
    return out


def sample_stable(params: StableParams, rng, size=None):
    """Draw from the law with exponent ``Psi``; scalar when ``size`` is None."""
    gen = as_generator(rng)
    shape = () if size is None else tuple(np.atleast_1d(size))
    u = gen.random(shape + (2,))
    out = params.sigma * stable_from_uniforms(params.alpha, params.beta, u)
    return float(out) if size is None else out


@dataclass(frozen=True)
class GridPath:
    """Path sampled at ``t0 + k*dt``, treated as constant on each cell."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a GridPath needs at least two values")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridPath values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)


@dataclass(frozen=True)
class TwoSidedPath:
    """Initial data ``X_x = Z_x`` for x >= 0 and ``-Z'_{-x}`` for x <= 0."""

    negative: GridPath
    positive: GridPath

    def __post_init__(self):
        neg, pos = self.negative, self.positive
        if not math.isclose(neg.dt, pos.dt, rel_tol=1e-12):
            raise ValueError("both branches must share dt")
        if not math.isclose(neg.t_end, 0.0, abs_tol=1e-9 * neg.dt) or pos.t0 != 0.0:
            raise ValueError("branches must meet at x = 0")
        if neg.values[-1] != 0.0 or pos.values[0] != 0.0:
            raise ValueError("X_0 must be 0 on both branches")

    @property
    def dt(self) -> float:
        return self.positive.dt

    @property
    def x(self) -> np.ndarray:
        m = self.negative.n - 1
        return self.dt * np.arange(-m, self.positive.n)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.negative.values, self.positive.values[1:]])

    @property
    def origin(self) -> int:
        """Index of x = 0 in :attr:`x`."""
        return self.negative.n - 1


def sample_paths(params: StableParams, horizon: float, n_steps: int, n_paths: int, rng):
    """Matrix of ``n_paths`` independent paths, shape ``(n_paths, n_steps + 1)``."""
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    gen = as_generator(rng)
    dt = horizon / n_steps
    inc = sample_stable(params, gen, size=(n_paths, n_steps)) * dt ** (1.0 / params.alpha)
    out = np.zeros((n_paths, n_steps + 1))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def sample_path(params: StableParams, horizon: float, n_steps: int, rng) -> GridPath:
    """One path on ``[0, horizon]`` with ``n_steps`` i.i.d. stable increments."""
    values = sample_paths(params, horizon, n_steps, 1, rng)[0]
    return GridPath(0.0, horizon / n_steps, values)


def integrate_values(values: np.ndarray, dt, axis: int = -1) -> np.ndarray:
    """Left-endpoint cumulative integral; first entry 0.

    ``dt`` may be a scalar or per-cell widths (length ``n - 1`` along ``axis``).
    """
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    out = np.zeros_like(values)
    np.cumsum(values[..., :-1] * dt, axis=-1, out=out[..., 1:])
    return np.moveaxis(out, -1, axis)


def integrate_path(path: GridPath) -> GridPath:
    return GridPath(path.t0, path.dt, integrate_values(path.values, path.dt))


def two_sided_data(params: StableParams, L: float, n_steps: int, rng) -> TwoSidedPath:
    """Two independent branches with ``n_steps`` cells each on ``[-L, 0]`` and ``[0, L]``."""
    gen = as_generator(rng)
    z = sample_paths(params, L, n_steps, 2, gen)
    dt = L / n_steps
    positive = GridPath(0.0, dt, z[0])
    negative = GridPath(-L, dt, -z[1][::-1])
    return TwoSidedPath(negative, positive)


def add_drift(path: GridPath, c: float) -> GridPath:
    """Shift values by ``c * (t - t0)``."""
    if c == 0:
        return path
    return GridPath(path.t0, path.dt, path.values + c * (path.times - path.t0))
