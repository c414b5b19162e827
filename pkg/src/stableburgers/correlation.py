"""Correlation inequalities for product measures with monotone conditioning.

Exhaustive checks of Holley's criterion ``h(x)h(y) >= h(x v y)h(x ^ y)`` on
small product lattices, and Monte Carlo covariance reports for increasing and
decreasing path events under the discretised (conditioned) stable law.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .montecarlo import record_checkpoints, uniform_grid
from .rng import as_generator, as_stream
from .stable import StableParams
from .stats import Z95

__all__ = [
    "LatticeConfig",
    "CovarianceReport",
    "PathView",
    "holley_check",
    "lattice_covariance",
    "lattice_covariance_mc",
    "fkg_empirical",
    "b_event",
    "c_event",
    "MAX_HOLLEY_CONFIGS",
]

MAX_HOLLEY_CONFIGS = 4096


@dataclass(frozen=True)
class LatticeConfig:
    """Product law on ``{0..n_levels-1}**n_coords``.

    ``density`` has shape ``(n_levels,)`` (shared) or ``(n_coords, n_levels)``;
    ``levels`` are the ordered values attached to the indices.
    """

    n_coords: int
    n_levels: int
    density: np.ndarray
    levels: np.ndarray | None = None

    def __post_init__(self):
        g = np.asarray(self.density, dtype=float)
        if g.ndim == 1:
            g = np.tile(g, (self.n_coords, 1))
        if g.shape != (self.n_coords, self.n_levels):
            raise ValueError("density must have shape (n_levels,) or (n_coords, n_levels)")
        if np.any(g <= 0) or not np.allclose(g.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("weights must be positive and sum to 1 per coordinate")
        object.__setattr__(self, "density", g)
        lv = np.arange(self.n_levels, dtype=float) if self.levels is None else np.asarray(self.levels, float)
        if lv.shape != (self.n_levels,) or np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be strictly increasing, one per level")
        object.__setattr__(self, "levels", lv)

    @property
    def size(self) -> int:
        return self.n_levels**self.n_coords

    def configurations(self) -> np.ndarray:
        """All level-index tuples, shape ``(size, n_coords)``, in mixed-radix order."""
        grids = np.indices((self.n_levels,) * self.n_coords).reshape(self.n_coords, -1)
        return grids.T.copy()

    def probabilities(self, configs: np.ndarray | None = None) -> np.ndarray:
        c = self.configurations() if configs is None else configs
        cols = np.arange(self.n_coords)
        return np.prod(self.density[cols, c], axis=1)

    def values(self, configs: np.ndarray) -> np.ndarray:
        return self.levels[configs]

    def index(self, configs: np.ndarray) -> np.ndarray:
        radix = self.n_levels ** np.arange(self.n_coords - 1, -1, -1)
        return configs @ radix


def _event_mask(event, values) -> np.ndarray:
    out = np.asarray(event(values))
    if out.shape != (values.shape[0],):
        out = np.array([bool(event(v)) for v in values])
    return out.astype(bool)


def holley_check(config: LatticeConfig, decreasing_event: Callable, *, rtol: float = 1e-12,
                 return_witness: bool = False, block: int = 256):
    """Exhaustive pairwise check of Holley's criterion for ``h = 1_B f / P[B]``.

    ``decreasing_event`` maps an array of configuration values (one row per
    configuration) to a boolean mask.  Returns True when every pair passes;
    with ``return_witness`` returns ``(ok, (x, y))`` with the first failing
    pair of level-index tuples (or None).
    """
    if config.size > MAX_HOLLEY_CONFIGS:
        raise ValueError(
            f"exhaustive pair check limited to {MAX_HOLLEY_CONFIGS} configurations, got {config.size}"
        )
    configs = config.configurations()
    f = config.probabilities(configs)
    inside = _event_mask(decreasing_event, config.values(configs))
    pb = float(f[inside].sum())
    if pb == 0:
        raise ValueError("conditioning event has zero probability")
    h = np.where(inside, f / pb, 0.0)
    radix = config.n_levels ** np.arange(config.n_coords - 1, -1, -1)
    for s in range(0, configs.shape[0], block):
        x = configs[s:s + block, None, :]
        y = configs[None, :, :]
        hi = np.maximum(x, y) @ radix
        lo = np.minimum(x, y) @ radix
        lhs = h[s:s + block, None] * h[None, :]
        rhs = h[hi] * h[lo]
        bad = lhs < rhs * (1 - rtol)
        if bad.any():
            if not return_witness:
                return False
            i, j = np.argwhere(bad)[0]
            return False, (tuple(configs[s + i]), tuple(configs[j]))
    return (True, None) if return_witness else True


def lattice_covariance(config: LatticeConfig, condition, event_c, event_d) -> float:
    """Exact ``P_B[C n D] - P_B[C] P_B[D]`` by enumeration."""
    configs = config.configurations()
    vals = config.values(configs)
    f = config.probabilities(configs)
    b = _event_mask(condition, vals) if condition is not None else np.ones(f.size, bool)
    pb = f[b].sum()
    if pb == 0:
        raise ValueError("conditioning event has zero probability")
    w = np.where(b, f / pb, 0.0)
    c = _event_mask(event_c, vals)
    d = _event_mask(event_d, vals)
    return float(w[c & d].sum() - w[c].sum() * w[d].sum())


@dataclass(frozen=True)
class CovarianceReport:
    """Signed covariance with a 95% half-width, and whether it is compatible with ``expected_sign``."""

    covariance: float
    half_width: float
    p_c: float
    p_d: float
    p_cd: float
    n_conditioned: int
    condition_rate: float
    expected_sign: int

    @property
    def consistent(self) -> bool:
        if self.expected_sign > 0:
            return self.covariance + self.half_width >= 0
        if self.expected_sign < 0:
            return self.covariance - self.half_width <= 0
        return True

    def to_dict(self) -> dict:
        return {
            "covariance": self.covariance,
            "half_width": self.half_width,
            "p_c": self.p_c,
            "p_d": self.p_d,
            "p_cd": self.p_cd,
            "n_conditioned": self.n_conditioned,
            "condition_rate": self.condition_rate,
            "expected_sign": self.expected_sign,
            "consistent": self.consistent,
        }


def _covariance_report(c: np.ndarray, d: np.ndarray, rate: float, expected_sign: int) -> CovarianceReport:
    n = c.size
    c = c.astype(float)
    d = d.astype(float)
    pc, pd, pcd = c.mean(), d.mean(), (c * d).mean()
    cov = pcd - pc * pd
    infl = (c - pc) * (d - pd) - cov
    se = float(np.sqrt(np.mean(infl**2) / n))
    return CovarianceReport(float(cov), Z95 * se, float(pc), float(pd), float(pcd), n, rate, expected_sign)


def lattice_covariance_mc(config: LatticeConfig, condition, event_c, event_d, n: int, rng, *,
                          expected_sign: int = 1) -> CovarianceReport:
    """Monte Carlo estimate of :func:`lattice_covariance` from ``n`` product draws."""
    gen = as_generator(rng)
    cum = np.cumsum(config.density, axis=1)
    u = gen.random((n, config.n_coords))
    configs = np.stack([np.searchsorted(cum[i], u[:, i], side="right") for i in range(config.n_coords)], axis=1)
    configs = np.minimum(configs, config.n_levels - 1)
    vals = config.values(configs)
    b = _event_mask(condition, vals) if condition is not None else np.ones(n, bool)
    if not b.any():
        raise ValueError("no draws satisfied the conditioning event")
    return _covariance_report(_event_mask(event_c, vals[b]), _event_mask(event_d, vals[b]),
                              float(b.mean()), expected_sign)


class PathView:
    """Checkpoint values of simulated paths, addressed by time."""

    def __init__(self, times, record):
        self._pos = {float(t): i for i, t in enumerate(times)}
        self._rec = record

    def _col(self, key, t):
        try:
            return self._rec[key][:, self._pos[float(t)]]
        except KeyError:
            raise KeyError(f"time {t} is not a recorded checkpoint") from None

    def z(self, t):
        return self._col("z", t)

    def a(self, t):
        return self._col("a", t)

    def zmax(self, t):
        return self._col("zmax", t)

    def amax(self, t):
        return self._col("amax", t)

    def subset(self, mask) -> "PathView":
        view = PathView([], {k: v[mask] for k, v in self._rec.items()})
        view._pos = self._pos
        return view


def b_event(alpha: float, n: int):
    """``B_n`` as a predicate on a :class:`PathView` (needs checkpoints 2^m, m <= n)."""
    gamma = (alpha - 1.0) / alpha

    def event(v: PathView):
        ok = np.ones_like(v.a(1.0), dtype=bool)
        for m in range(n + 1):
            ok &= v.a(2.0**m) < 1 + 2.0**m + 4.0 ** (m - n * gamma)
        return ok

    return event


def c_event(alpha: float, k: int):
    """``C_k = {Z_{2^k} > -2^(k/alpha), A_{2^k} > -2^(k(1+1/alpha))}`` (increasing)."""

    def event(v: PathView):
        t = 2.0**k
        return (v.z(t) > -(2.0 ** (k / alpha))) & (v.a(t) > -(2.0 ** (k * (1 + 1 / alpha))))

    return event


def fkg_empirical(params: StableParams, n_increments: int, horizon: float, checkpoints,
                  event_c, event_d, n_reps: int, rng, *, condition=None,
                  expected_sign: int = 1, min_rate: float = 1e-2, threads: int = 1) -> CovarianceReport:
    """Covariance of two path events under the law conditioned on ``condition``.

    Paths use ``n_increments`` i.i.d. increments on ``[0, horizon]``.  Events are
    callables on a :class:`PathView` built at ``checkpoints`` (grid times).
    ``expected_sign`` is +1 for an increasing pair, -1 for an
    increasing/decreasing pair.
    """
    dt = horizon / n_increments
    times = uniform_grid(horizon, dt)
    cps = [int(round(t / dt)) for t in checkpoints]
    if any(abs(c * dt - t) > 1e-9 * max(1.0, t) for c, t in zip(cps, checkpoints)):
        raise ValueError("checkpoints must be multiples of horizon / n_increments")
    rec = record_checkpoints(params, times, cps, as_stream(rng), n_reps, threads=threads)
    view = PathView(checkpoints, rec)
    b = np.ones(n_reps, bool) if condition is None else np.asarray(condition(view), bool)
    rate = float(b.mean())
    if rate < min_rate:
        raise ValueError(f"conditioning event too rare: measured rate {rate:.3g} < {min_rate}")
    sub = view.subset(b)
    return _covariance_report(np.asarray(event_c(sub), bool), np.asarray(event_d(sub), bool),
                              rate, expected_sign)
