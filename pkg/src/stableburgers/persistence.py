"""First-passage, persistence and lower-tail probabilities by Monte Carlo.

``T = inf{t : A_t = level}`` for the integral ``A`` of a stable path ``Z`` and
``S = inf{t : Z_t > level}``.  Because ``A`` is piecewise linear on the grid
(its slope on a cell is the cell value of ``Z``) crossings of ``A`` are located
exactly inside the cell; crossings of ``Z`` are read off at grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .montecarlo import dyadic_grid, map_replicas, replica_generators, uniform_grid, walk_paths
from .rng import SplitStream, as_stream
from .stable import GridPath, StableParams
from .stats import weighted_linear_fit, wilson_half_width, wilson_interval

__all__ = [
    "FirstPassageSample",
    "SurvivalCurve",
    "ExponentFit",
    "LowerTailSpec",
    "DyadicEventSpec",
    "TailCurve",
    "passage_time_from_path",
    "passage_times",
    "passage_times_coupled",
    "first_passage",
    "ruin_time",
    "survival_curve",
    "survival_from_times",
    "fit_exponent",
    "lower_tail_probability",
    "dyadic_event_probability",
    "dyadic_decay_rate",
    "fit_decay",
    "drifted_lower_tail",
    "MIN_ALIVE",
]

MIN_ALIVE = 30


@dataclass(frozen=True)
class FirstPassageSample:
    """Passage time, or ``censored`` with ``time = inf`` if none before ``horizon``."""

    time: float
    horizon: float
    dt_used: float

    @property
    def censored(self) -> bool:
        return not math.isfinite(self.time)


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    survival: np.ndarray
    half_widths: np.ndarray
    n_reps: int
    n_alive: np.ndarray
    n_censored: int = 0
    horizon: float = float("nan")
    dt: float = float("nan")


class ExponentFit(NamedTuple):
    theta: float
    stderr: float
    n_points: int


@dataclass(frozen=True)
class LowerTailSpec:
    """Barrier ``c0 + c1*s + c2*s**2`` on ``[0, t_max]``.

    :meth:`standard` builds ``1 + s + t_max**-gamma * s**2`` with
    ``gamma = (alpha - 1)/alpha``; :meth:`rescaled` is the same event after
    mapping ``[0, t_max]`` onto ``[0, 1]``.
    """

    alpha: float
    t_max: float
    c0: float = 1.0
    c1: float = 1.0
    c2: float = field(default=float("nan"))

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if math.isnan(self.c2):
            object.__setattr__(self, "c2", self.t_max ** -self.alpha_gamma)

    @property
    def alpha_gamma(self) -> float:
        return (self.alpha - 1.0) / self.alpha

    def barrier(self, s):
        s = np.asarray(s, dtype=float)
        return self.c0 + self.c1 * s + self.c2 * s * s

    @classmethod
    def standard(cls, alpha: float, t_max: float) -> "LowerTailSpec":
        return cls(alpha, t_max)

    @classmethod
    def rescaled(cls, alpha: float, t: float) -> "LowerTailSpec":
        eps = t ** (-(alpha + 1.0) / alpha)
        return cls(alpha, 1.0, eps, eps ** (1.0 / (alpha + 1.0)), 1.0)


@dataclass(frozen=True)
class DyadicEventSpec:
    """``kind`` is ``"A"`` (checkpoints 2^m, m <= 2n), ``"B"`` (m <= n) or ``"C"`` (level k = n)."""

    n: int
    kind: str = "B"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.kind not in ("A", "B", "C"):
            raise ValueError(f"unknown dyadic event kind {self.kind!r}")


@dataclass(frozen=True)
class TailCurve:
    eps: np.ndarray
    probabilities: np.ndarray
    half_widths: np.ndarray
    hits: np.ndarray
    n_reps: int
    exponent: float
    stderr: float


# ---------------------------------------------------------------- passage times

def passage_time_from_path(path: GridPath, level: float = 1.0, *, integrated: bool = True) -> float:
    """Passage time read from a given path (inf if it never happens).

    ``integrated=True`` locates the first time the integral reaches ``level``
    (linear inside the cell); otherwise returns the first grid time with
    ``Z > level``.
    """
    z = path.values
    t = path.times
    if not integrated:
        hit = np.flatnonzero(z > level)
        return float(t[hit[0]]) if hit.size else math.inf
    a = np.zeros(z.size)
    np.cumsum(z[:-1] * path.dt, out=a[1:])
    hit = np.flatnonzero(a >= level)
    if not hit.size:
        return math.inf
    k = hit[0] - 1
    if k < 0:
        return float(t[0])
    return float(t[k] + (level - a[k]) / z[k])


def _passage_chunk(params, times, gens, kind, level, drift=0.0, frozen=None):
    m = gens if isinstance(gens, int) else len(gens)
    out = np.full(m, np.inf)

    def visit(idx, k0, k1, zl, zr, ar):
        if kind == "path":
            hit = zr > level
        else:
            hit = ar >= level
        crossed = hit.any(axis=1)
        if crossed.any():
            j = hit[crossed].argmax(axis=1)
            rows = np.flatnonzero(crossed)
            if kind == "path":
                out[idx[rows]] = times[k0 + j + 1]
            else:
                z_cell = zl[rows, j]
                a_cell = ar[rows, j] - z_cell * (times[k0 + j + 1] - times[k0 + j])
                out[idx[rows]] = times[k0 + j] + (level - a_cell) / z_cell
        return ~crossed

    walk_paths(params, times, gens, visit, drift=drift, frozen=frozen)
    return out


def passage_times(params: StableParams, n_reps: int, rng, *, kind: str = "integral",
                  level: float = 1.0, horizon: float = 1000.0, dt: float = 0.05,
                  threads: int = 1, frozen: float | None = None) -> np.ndarray:
    """Passage times of ``n_reps`` replicas (inf when censored at ``horizon``).

    ``kind="integral"`` gives T for ``A``, ``kind="path"`` gives S for ``Z``.
    """
    if kind not in ("integral", "path"):
        raise ValueError("kind must be 'integral' or 'path'")
    if not (horizon > 0 and dt > 0):
        raise ValueError("horizon and dt must be positive")
    stream = as_stream(rng)
    times = uniform_grid(horizon, dt)

    def fn(s, e):
        gens = (e - s) if frozen is not None else replica_generators(stream, s, e)
        return _passage_chunk(params, times, gens, kind, level, frozen=frozen)

    return map_replicas(fn, n_reps, threads=threads)


def passage_times_coupled(params: StableParams, n_reps: int, rng, *, kind: str = "integral",
                          level: float = 1.0, horizon: float = 1000.0, dt: float = 0.05,
                          threads: int = 1):
    """Passage times at step ``dt`` and ``dt/2`` from the same increments.

    The coarse path is the fine path read at every other grid point (sums of
    two fine increments are exact coarse increments).  Returns
    ``(times_dt, times_half_dt)``.
    """
    stream = as_stream(rng)
    fine = uniform_grid(horizon, dt / 2.0)
    coarse = fine[::2]

    def fn(s, e):
        gens = replica_generators(stream, s, e)
        m = e - s
        t_fine = np.full(m, np.inf)
        t_coarse = np.full(m, np.inf)
        a_coarse = np.zeros(m)
        done_f = np.zeros(m, dtype=bool)
        done_c = np.zeros(m, dtype=bool)

        def visit(idx, k0, k1, zl, zr, ar):
            if kind == "path":
                hit_f = zr > level
                hit_c = zr[:, 1::2] > level
            else:
                hit_f = ar >= level
                zc = zl[:, ::2]
                ac = a_coarse[idx][:, None] + np.cumsum(zc * dt, axis=1)
                hit_c = ac >= level
            _record(t_fine, done_f, idx, hit_f, zl, ar, fine, k0, kind, level)
            _record(t_coarse, done_c, idx, hit_c, zl[:, ::2], None if kind == "path" else ac,
                    coarse, k0 // 2, kind, level)
            if kind != "path":
                a_coarse[idx] = ac[:, -1]
            return ~(done_f[idx] & done_c[idx])

        walk_paths(params, fine, gens, visit, block=2048)
        return t_coarse, t_fine

    return map_replicas(fn, n_reps, threads=threads)


def _record(out, done, idx, hit, zl, ar, times, k0, kind, level):
    fresh = hit.any(axis=1) & ~done[idx]
    if not fresh.any():
        return
    rows = np.flatnonzero(fresh)
    j = hit[rows].argmax(axis=1)
    if kind == "path":
        out[idx[rows]] = times[k0 + j + 1]
    else:
        z_cell = zl[rows, j]
        a_cell = ar[rows, j] - z_cell * (times[k0 + j + 1] - times[k0 + j])
        out[idx[rows]] = times[k0 + j] + (level - a_cell) / z_cell
    done[idx[rows]] = True


def _single(params, rng, kind, level, horizon, dt, frozen):
    if isinstance(rng, np.random.Generator):
        gens = [rng]
    else:
        gens = replica_generators(as_stream(rng), 0, 1)
    times = uniform_grid(horizon, dt)
    t = _passage_chunk(params, times, 1 if frozen is not None else gens, kind, level, frozen=frozen)
    return FirstPassageSample(float(t[0]), horizon, dt)


def first_passage(params: StableParams, level: float = 1.0, horizon: float = 1000.0,
                  dt: float = 0.05, rng=0, *, frozen: float | None = None) -> FirstPassageSample:
    """One draw of ``T``; ``frozen`` replaces ``Z`` by a constant (test hook)."""
    if not (horizon > 0 and dt > 0):
        raise ValueError("horizon and dt must be positive")
    return _single(params, rng, "integral", level, horizon, dt, frozen)


def ruin_time(params: StableParams, level: float = 1.0, horizon: float = 1000.0,
              dt: float = 0.05, rng=0, *, frozen: float | None = None) -> FirstPassageSample:
    """One draw of ``S``; jumps over ``level`` count at the grid point they land on."""
    if not (horizon > 0 and dt > 0):
        raise ValueError("horizon and dt must be positive")
    return _single(params, rng, "path", level, horizon, dt, frozen)


# ---------------------------------------------------------------- survival curves

def survival_from_times(times: np.ndarray, t_grid, *, horizon: float = float("nan"),
                        dt: float = float("nan")) -> SurvivalCurve:
    times = np.asarray(times, dtype=float)
    tg = np.asarray(t_grid, dtype=float)
    n = times.size
    srt = np.sort(times)
    alive = n - np.searchsorted(srt, tg, side="right")
    return SurvivalCurve(tg, alive / n, wilson_half_width(alive, n), n, alive,
                         int(np.count_nonzero(~np.isfinite(times))), horizon, dt)


def survival_curve(params: StableParams, t_grid, horizon: float, dt: float, n_reps: int, rng, *,
                   kind: str = "integral", level: float = 1.0, threads: int = 1) -> SurvivalCurve:
    """Empirical ``P[T > t]`` (or ``P[S > t]``) on ``t_grid`` with Wilson 95% half-widths."""
    tg = np.asarray(t_grid, dtype=float)
    if tg.size == 0 or tg.min() <= 0 or tg.max() > horizon * (1 + 1e-12):
        raise ValueError("t_grid must lie in (0, horizon]")
    times = passage_times(params, n_reps, rng, kind=kind, level=level, horizon=horizon,
                          dt=dt, threads=threads)
    return survival_from_times(times, tg, horizon=horizon, dt=dt)


def fit_exponent(curve: SurvivalCurve, t_min: float | None = None, t_max: float | None = None, *,
                 min_alive: int = MIN_ALIVE) -> ExponentFit:
    """Weighted fit of ``log P`` against ``log t``; returns ``theta = -slope``.

    Weights are inverse binomial variances of ``log P``; only points with at
    least ``min_alive`` survivors and ``0 < P < 1`` enter.
    """
    t = curve.times
    lo = -np.inf if t_min is None else t_min
    hi = np.inf if t_max is None else t_max
    p = curve.survival
    usable = (t >= lo) & (t <= hi) & (curve.n_alive >= min_alive) & (p < 1) & (p > 0)
    if usable.sum() < 3:
        raise ValueError(
            f"need >= 3 usable points with >= {min_alive} survivors; usable t: {t[usable].tolist()}"
        )
    pu = p[usable]
    w = curve.n_reps * pu / (1 - pu)
    slope, se, _ = weighted_linear_fit(np.log(t[usable]), np.log(pu), w)
    return ExponentFit(-slope, se, int(usable.sum()))


# ---------------------------------------------------------------- lower tails

def lower_tail_probability(params: StableParams, spec: LowerTailSpec, n_reps: int, rng, *,
                           dt: float | None = None, k0: int = 10, t_first: float = 1.0,
                           threads: int = 1):
    """Fraction of replicas with ``A`` strictly below the barrier at every grid point.

    The grid is uniform with step ``dt`` when given, otherwise dyadic with
    constant relative resolution ``2**-k0`` from ``t_first``.  Returns
    ``(p_hat, (lo, hi))`` with a Wilson 95% interval.
    """
    times = uniform_grid(spec.t_max, dt) if dt is not None else dyadic_grid(spec.t_max, k0, min(t_first, spec.t_max))
    bar = spec.barrier(times[1:])
    stream = as_stream(rng)

    def fn(s, e):
        ok = np.ones(e - s, dtype=bool)

        def visit(idx, k0_, k1, zl, zr, ar):
            good = np.all(ar < bar[k0_:k1], axis=1)
            ok[idx[~good]] = False
            return good

        walk_paths(params, times, replica_generators(stream, s, e), visit)
        return ok

    ok = map_replicas(fn, n_reps, threads=threads)
    k = int(ok.sum())
    lo, hi = wilson_interval(k, n_reps)
    return k / n_reps, (float(lo), float(hi))


def _checkpoint_index(times, t):
    i = int(np.searchsorted(times, t * (1 - 1e-12)))
    if i >= times.size or not math.isclose(times[i], t, rel_tol=1e-9):
        raise ValueError(f"time {t} is not a grid point")
    return i


def dyadic_event_probability(params: StableParams, spec: DyadicEventSpec, n_reps: int, rng, *,
                             k0: int = 10, threads: int = 1):
    """Estimate ``P[A_n]``, ``P[B_n]`` or ``P[C_k]`` on the dyadic grid.

    ``B_n = {A_{2^m} < 1 + 2^m + 4^(m - n*gamma), m = 0..n}`` (``A_n`` runs to
    ``m = 2n``) and ``C_k = {Z_{2^k} > -2^(k/alpha), A_{2^k} > -2^(k(1+1/alpha))}``.
    Returns ``(p_hat, (lo, hi))``.
    """
    a = params.alpha
    stream = as_stream(rng)
    n = spec.n
    if spec.kind == "C":
        horizon = 2.0**n
        times = dyadic_grid(horizon, k0, 1.0)
        z_bound = -(2.0 ** (n / a))
        a_bound = -(2.0 ** (n * (1 + 1 / a)))

        def fn(s, e):
            ok = np.zeros(e - s, dtype=bool)

            def visit(idx, k0_, k1, zl, zr, ar):
                if k1 == times.size - 1:
                    ok[idx] = (zr[:, -1] > z_bound) & (ar[:, -1] > a_bound)
                return None

            walk_paths(params, times, replica_generators(stream, s, e), visit)
            return ok
    else:
        gamma = (a - 1.0) / a
        m_max = 2 * n if spec.kind == "A" else n
        times = dyadic_grid(2.0**m_max, k0, 1.0)
        ms = np.arange(m_max + 1)
        cps = np.array([_checkpoint_index(times, 2.0**m) for m in ms])
        bound = 1.0 + 2.0**ms + 4.0 ** (ms - n * gamma)

        def fn(s, e):
            ok = np.ones(e - s, dtype=bool)

            def visit(idx, k0_, k1, zl, zr, ar):
                inside = (cps > k0_) & (cps <= k1)
                if not inside.any():
                    return None
                cols = cps[inside] - k0_ - 1
                good = np.all(ar[:, cols] < bound[inside], axis=1)
                ok[idx[~good]] = False
                return good

            walk_paths(params, times, replica_generators(stream, s, e), visit)
            return ok

    ok = map_replicas(fn, n_reps, threads=threads)
    k = int(ok.sum())
    lo, hi = wilson_interval(k, n_reps)
    return k / n_reps, (float(lo), float(hi))


def dyadic_decay_rate(params: StableParams, n_values, n_reps: int, rng, *, kind: str = "B",
                      k0: int = 10, threads: int = 1):
    """Slope of ``log P[B_n]`` against ``n`` using independent replicas per ``n``.

    Returns ``(slope, stderr, probabilities)``.
    """
    stream = as_stream(rng)
    ns = np.asarray(n_values, dtype=int)
    probs = np.array([
        dyadic_event_probability(params, DyadicEventSpec(int(n), kind), n_reps, stream.split(int(n)),
                                 k0=k0, threads=threads)[0]
        for n in ns
    ])
    slope, se = fit_decay(ns, probs, n_reps)
    return slope, se, probs


def fit_decay(n_values, probs, n_reps: int):
    """Weighted slope of ``log p`` against ``n``; levels with < 30 successes are skipped."""
    ns = np.asarray(n_values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    usable = (probs * n_reps >= MIN_ALIVE) & (probs < 1)
    if usable.sum() < 3:
        raise ValueError(f"too few levels with enough surviving replicas; usable n: {ns[usable].tolist()}")
    pu = probs[usable]
    slope, se, _ = weighted_linear_fit(ns[usable], np.log(pu), n_reps * pu / (1 - pu))
    return slope, se


def drifted_lower_tail(params: StableParams, c: float, which: str, eps_grid, n_reps: int, rng, *,
                       k0: int = 10, t_first: float | None = None, threads: int = 1) -> TailCurve:
    """``P[Z^c_t < eps, t <= 1]`` (``which="path"``) or ``P[A^c_t < eps, t <= 1]``.

    ``Z^c_t = Z_t + c t``.  The time grid is dyadic from ``t_first`` (by default
    an octave-aligned time well below the scale at which the smallest ``eps``
    is reached), so early excursions are resolved at every ``eps``.  The
    exponent is the weighted log-log slope over ``eps`` with >= 30 hits.
    """
    if params.alpha <= 1:
        raise ValueError("the drifted lower-tail estimate requires alpha > 1")
    if which not in ("path", "integral"):
        raise ValueError("which must be 'path' or 'integral'")
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size < 3 or np.any(np.diff(eps) >= 0) or eps[-1] <= 0:
        raise ValueError("eps_grid must be positive and strictly decreasing")
    a = params.alpha
    if t_first is None:
        power = a if which == "path" else a / (a + 1.0)
        t_first = 2.0 ** -(math.ceil(math.log2(1.0 / eps[-1] ** power)) + 4)
        t_first = min(t_first, 0.5)
    times = dyadic_grid(1.0, k0, t_first)
    eps_max = float(eps[0])
    stream = as_stream(rng)

    def fn(s, e):
        running = np.zeros(e - s)

        def visit(idx, k0_, k1, zl, zr, ar):
            v = zr if which == "path" else ar
            running[idx] = np.maximum(running[idx], v.max(axis=1))
            return running[idx] < eps_max

        walk_paths(params, times, replica_generators(stream, s, e), visit, drift=c)
        return running

    mx = map_replicas(fn, n_reps, threads=threads)
    hits = np.array([(mx < x).sum() for x in eps])
    p = hits / n_reps
    hw = wilson_half_width(hits, n_reps)
    use = (hits >= MIN_ALIVE) & (hits < n_reps)
    if use.sum() >= 3:
        pu = p[use]
        slope, se, _ = weighted_linear_fit(np.log(eps[use]), np.log(pu), n_reps * pu / (1 - pu))
    else:
        slope, se = float("nan"), float("nan")
    return TailCurve(eps, p, hw, hits, n_reps, slope, se)
