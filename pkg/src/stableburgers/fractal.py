"""Dimension estimates for Lagrangian regular points.

Two routes: dyadic box counting on one realisation, and the decay exponent of
the probability that the regular set comes within ``delta`` of the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .hopf_cole import build_potential, convex_minorant, regular_points
from .montecarlo import map_replicas
from .rng import as_generator, as_stream
from .stable import GridPath, StableParams, TwoSidedPath, two_sided_data
from .stats import weighted_linear_fit, wilson_half_width

__all__ = [
    "BoxCountCurve",
    "HittingCurve",
    "DimensionFit",
    "box_count",
    "fit_dimension",
    "default_fit_range",
    "regular_point_instance",
    "box_dimension",
    "hitting_exponent",
    "zero_data",
]

MIN_HITS = 30


@dataclass(frozen=True)
class BoxCountCurve:
    """``counts[k]`` boxes of side ``scales[k] = width * 2**-k`` are occupied."""

    scales: np.ndarray
    counts: np.ndarray
    window: tuple[float, float]

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.scales.size)


class DimensionFit(NamedTuple):
    slope: float
    stderr: float
    degenerate: bool = False


@dataclass(frozen=True)
class HittingCurve:
    deltas: np.ndarray
    probabilities: np.ndarray
    half_widths: np.ndarray
    hits: np.ndarray
    n_reps: int
    used: np.ndarray


def box_count(points, window, n_scales: int) -> BoxCountCurve:
    pts = np.sort(np.asarray(points, dtype=float))
    lo, hi = (float(window[0]), float(window[1]))
    if pts.size == 0:
        raise ValueError("box dimension is undefined for an empty point set")
    if n_scales < 3:
        raise ValueError("n_scales must be at least 3")
    if not hi > lo:
        raise ValueError("window must have positive length")
    if pts[0] < lo or pts[-1] > hi:
        raise ValueError("points must lie inside the window")
    width = hi - lo
    scales = width * 2.0 ** -np.arange(n_scales)
    rel = (pts - lo) / width
    counts = np.empty(n_scales, dtype=np.int64)
    for k in range(n_scales):
        # closed right edge: a point at hi belongs to the last box
        box = np.minimum(np.floor(rel * 2**k), 2**k - 1).astype(np.int64)
        counts[k] = np.count_nonzero(np.diff(box)) + 1
    return BoxCountCurve(scales, counts, (lo, hi))


def default_fit_range(curve: BoxCountCurve, *, drop_coarse: int = 2, min_count: int = 10):
    """Scale indices kept for the fit: skip the coarsest levels and sparse counts."""
    ok = (curve.k >= drop_coarse) & (curve.counts >= min_count)
    ks = np.flatnonzero(ok)
    if ks.size == 0:
        return None
    return int(ks[0]), int(ks[-1])


def fit_dimension(curve: BoxCountCurve, k_min: int | None = None, k_max: int | None = None) -> DimensionFit:
    """Least-squares slope of ``log N`` against ``log(1/eps)`` on ``k_min..k_max``."""
    if k_min is None or k_max is None:
        auto = default_fit_range(curve)
        if auto is None:
            return DimensionFit(0.0, float("nan"), True)
        k_min = auto[0] if k_min is None else k_min
        k_max = auto[1] if k_max is None else k_max
        if k_max - k_min < 2:
            return DimensionFit(float("nan"), float("nan"), True)  # too few informative scales
    if k_max - k_min < 2:
        if np.all(curve.counts[k_min:k_max + 1] == curve.counts[k_min]):
            return DimensionFit(0.0, float("nan"), True)
        raise ValueError("fit range must span at least three scales")
    sel = slice(k_min, k_max + 1)
    counts = curve.counts[sel]
    if np.all(counts == counts[0]):
        return DimensionFit(0.0, 0.0, True)
    x = np.log(1.0 / curve.scales[sel])
    y = np.log(counts)
    xm = x.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - y.mean())) / sxx)
    resid = y - y.mean() - slope * (x - xm)
    stderr = float(np.sqrt(np.sum(resid**2) / (x.size - 2) / sxx))
    return DimensionFit(slope, stderr, False)


def zero_data(L: float, n_cells: int) -> TwoSidedPath:
    """Initial data ``X = 0`` on ``[-L, L]`` (every point stays regular)."""
    dt = L / n_cells
    z = np.zeros(n_cells + 1)
    return TwoSidedPath(GridPath(-L, dt, z), GridPath(0.0, dt, z))


def regular_point_instance(params: StableParams, L: float, n_cells: int, rng, *,
                           margin: float | None = None, jump_factor: float = 10.0,
                           debug_zero: bool = False):
    """Sample data on ``[-L, L]`` (``n_cells`` per side) and return its regular points at t = 1."""
    data = zero_data(L, n_cells) if debug_zero else two_sided_data(params, L, n_cells, as_generator(rng))
    pot = build_potential(data, 1.0)
    hull = convex_minorant(pot)
    return regular_points(pot, hull, data, margin=margin, jump_factor=jump_factor), data.dt


def box_dimension(params: StableParams, L: float, n_cells: int, rng, *,
                  margin: float | None = None, use: str = "contact",
                  debug_zero: bool = False):
    """Box dimension of one realisation of the regular set.

    ``use`` selects ``"contact"`` (all contact points), ``"unflagged"``
    (jump-flagged points removed) or ``"tangent"``.  The finest box is the
    smallest dyadic scale not below the grid step.  A window holding no
    regular point (one shock funnel covers it) gives a degenerate fit with
    all-zero counts.
    """
    rps, dt = regular_point_instance(params, L, n_cells, rng, margin=margin, debug_zero=debug_zero)
    pts = {"contact": rps.points, "unflagged": rps.unflagged, "tangent": rps.tangent_points}[use]
    lo, hi = rps.window
    n_scales = max(3, int(np.floor(np.log2((hi - lo) / dt))) + 1)
    if pts.size == 0:
        empty = BoxCountCurve((hi - lo) * 2.0 ** -np.arange(n_scales), np.zeros(n_scales, np.int64), (lo, hi))
        return DimensionFit(float("nan"), float("nan"), True), empty
    curve = box_count(pts, (lo, hi), n_scales)
    return fit_dimension(curve), curve


def hitting_exponent(params: StableParams, deltas, n_reps: int, window: float, rng, *,
                     n_cells: int = 2**13, threads: int = 1, debug_zero: bool = False,
                     chunk: int = 50):
    """Decay of ``P[tangent regular points meet (-delta, delta)]`` as ``delta -> 0``.

    ``window`` is the half-width ``L`` of the simulation window ``[-L, L]``.
    Returns ``(curve, kappa_hat, kappa_stderr)``; ``1 - kappa_hat`` is the
    implied dimension bound.  Deltas with fewer than 30 hits are left out of
    the fit and marked in ``curve.used``.
    """
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    if deltas.size == 0 or deltas[0] >= window / 4 + 1e-12 or deltas[-1] <= 0:
        raise ValueError("deltas must lie in (0, window/4]")
    stream = as_stream(rng)

    def chunk_fn(s, e):
        out = np.empty(e - s)
        for i, r in enumerate(range(s, e)):
            rps, _ = regular_point_instance(params, window, n_cells, stream.replica(r),
                                            margin=0.0, debug_zero=debug_zero)
            pts = rps.tangent_points
            out[i] = np.abs(pts).min() if pts.size else np.inf
        return out

    dist = map_replicas(chunk_fn, n_reps, chunk=chunk, threads=threads)
    hits = np.array([(dist < d).sum() for d in deltas])
    p = hits / n_reps
    hw = wilson_half_width(hits, n_reps)
    used = (hits >= MIN_HITS) & (hits < n_reps)
    curve = HittingCurve(deltas, p, hw, hits, n_reps, used)
    if used.sum() < 3:
        return curve, float("nan"), float("nan")
    pu = p[used]
    w = n_reps * pu / (1 - pu)
    slope, se, _ = weighted_linear_fit(np.log(deltas[used]), np.log(pu), w)
    return curve, slope, se
