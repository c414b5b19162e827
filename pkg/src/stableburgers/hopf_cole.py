"""Inviscid Burgers at time t through the convex minorant of the potential.

With initial velocity ``X`` the potential is ``x -> int_0^x (X_u + u/t) du``.
Its greatest convex minorant ``C`` gives the inverse Lagrangian map
``a(t, x) = max{s : C'(s) <= x/t}`` and the velocity ``u = (x - a)/t``.
Grid points where the potential touches ``C`` are the Lagrangian regular points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .montecarlo import map_replicas
from .rng import as_stream
from .stable import GridPath, TwoSidedPath, two_sided_data

__all__ = [
    "PotentialGrid",
    "HullResult",
    "RegularPointSet",
    "VelocityField",
    "build_potential",
    "convex_minorant",
    "convex_minorant_bruteforce",
    "inverse_lagrangian",
    "velocity_field",
    "regular_points",
    "tangent_condition_bruteforce",
    "velocity_samples",
    "CONTACT_RTOL",
]

CONTACT_RTOL = 1e-10


@dataclass(frozen=True)
class PotentialGrid:
    grid: GridPath
    t: float
    data: np.ndarray
    origin: int

    @property
    def x(self) -> np.ndarray:
        return self.grid.times

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    @property
    def slopes(self) -> np.ndarray:
        """Integrand ``X_x + x/t`` at every grid point (right slope of the potential)."""
        return self.data + self.x / self.t


@dataclass(frozen=True)
class HullResult:
    x: np.ndarray
    minorant: np.ndarray
    right_derivative: np.ndarray
    contact: np.ndarray
    vertices: np.ndarray

    @property
    def contact_mask(self) -> np.ndarray:
        mask = np.zeros(self.x.size, dtype=bool)
        mask[self.contact] = True
        return mask


@dataclass(frozen=True)
class RegularPointSet:
    """Contact points of the hull away from the window edges.

    ``jump_flag`` marks a detected positive jump of the data at the point;
    ``tangent`` marks points where the line of slope ``X_a + a/t`` through the
    potential supports it everywhere (the chord inequality).
    """

    points: np.ndarray
    indices: np.ndarray
    jump_flag: np.ndarray
    tangent: np.ndarray
    jump_threshold: float
    window: tuple[float, float]

    @property
    def unflagged(self) -> np.ndarray:
        return self.points[~self.jump_flag]

    @property
    def tangent_points(self) -> np.ndarray:
        return self.points[self.tangent]

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class VelocityField:
    x_grid: np.ndarray
    a_of_x: np.ndarray
    u_of_x: np.ndarray
    t: float
    clamped: np.ndarray


def build_potential(data: TwoSidedPath, t: float = 1.0) -> PotentialGrid:
    """Left-endpoint integral of ``X_u + u/t`` anchored at ``x = 0``."""
    if not t > 0:
        raise ValueError("t must be positive")
    x = data.x
    X = data.values
    dt = data.dt
    f = X + x / t
    q = np.zeros(x.size)
    np.cumsum(f[:-1] * dt, out=q[1:])
    o = data.origin
    p = q - q[o]
    return PotentialGrid(GridPath(float(x[0]), dt, p), t, X, o)


def _lower_hull_vertices(x: np.ndarray, y: np.ndarray) -> list[int]:
    # monotone chain; collinear middle points are popped (recovered as contacts later)
    xs = x.tolist()
    ys = y.tolist()
    stack: list[int] = []
    pop = stack.pop
    push = stack.append
    for i in range(len(xs)):
        xi = xs[i]
        yi = ys[i]
        while len(stack) >= 2:
            j = stack[-1]
            k = stack[-2]
            xj = xs[j]
            yj = ys[j]
            if (yj - ys[k]) * (xi - xj) < (yi - yj) * (xj - xs[k]):
                break
            pop()
        push(i)
    return stack


def _hull_from_vertices(x, y, vertices, rtol) -> HullResult:
    v = np.asarray(vertices, dtype=int)
    minorant = np.interp(x, x[v], y[v])
    seg_slopes = np.diff(y[v]) / np.diff(x[v])
    right_derivative = np.repeat(seg_slopes, np.diff(v))
    tol = rtol * float(np.ptp(y)) if y.size else 0.0
    contact = np.flatnonzero(y - minorant <= tol)
    return HullResult(x, minorant, right_derivative, contact, v)


def convex_minorant(pot, *, rtol: float = CONTACT_RTOL) -> HullResult:
    """Greatest convex minorant of the piecewise-linear potential in O(n).

    ``pot`` is a :class:`PotentialGrid` or an ``(x, y)`` pair of arrays.
    Contact means ``input - minorant <= rtol * (max - min of input)``.
    """
    x, y = _xy(pot)
    if x.size < 2:
        raise ValueError("need at least two grid points")
    return _hull_from_vertices(x, y, _lower_hull_vertices(x, y), rtol)


def convex_minorant_bruteforce(pot, *, rtol: float = CONTACT_RTOL):
    """Chord-test minorant: ``min`` over all chords straddling each point.

    Quadratic in memory per point and cubic overall; meant for n <= ~1000.
    Returns ``(minorant, contact)``.
    """
    x, y = _xy(pot)
    n = x.size
    out = y.copy()
    for j in range(1, n - 1):
        xi, yi = x[:j, None], y[:j, None]
        xk, yk = x[None, j + 1:], y[None, j + 1:]
        chord = yi + (yk - yi) * (x[j] - xi) / (xk - xi)
        out[j] = min(y[j], chord.min())
    tol = rtol * float(np.ptp(y))
    return out, np.flatnonzero(y - out <= tol)


def _xy(pot):
    if isinstance(pot, PotentialGrid):
        return pot.x, pot.values
    x, y = pot
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def inverse_lagrangian(hull: HullResult, t: float, x):
    """``a(t, x)``: right end of the last hull cell whose slope is ``<= x/t``.

    Returns ``(a, clamped)``; ``clamped`` is True where ``x/t`` falls outside
    the range of hull slopes, i.e. the true ``a`` lies outside the window and
    the returned value is the window edge.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    xs = np.asarray(x, dtype=float)
    c = hull.right_derivative
    k = np.searchsorted(c, xs / t, side="right") - 1
    clamped = (k < 0) | (k >= c.size - 1)
    a = hull.x[np.clip(k + 1, 0, hull.x.size - 1)]
    if xs.ndim == 0:
        return float(a), bool(clamped)
    return a, clamped


def velocity_field(hull: HullResult, t: float, x_grid) -> VelocityField:
    xg = np.asarray(x_grid, dtype=float)
    a, clamped = inverse_lagrangian(hull, t, xg)
    a = np.atleast_1d(a)
    return VelocityField(np.atleast_1d(xg), a, (np.atleast_1d(xg) - a) / t, t, np.atleast_1d(clamped))


def regular_points(pot: PotentialGrid, hull: HullResult, data: TwoSidedPath | None = None, *,
                   margin: float | None = None, jump_factor: float = 10.0) -> RegularPointSet:
    """Contact abscissae at distance >= ``margin`` from the window edges.

    ``margin`` defaults to one eighth of the half-width of the window.  A point
    is jump-flagged when the one-cell increment of the data into it exceeds
    ``jump_factor`` times the interquartile range of all one-cell increments.
    """
    x = pot.x
    lo, hi = float(x[0]), float(x[-1])
    if margin is None:
        margin = (hi - lo) / 16.0
    X = pot.data if data is None else data.values
    mask = hull.contact_mask
    tangent_all = mask.copy()
    tangent_all[:-1] &= mask[1:]
    # last point: supporting iff its slope is at least the last hull slope
    tangent_all[-1] &= bool(pot.slopes[-1] >= hull.right_derivative[-1])
    keep = mask & (x >= lo + margin) & (x <= hi - margin)
    idx = np.flatnonzero(keep)
    inc = np.diff(X)
    q75, q25 = np.percentile(inc, [75, 25])
    thr = jump_factor * float(q75 - q25)
    jumps = np.zeros(x.size, dtype=bool)
    jumps[1:] = inc > thr
    return RegularPointSet(x[idx], idx, jumps[idx], tangent_all[idx], thr, (lo + margin, hi - margin))


def tangent_condition_bruteforce(pot: PotentialGrid, indices, *, rtol: float = CONTACT_RTOL):
    """Replay the supporting-line inequality at each index against every grid point."""
    x, y = pot.x, pot.values
    s = pot.slopes
    tol = rtol * float(np.ptp(y))
    out = []
    for k in np.atleast_1d(indices):
        line = y[k] + (x - x[k]) * s[k]
        out.append(bool(np.all(y >= line - tol)))
    return np.array(out, dtype=bool)


def velocity_samples(params, t: float, x: float, n_reps: int, rng, *, L: float | None = None,
                     n_cells: int = 4096, threads: int = 1):
    """``u(t, x)`` over ``n_reps`` independent data sets; returns ``(u, clamped)``.

    The window half-width defaults to ``16 * t**(alpha/(alpha-1))`` (plus ``|x|``), the
    natural shock scale at time ``t``, with the same number of cells for every ``t``.
    """
    a = params.alpha
    if a <= 1:
        raise ValueError("the Hopf-Cole potential needs alpha > 1")
    if L is None:
        L = 16.0 * t ** (a / (a - 1.0)) + abs(x)
    stream = as_stream(rng)

    def fn(s, e):
        u = np.empty(e - s)
        cl = np.empty(e - s, dtype=bool)
        for i, r in enumerate(range(s, e)):
            data = two_sided_data(params, L, n_cells, stream.replica(r))
            hull = convex_minorant(build_potential(data, t))
            ai, ci = inverse_lagrangian(hull, t, x)
            u[i] = (x - ai) / t
            cl[i] = ci
        return u, cl

    return map_replicas(fn, n_reps, chunk=100, threads=threads)
