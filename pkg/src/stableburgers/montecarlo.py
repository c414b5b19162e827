"""Replica-parallel path simulation with deterministic per-replica streams.

Replicas are processed in fixed chunks; chunk results are concatenated in
replica order, so outputs do not depend on the number of worker threads.
Within a chunk, paths advance block by block over an arbitrary time grid and
replicas that are finished (crossed a level, left an event) are dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .rng import SplitStream, as_stream
from .stable import StableParams, stable_from_uniforms

__all__ = [
    "map_replicas",
    "uniform_grid",
    "dyadic_grid",
    "walk_paths",
    "replica_generators",
    "record_checkpoints",
    "DEFAULT_CHUNK",
]

DEFAULT_CHUNK = 1000
DEFAULT_BLOCK = 2048


def map_replicas(fn: Callable[[int, int], np.ndarray], n_reps: int, *,
                 chunk: int = DEFAULT_CHUNK, threads: int = 1):
    """Evaluate ``fn(start, stop)`` on consecutive replica ranges and merge in order.

    ``fn`` returns an array (or tuple of arrays) indexed by replica within the range.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    ranges = [(s, min(s + chunk, n_reps)) for s in range(0, n_reps, chunk)]
    if threads <= 1 or len(ranges) == 1:
        parts = [fn(s, e) for s, e in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: fn(*r), ranges))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p) for p in zip(*parts))
    return np.concatenate(parts)


def uniform_grid(horizon: float, dt: float) -> np.ndarray:
    n = int(round(horizon / dt))
    if n < 1:
        raise ValueError("horizon must cover at least one step of size dt")
    return dt * np.arange(n + 1)


def dyadic_grid(horizon: float, k0: int = 10, t_first: float = 1.0) -> np.ndarray:
    """Grid with constant relative resolution.

    ``[0, t_first]`` gets ``2**k0`` cells; every later octave
    ``[t_first*2**(j-1), t_first*2**j]`` gets ``2**(k0-1)`` cells, so the step on
    octave ``j`` is ``t_first * 2**(j - k0)``.  Octaves are truncated at ``horizon``.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if k0 < 1:
        raise ValueError("k0 must be at least 1")
    first = min(horizon, t_first)
    pieces = [np.linspace(0.0, first, 2**k0 + 1)]
    lo = t_first
    while lo < horizon * (1 - 1e-12):
        hi = 2.0 * lo
        step = lo / 2 ** (k0 - 1)
        top = min(hi, horizon)
        n = max(1, int(np.ceil((top - lo) / step - 1e-9)))
        pieces.append(np.linspace(lo, top, n + 1)[1:])
        lo = hi
    return np.concatenate(pieces)


def replica_generators(stream: SplitStream, start: int, stop: int) -> list[np.random.Generator]:
    return [stream.replica(r) for r in range(start, stop)]


def walk_paths(params: StableParams, times: np.ndarray, gens, visit, *,
               drift: float = 0.0, block: int = DEFAULT_BLOCK,
               frozen: float | None = None) -> None:
    """Advance one path per generator in ``gens`` along ``times``.

    For each block of cells ``[k0, k1)`` calls
    ``visit(idx, k0, k1, z_left, z_right, a_right)`` where ``idx`` indexes the
    live paths, ``z_left[:, j]`` is Z on cell ``k0 + j``, ``z_right[:, j]`` is
    Z at grid point ``k0 + j + 1`` and ``a_right`` the left-endpoint integral
    at the same points.  ``visit`` returns a boolean mask of paths to keep
    (None keeps all).

    Uniforms are consumed sequentially from each generator, so a path does
    not depend on ``block`` beyond summation rounding.  With ``frozen`` the path is the deterministic
    ``Z_t = frozen + drift*t`` and ``gens`` may be a plain count.
    """
    times = np.asarray(times, dtype=float)
    widths = np.diff(times)
    scale = widths ** (1.0 / params.alpha) * params.sigma
    m = gens if isinstance(gens, int) else len(gens)
    idx = np.arange(m)
    z = np.zeros(m) if frozen is None else np.full(m, float(frozen))
    a = np.zeros(m)
    n_cells = widths.size
    k0 = 0
    while k0 < n_cells and idx.size:
        k1 = min(k0 + block, n_cells)
        w = widths[k0:k1]
        if frozen is None:
            u = np.stack([gens[i].random((k1 - k0, 2)) for i in idx])
            xi = stable_from_uniforms(params.alpha, params.beta, u) * scale[k0:k1]
            if drift:
                xi += drift * w
            z_right = z[:, None] + np.cumsum(xi, axis=1)
            z_left = np.concatenate([z[:, None], z_right[:, :-1]], axis=1)
        else:
            shape = (idx.size, k1 - k0)
            z_left = np.broadcast_to(frozen + drift * times[k0:k1], shape)
            z_right = np.broadcast_to(frozen + drift * times[k0 + 1:k1 + 1], shape)
        a_right = a[:, None] + np.cumsum(z_left * w, axis=1)
        keep = visit(idx, k0, k1, z_left, z_right, a_right)
        if keep is None:
            keep = slice(None)
        z = z_right[keep, -1]
        a = a_right[keep, -1]
        idx = idx[keep]
        k0 = k1


def record_checkpoints(params: StableParams, times: np.ndarray, checkpoints,
                       stream: SplitStream, n_reps: int, *, drift: float = 0.0,
                       threads: int = 1, chunk: int = DEFAULT_CHUNK) -> dict:
    """Values of Z, A and running maxima of Z, A at the given grid indices.

    Returns a dict of arrays of shape ``(n_reps, len(checkpoints))`` with keys
    ``z``, ``a``, ``zmax``, ``amax``.
    """
    stream = as_stream(stream)
    cps = np.asarray(checkpoints, dtype=int)
    if cps.size == 0 or cps.min() < 1 or cps.max() >= len(times):
        raise ValueError("checkpoints must be grid indices in [1, len(times))")

    def chunk_fn(s, e):
        m = e - s
        out = {k: np.zeros((m, cps.size)) for k in ("z", "a", "zmax", "amax")}
        zmax = np.zeros(m)
        amax = np.zeros(m)

        def visit(idx, k0, k1, zl, zr, ar):
            for j, c in enumerate(cps):
                if k0 < c <= k1:
                    col = c - k0
                    out["z"][idx, j] = zr[:, col - 1]
                    out["a"][idx, j] = ar[:, col - 1]
                    out["zmax"][idx, j] = np.maximum(zmax[idx], zr[:, :col].max(axis=1))
                    out["amax"][idx, j] = np.maximum(amax[idx], ar[:, :col].max(axis=1))
            zmax[idx] = np.maximum(zmax[idx], zr.max(axis=1))
            amax[idx] = np.maximum(amax[idx], ar.max(axis=1))
            return None

        walk_paths(params, times[: cps.max() + 1], replica_generators(stream, s, e), visit, drift=drift)
        return tuple(out[k] for k in ("z", "a", "zmax", "amax"))

    z, a, zm, am = map_replicas(chunk_fn, n_reps, chunk=chunk, threads=threads)
    return {"z": z, "a": a, "zmax": zm, "amax": am}
