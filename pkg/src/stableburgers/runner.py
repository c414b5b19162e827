"""Scenario execution and deterministic result emission.

Every scenario fills a :class:`RunReport` with one result table (frozen
columns, see :data:`COLUMNS`) and a dictionary of fitted quantities.  The JSON
report and the CSV table depend only on the config and the package version:
wall time is kept on the report object and never written.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import ks_2samp

from . import __version__
from .config import ScenarioConfig
from .correlation import b_event, c_event, fkg_empirical
from .fractal import box_dimension, hitting_exponent
from .hopf_cole import velocity_samples
from .montecarlo import map_replicas
from .persistence import (
    DyadicEventSpec,
    LowerTailSpec,
    drifted_lower_tail,
    dyadic_event_probability,
    fit_decay,
    fit_exponent,
    lower_tail_probability,
    passage_times_coupled,
    survival_from_times,
)
from .rng import SplitStream
from .stats import linear_fit

__all__ = ["COLUMNS", "RunReport", "run", "write_outputs", "report_json", "table_csv"]

COLUMNS: dict[str, tuple[str, ...]] = {
    "dimension": ("seed_index", "dimension", "stderr", "degenerate", "n_points"),
    "hitting": ("delta", "probability", "ci_half_width", "hits", "used"),
    "persistence": ("t", "survival", "ci_half_width", "n_alive"),
    "ruin": ("t", "survival", "ci_half_width", "n_alive"),
    "lower_tail": ("t", "probability", "ci_low", "ci_high"),
    "dyadic": ("n", "probability", "ci_low", "ci_high"),
    "drifted": ("eps", "probability", "ci_half_width", "hits"),
    "fkg": ("pair", "covariance", "ci_half_width", "p_c", "p_d", "p_cd",
            "n_conditioned", "expected_sign", "consistent"),
    "selfsim": ("quantile", "u_t", "u_rescaled"),
}


@dataclass
class RunReport:
    config: ScenarioConfig
    rows: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    status: str = "ok"
    error: str | None = None
    wall_time: float = 0.0

    @property
    def columns(self) -> tuple[str, ...]:
        return COLUMNS[self.config.scenario]

    def to_dict(self) -> dict:
        return {
            "artifact": "stableburgers",
            "version": __version__,
            "status": self.status,
            "error": self.error,
            "config": self.config.to_dict(include_threads=False),
            "results": _plain(self.results),
            "flags": _plain(self.flags),
            "table": {"columns": list(self.columns), "rows": _plain(self.rows)},
        }


def run(config: ScenarioConfig) -> RunReport:
    """Run one scenario; module failures are caught and recorded on the report."""
    report = RunReport(config)
    start = time.perf_counter()
    try:
        _RUNNERS[config.scenario](config, report)
    except Exception as exc:  # noqa: BLE001 - every module error becomes a failure marker
        report.status = "failed"
        report.error = f"{config.scenario}: {type(exc).__name__}: {exc}"
    report.wall_time = time.perf_counter() - start
    return report


# ---------------------------------------------------------------- emission

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def report_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def table_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in _plain(report.rows):
        w.writerow(["" if v is None else (str(v).lower() if isinstance(v, bool) else v) for v in row])
    return buf.getvalue()


def write_outputs(report: RunReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write ``report_<seed>.json`` and, for ``fmt="csv"``, ``<scenario>_<seed>.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = report.config.seed
    paths = []
    if fmt == "csv":
        p = out / f"{report.config.scenario}_{seed}.csv"
        p.write_text(table_csv(report))
        paths.append(p)
    p = out / f"report_{seed}.json"
    p.write_text(report_json(report))
    paths.append(p)
    return paths


# ---------------------------------------------------------------- scenarios

def _stream(cfg: ScenarioConfig) -> SplitStream:
    return SplitStream(cfg.seed)


def _run_dimension(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    p = cfg.params
    stream = _stream(cfg)

    def fn(s, e):
        out = np.empty((e - s, 4))
        for i, r in enumerate(range(s, e)):
            fit, curve = box_dimension(p, k["L"], k["n_cells"], stream.replica(r), margin=k["margin"],
                                       use=k["points"], debug_zero=k["debug_zero"])
            out[i] = (fit.slope, fit.stderr, fit.degenerate, curve.counts[-1])
        return out

    res = map_replicas(fn, k["n_seeds"], chunk=1, threads=cfg.threads)
    for r, (d, se, deg, npts) in enumerate(res):
        rep.rows.append([r, d, se, bool(deg), int(npts)])
    # degenerate realisations (no spread of regular points) carry no slope
    d = res[res[:, 2] == 0, 0]
    n = d.size
    target = 1.0 if k["debug_zero"] else 1.0 / p.alpha
    rep.results.update(
        n_usable=int(n),
        dimension_mean=float(d.mean()) if n else float("nan"),
        dimension_stderr=float(d.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan"),
        dimension_sd=float(d.std(ddof=1)) if n > 1 else float("nan"),
        reference_dimension=target,
        fraction_below_reference_minus_0_05=float(np.mean(d < target - 0.05)) if n else float("nan"),
    )
    rep.flags["any_degenerate"] = bool(res[:, 2].any())


def _run_hitting(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    curve, kappa, se = hitting_exponent(cfg.params, k["deltas"], k["n_reps"], k["window"], _stream(cfg),
                                        n_cells=k["n_cells"], threads=cfg.threads,
                                        debug_zero=k["debug_zero"])
    for row in zip(curve.deltas, curve.probabilities, curve.half_widths, curve.hits, curve.used):
        rep.rows.append([float(row[0]), float(row[1]), float(row[2]), int(row[3]), bool(row[4])])
    rep.results.update(kappa=kappa, kappa_stderr=se, dimension_bound=1.0 - kappa)
    rep.flags["excluded_deltas"] = [float(d) for d, u in zip(curve.deltas, curve.used) if not u]


def _run_passage(cfg: ScenarioConfig, rep: RunReport, kind: str) -> None:
    k = cfg.knobs
    p = cfg.params
    t_c, t_f = passage_times_coupled(p, k["n_reps"], _stream(cfg), kind=kind, level=k["level"],
                                     horizon=k["horizon"], dt=k["dt"], threads=cfg.threads)
    coarse = survival_from_times(t_c, k["t_grid"], horizon=k["horizon"], dt=k["dt"])
    fine = survival_from_times(t_f, k["t_grid"], horizon=k["horizon"], dt=k["dt"] / 2)
    for row in zip(coarse.times, coarse.survival, coarse.half_widths, coarse.n_alive):
        rep.rows.append([float(row[0]), float(row[1]), float(row[2]), int(row[3])])
    change = np.abs(coarse.survival - fine.survival)
    rep.flags["dt_refinement_stable"] = bool(np.all(change < 2 * coarse.half_widths))
    rep.flags["max_survival_change_half_dt"] = float(change.max())
    rep.results["n_censored"] = coarse.n_censored
    fit = fit_exponent(coarse, k["t_min"], k["t_max"])
    rep.results.update(theta=fit.theta, theta_stderr=fit.stderr, fit_points=fit.n_points)
    fit_f = fit_exponent(fine, k["t_min"], k["t_max"])
    rep.results.update(theta_half_dt=fit_f.theta, theta_half_dt_stderr=fit_f.stderr)
    if kind == "path":
        rep.results["reference_theta"] = p.rho
    else:
        rep.results["candidate_thetas"] = {"rho_over_2": p.rho / 2,
                                           "alpha_minus_1_over_2alpha": (p.alpha - 1) / (2 * p.alpha)}


def _run_lower_tail(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    stream = _stream(cfg)
    ts, probs = [], []
    for i, t in enumerate(k["t_values"]):
        spec = LowerTailSpec.standard(cfg.params.alpha, float(t))
        ph, (lo, hi) = lower_tail_probability(cfg.params, spec, k["n_reps"], stream.split(i),
                                              k0=k["k0"], threads=cfg.threads)
        rep.rows.append([float(t), ph, lo, hi])
        ts.append(float(t))
        probs.append(ph)
    probs = np.array(probs)
    ok = probs > 0
    rep.flags["zero_probability_t"] = [t for t, o in zip(ts, ok) if not o]
    if ok.sum() >= 3:
        b, se, _ = linear_fit(np.log(np.array(ts)[ok]), -np.log(probs[ok]))
        rep.results.update(neglog_slope_vs_log_t=b, neglog_slope_stderr=se)


def _run_dyadic(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    stream = _stream(cfg)
    probs = []
    for n in k["n_values"]:
        ph, (lo, hi) = dyadic_event_probability(cfg.params, DyadicEventSpec(int(n), k["kind"]), k["n_reps"],
                                                stream.split(int(n)), k0=k["k0"], threads=cfg.threads)
        rep.rows.append([int(n), ph, lo, hi])
        probs.append(ph)
    rep.results["min_probability"] = float(min(probs))
    slope, se = fit_decay(k["n_values"], probs, k["n_reps"])
    rep.results.update(log_slope=slope, log_slope_stderr=se)


def _run_drifted(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    p = cfg.params
    curve = drifted_lower_tail(p, k["c"], k["which"], k["eps_grid"], k["n_reps"], _stream(cfg),
                               k0=k["k0"], threads=cfg.threads)
    for row in zip(curve.eps, curve.probabilities, curve.half_widths, curve.hits):
        rep.rows.append([float(row[0]), float(row[1]), float(row[2]), int(row[3])])
    ref = p.rho * p.alpha if k["which"] == "path" else p.rho * p.alpha / (p.alpha + 1)
    rep.results.update(exponent=curve.exponent, exponent_stderr=curve.stderr, reference_exponent=ref)


def _run_fkg(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    p = cfg.params
    stream = _stream(cfg)
    lev = k["condition_level"]
    top = 2.0**lev
    cps = sorted({1.0, 2.0} | {2.0**m for m in range(lev + 1)})
    pairs = [
        ("z1_pos_vs_z2_pos", None,
         lambda v: v.z(1.0) > 0, lambda v: v.z(2.0) > 0, 1),
        ("c_event_vs_sup_below", b_event(p.alpha, lev),
         c_event(p.alpha, lev), lambda v: v.zmax(top) < top ** (1 / p.alpha), -1),
    ]
    for i, (name, cond, ev_c, ev_d, sign) in enumerate(pairs):
        r = fkg_empirical(p, k["n_increments"], k["horizon"], cps, ev_c, ev_d, k["n_reps"], stream.split(i),
                          condition=cond, expected_sign=sign, threads=cfg.threads)
        rep.rows.append([name, r.covariance, r.half_width, r.p_c, r.p_d, r.p_cd,
                         r.n_conditioned, r.expected_sign, r.consistent])
        rep.results[name] = r.to_dict()
    rep.flags["all_signs_consistent"] = all(row[-1] for row in rep.rows)


def _run_selfsim(cfg: ScenarioConfig, rep: RunReport) -> None:
    k = cfg.knobs
    p = cfg.params
    a = p.alpha
    t, x = float(k["t"]), float(k["x"])
    s = t ** (a / (a - 1.0))
    L_t = 16.0 * s + abs(x)
    stream = _stream(cfg)
    u_t, cl_t = velocity_samples(p, t, x, k["n_reps"], stream.split(0), L=L_t, n_cells=k["n_cells"],
                                 threads=cfg.threads)
    u_1, cl_1 = velocity_samples(p, 1.0, x / s, k["n_reps"], stream.split(1), L=L_t / s,
                                 n_cells=k["n_cells"], threads=cfg.threads)
    # clamped evaluations are dropped; under the matched windows both samples lose the same event
    u_t = u_t[~cl_t]
    u_r = t ** (1.0 / (a - 1.0)) * u_1[~cl_1]
    for q in np.linspace(0.05, 0.95, 19):
        rep.rows.append([round(float(q), 10), float(np.quantile(u_t, q)), float(np.quantile(u_r, q))])
    ks = ks_2samp(u_t, u_r)
    rep.results.update(ks_statistic=float(ks.statistic), ks_pvalue=float(ks.pvalue))
    rep.flags.update(clamped_t=int(cl_t.sum()), clamped_rescaled=int(cl_1.sum()))


_RUNNERS = {
    "dimension": _run_dimension,
    "hitting": _run_hitting,
    "persistence": lambda c, r: _run_passage(c, r, "integral"),
    "ruin": lambda c, r: _run_passage(c, r, "path"),
    "lower_tail": _run_lower_tail,
    "dyadic": _run_dyadic,
    "drifted": _run_drifted,
    "fkg": _run_fkg,
    "selfsim": _run_selfsim,
}
