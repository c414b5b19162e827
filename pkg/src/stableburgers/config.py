"""Strict JSON scenario configuration.

A document has the common keys ``scenario``, ``params``, ``seed`` and
``threads``; every other key must be a knob of the chosen scenario.  Missing
knobs take the defaults in :data:`DEFAULTS`.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .stable import StableParams

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "DEFAULTS", "SCENARIOS"]


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


DEFAULTS: dict[str, dict] = {
    "dimension": {
        "L": 16.0, "n_cells": 2**19, "n_seeds": 30, "margin": None,
        "points": "contact", "debug_zero": False,
    },
    "hitting": {
        "window": 8.0, "n_cells": 8192, "n_reps": 400,
        "deltas": [2.0**-k for k in range(1, 10)], "debug_zero": False,
    },
    "persistence": {
        "horizon": 1000.0, "dt": 0.05, "n_reps": 100000, "level": 1.0,
        "t_grid": [10 ** (1 + k / 6) for k in range(13)], "t_min": 10.0, "t_max": 1000.0,
    },
    "ruin": {
        "horizon": 1000.0, "dt": 0.1, "n_reps": 100000, "level": 1.0,
        "t_grid": [10 ** (1 + k / 6) for k in range(13)], "t_min": 10.0, "t_max": 1000.0,
    },
    "lower_tail": {
        "t_values": [2.0**k for k in range(4, 11)], "n_reps": 10000, "k0": 10,
    },
    "dyadic": {
        "kind": "B", "n_values": list(range(0, 11)), "n_reps": 10000, "k0": 10,
    },
    "drifted": {
        "c": 0.0, "which": "path", "eps_grid": [10 ** (-1 - k / 4) for k in range(9)],
        "n_reps": 20000, "k0": 11,
    },
    "fkg": {
        "n_increments": 256, "horizon": 4.0, "n_reps": 20000, "condition_level": 2,
    },
    "selfsim": {
        "t": 2.0, "x": 0.0, "n_reps": 1000, "n_cells": 4096,
    },
}
SCENARIOS = tuple(DEFAULTS)
COMMON = ("scenario", "params", "seed", "threads")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: StableParams
    seed: int = 0
    # execution setting only: results do not depend on it, so it is left out of equality
    threads: int = field(default=1, compare=False)
    knobs: dict = field(default_factory=dict)

    def to_dict(self, *, include_threads: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "params": self.params.to_dict(),
            "seed": self.seed,
        }
        if include_threads:
            out["threads"] = self.threads
        out.update(copy.deepcopy(self.knobs))
        return out

    def with_overrides(self, *, seed: int | None = None, threads: int | None = None) -> "ScenarioConfig":
        doc = self.to_dict()
        if seed is not None:
            doc["seed"] = seed
        if threads is not None:
            doc["threads"] = threads
        return from_dict(doc)


def load_config(source) -> ScenarioConfig:
    """Parse a path or inline JSON text into a validated :class:`ScenarioConfig`."""
    if isinstance(source, dict):
        return from_dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        path = Path(text)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(doc)


def from_dict(doc: dict) -> ScenarioConfig:
    scenario = doc.get("scenario")
    if scenario not in DEFAULTS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {scenario!r}")
    allowed = set(COMMON) | set(DEFAULTS[scenario])
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys for scenario {scenario!r}: {', '.join(unknown)}")
    params = _params(doc.get("params", {}))
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    threads = doc.get("threads", 1)
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ConfigError("threads must be a positive integer")
    knobs = copy.deepcopy(DEFAULTS[scenario])
    for k in DEFAULTS[scenario]:
        if k in doc:
            knobs[k] = doc[k]
    _validate(scenario, params, knobs)
    return ScenarioConfig(scenario, params, seed, threads, knobs)


def _params(p) -> StableParams:
    if not isinstance(p, dict):
        raise ConfigError("params must be an object with alpha, beta, scale")
    extra = sorted(set(p) - {"alpha", "beta", "scale"})
    if extra:
        raise ConfigError(f"unknown keys in params: {', '.join(extra)}")
    if "alpha" not in p:
        raise ConfigError("params.alpha is required")
    try:
        return StableParams(float(p["alpha"]), float(p.get("beta", 0.0)), float(p.get("scale", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _need(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _numlist(x) -> bool:
    return isinstance(x, list) and len(x) > 0 and all(_num(v) for v in x)


def _validate(scenario: str, params: StableParams, k: dict) -> None:
    a = params.alpha
    if "n_reps" in k:
        _need(_int(k["n_reps"]) and k["n_reps"] >= 1, "n_reps must be a positive integer")
    if scenario in ("dimension", "hitting", "selfsim"):
        _need(a > 1 or k.get("debug_zero", False),
              "the Hopf-Cole potential needs alpha ∈ (1,2] (growth condition)")
    if scenario == "dimension":
        _need(_num(k["L"]) and k["L"] > 0, "L must be positive")
        _need(_int(k["n_cells"]) and k["n_cells"] >= 2, "n_cells must be an integer >= 2")
        _need(_int(k["n_seeds"]) and k["n_seeds"] >= 1, "n_seeds must be a positive integer")
        _need(k["margin"] is None or (_num(k["margin"]) and 0 <= k["margin"] < k["L"]),
              "margin must be null or in [0, L)")
        _need(k["points"] in ("contact", "unflagged", "tangent"),
              "points must be contact, unflagged or tangent")
        _need(isinstance(k["debug_zero"], bool), "debug_zero must be a boolean")
    elif scenario == "hitting":
        _need(_num(k["window"]) and k["window"] > 0, "window must be positive")
        _need(_int(k["n_cells"]) and k["n_cells"] >= 2, "n_cells must be an integer >= 2")
        _need(_numlist(k["deltas"]) and all(0 < d <= k["window"] / 4 for d in k["deltas"]),
              "deltas must lie in (0, window/4]")
        _need(isinstance(k["debug_zero"], bool), "debug_zero must be a boolean")
    elif scenario in ("persistence", "ruin"):
        _need(_num(k["horizon"]) and k["horizon"] > 0, "horizon must be positive")
        _need(_num(k["dt"]) and 0 < k["dt"] <= k["horizon"], "dt must be in (0, horizon]")
        _need(_num(k["level"]), "level must be a number")
        _need(_numlist(k["t_grid"]) and all(0 < t <= k["horizon"] for t in k["t_grid"]),
              "t_grid must lie in (0, horizon]")
        _need(sorted(k["t_grid"]) == k["t_grid"], "t_grid must be increasing")
        _need(_num(k["t_min"]) and _num(k["t_max"]) and k["t_min"] < k["t_max"],
              "t_min < t_max required for the exponent fit")
    elif scenario == "lower_tail":
        _need(a > 1, "the lower-tail event uses gamma = (alpha-1)/alpha > 0, so alpha ∈ (1,2]")
        _need(_numlist(k["t_values"]) and all(t >= 1 for t in k["t_values"]), "t_values must be >= 1")
        _need(_int(k["k0"]) and 1 <= k["k0"] <= 16, "k0 must be an integer in [1, 16]")
    elif scenario == "dyadic":
        _need(a > 1, "dyadic events use gamma = (alpha-1)/alpha > 0, so alpha ∈ (1,2]")
        _need(k["kind"] in ("A", "B", "C"), "kind must be A, B or C")
        _need(isinstance(k["n_values"], list) and len(k["n_values"]) >= 1
              and all(_int(n) and 0 <= n <= 12 for n in k["n_values"]),
              "n_values must be integers in [0, 12] (memory budget)")
        _need(_int(k["k0"]) and 1 <= k["k0"] <= 16, "k0 must be an integer in [1, 16]")
    elif scenario == "drifted":
        _need(a > 1, "the drifted lower-tail estimate requires alpha ∈ (1,2]")
        _need(_num(k["c"]), "c must be a number")
        _need(k["which"] in ("path", "integral"), "which must be path or integral")
        e = k["eps_grid"]
        _need(_numlist(e) and len(e) >= 3 and all(x > 0 for x in e)
              and all(e[i] > e[i + 1] for i in range(len(e) - 1)),
              "eps_grid must hold >= 3 positive, strictly decreasing values")
        _need(_int(k["k0"]) and 1 <= k["k0"] <= 16, "k0 must be an integer in [1, 16]")
    elif scenario == "fkg":
        _need(a > 1, "the conditioning event B_n needs alpha ∈ (1,2]")
        _need(_int(k["n_increments"]) and k["n_increments"] >= 2, "n_increments must be >= 2")
        _need(_int(k["condition_level"]) and 0 <= k["condition_level"] <= 4,
              "condition_level must be an integer in [0, 4]")
        _need(_num(k["horizon"]) and k["horizon"] >= max(2.0, 2.0 ** k["condition_level"]),
              "horizon must cover the checkpoints 1, 2 and 2^condition_level")
        per_unit = k["n_increments"] / k["horizon"]
        _need(abs(per_unit - round(per_unit)) < 1e-9 and round(per_unit) >= 1,
              "n_increments / horizon must be a positive integer so checkpoints are grid points")
    elif scenario == "selfsim":
        _need(_num(k["t"]) and k["t"] > 0, "t must be positive")
        _need(_num(k["x"]), "x must be a number")
        _need(_int(k["n_cells"]) and k["n_cells"] >= 2, "n_cells must be an integer >= 2")
