"""JSON config loaders.

Every loader raises ConfigError with a message naming the offending field.

Problem config::

    {"system": {"A": [[...]], "B": [[...]]}, "x0": [...], "xT": [...],
     "T": 10, "N": 500, "lambda": [...], "theta": [...], "objective": "l1"}

Self-triggered config::

    {"plant": {"a": -1, "kind": "linear"} | {"A": [[...]], "B": [[...]]},
     "x0": [...], "r": 0.6, "T_min": 0.1, "delta": 1.0,
     "disturbance": {"kind": "uniform" | "worst-case" | "zero", "direction": [...]},
     "total_time": 10, "sim_dt": 0.002, "n_per_unit": 200, "tol_T": 1e-3,
     "T_max": 20, "eps_zero": 1e-6}

A scalar plant is dx/dt = a x + a u + d ("linear") or
dx/dt = sin(a x) + a u + d ("nonlinear-sin").
"""

from __future__ import annotations

import json
from pathlib import Path

from .lti import LtiSystem
from .oracle_1d import PlantKind, ScalarPlant
from .self_triggered import Disturbance, DisturbanceKind, SelfTriggeredConfig
from .transcription import FiniteHorizonProblem, Objective


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    return data


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing field '{key}'")
    return d[key]


def _number(d: dict, key: str, where: str) -> float:
    v = _require(d, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: field '{key}' must be a number, got {v!r}")
    return float(v)


def _vector(d: dict, key: str, where: str):
    v = _require(d, key, where)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return [float(v)]
    if not isinstance(v, list) or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool) for e in v):
        raise ConfigError(f"{where}: field '{key}' must be a list of numbers")
    return [float(e) for e in v]


def system_from_dict(d: dict, where: str = "system") -> LtiSystem:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: must be an object with fields 'A' and 'B'")
    try:
        return LtiSystem.from_dict(d)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}".replace("system: ", "")) from exc


def problem_from_dict(d: dict, objective: str | None = None) -> FiniteHorizonProblem:
    sys = system_from_dict(_require(d, "system", "problem"))
    obj = objective or d.get("objective", "l1")
    try:
        obj = Objective(obj)
    except ValueError:
        raise ConfigError(f"problem: field 'objective' must be one of "
                          f"{[o.value for o in Objective]}, got {obj!r}") from None
    N = _require(d, "N", "problem")
    if isinstance(N, bool) or not isinstance(N, int):
        raise ConfigError(f"problem: field 'N' must be an integer, got {N!r}")
    kw = dict(sys=sys, x0=_vector(d, "x0", "problem"), T=_number(d, "T", "problem"), N=N,
              objective=obj)
    for key, name in (("xT", "xT"), ("lambda", "lam"), ("theta", "theta")):
        if key in d:
            kw[name] = _vector(d, key, "problem")
    try:
        return FiniteHorizonProblem(**kw)
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from exc


def plant_from_dict(d: dict):
    if not isinstance(d, dict):
        raise ConfigError("plant: must be an object")
    if "a" in d:
        try:
            return ScalarPlant(_number(d, "a", "plant"), PlantKind(d.get("kind", "linear")))
        except ValueError as exc:
            raise ConfigError(f"plant: {exc}") from exc
    return system_from_dict(d, "plant")


def disturbance_from_dict(d: dict | None, seed: int = 0, episode: int = 0) -> Disturbance:
    d = d or {}
    try:
        kind = DisturbanceKind(d.get("kind", "zero"))
    except ValueError:
        raise ConfigError(f"disturbance: field 'kind' must be one of "
                          f"{[k.value for k in DisturbanceKind if k.value != 'custom']}") from None
    if kind is DisturbanceKind.CUSTOM:
        raise ConfigError("disturbance: kind 'custom' is only available from the library API")
    direction = tuple(_vector(d, "direction", "disturbance")) if "direction" in d else None
    return Disturbance(kind, seed=seed, episode=episode, direction=direction)


def sim_config_from_dict(d: dict, seed: int = 0, episode: int = 0) -> SelfTriggeredConfig:
    where = "simulation"
    plant = plant_from_dict(_require(d, "plant", where))
    kw = dict(plant=plant, x0=_vector(d, "x0", where), r=_number(d, "r", where),
              T_min=_number(d, "T_min", where),
              disturbance=disturbance_from_dict(d.get("disturbance"), seed, episode))
    for key in ("delta", "total_time", "sim_dt", "tol_T", "T_max", "eps_zero"):
        if key in d:
            kw[key] = _number(d, key, where)
    if "n_per_unit" in d:
        v = d["n_per_unit"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"{where}: field 'n_per_unit' must be a positive integer")
        kw["n_per_unit"] = v
    try:
        return SelfTriggeredConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
