"""Run configuration files, canonical hashing, and sweep expansion."""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import os
from dataclasses import dataclass, replace

from .model import (
    BeamParameters,
    BoundaryCondition,
    DampingProfile,
    DampingShape,
    check_dnn_admissible,
)

_PARAM_KEYS = ("rho1", "rho2", "kappa", "kappa0", "b", "l", "L")
_TOP_KEYS = {"params", "profile", "bc", "n", "dt", "T", "seed", "lambda_grid", "outputs"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LambdaGrid:
    """Frequency scan request; max None means "up to the resolved band"."""
    min: float = 1.0
    max: float | None = None
    count: int = 48
    spacing: str = "log"


@dataclass(frozen=True)
class RunConfig:
    params: BeamParameters
    profile: DampingProfile
    bc: BoundaryCondition
    n: int
    dt: float
    T: float
    seed: int
    lambda_grid: LambdaGrid
    outputs: str


def auto_dt(params: BeamParameters, n: int) -> float:
    """h / (2 c_max), the step the time integrator defaults to."""
    return (params.L / n) / (2.0 * params.max_wave_speed)


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def parse_config(raw: dict) -> RunConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    for key in ("params", "profile", "bc", "n", "T"):
        _require(key in raw, f"config key {key!r} is required")

    p = raw["params"]
    _require(isinstance(p, dict) and set(p) == set(_PARAM_KEYS),
             f"params must hold exactly the keys {list(_PARAM_KEYS)}")
    try:
        params = BeamParameters(**{k: float(p[k]) for k in _PARAM_KEYS})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad params: {err}") from err

    pr = raw["profile"]
    _require(isinstance(pr, dict), "profile must be an object")
    allowed = {"alpha", "beta", "a0", "shape", "ramp"}
    _require(set(pr) <= allowed and {"alpha", "beta", "a0"} <= set(pr),
             "profile needs alpha, beta, a0 and optionally shape, ramp")
    try:
        shape = DampingShape(pr.get("shape", "PiecewiseConstant"))
        profile = DampingProfile(alpha=float(pr["alpha"]), beta=float(pr["beta"]),
                                 a0=float(pr["a0"]), shape=shape,
                                 ramp=float(pr.get("ramp", 0.0)))
        profile.validate_for_length(params.L)
    except ValueError as err:
        raise ConfigError(f"bad profile: {err}") from err

    try:
        bc = BoundaryCondition(raw["bc"])
    except ValueError as err:
        raise ConfigError(f"bc must be one of DNN, DDD: {err}") from err
    if bc is BoundaryCondition.DNN:
        adm = check_dnn_admissible(params)
        _require(adm.ok,
                 f"DNN requires L away from n*pi/l; L={params.L} is within "
                 f"{adm.tol:g} of {adm.nearest_n}*pi/l")

    n = raw["n"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n >= 4,
             "n must be an integer >= 4")
    T = float(raw["T"])
    _require(T > 0, "T must be positive")

    dt_raw = raw.get("dt", "auto")
    if dt_raw == "auto":
        dt = auto_dt(params, n)
    else:
        dt = float(dt_raw)
        _require(dt > 0, "dt must be positive or the string 'auto'")

    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed must be an integer")

    lg = raw.get("lambda_grid", {})
    _require(isinstance(lg, dict) and set(lg) <= {"min", "max", "count", "spacing"},
             "lambda_grid holds min, max, count, spacing")
    lam_max = lg.get("max", "auto")
    lam_max = None if lam_max == "auto" else float(lam_max)
    grid = LambdaGrid(min=float(lg.get("min", 1.0)), max=lam_max,
                      count=int(lg.get("count", 48)),
                      spacing=str(lg.get("spacing", "log")))
    _require(grid.spacing == "log", "only log spacing is supported")
    _require(grid.count >= 2, "lambda_grid.count must be >= 2")
    _require(grid.min > 0, "lambda_grid.min must be positive")
    if grid.max is not None:
        _require(grid.max > grid.min, "lambda_grid.max must exceed min")

    outputs = str(raw.get("outputs", "out"))
    return RunConfig(params=params, profile=profile, bc=bc, n=n, dt=dt, T=T,
                     seed=seed, lambda_grid=grid, outputs=outputs)


def to_dict(cfg: RunConfig) -> dict:
    return {
        "params": {k: getattr(cfg.params, k) for k in _PARAM_KEYS},
        "profile": {
            "alpha": cfg.profile.alpha,
            "beta": cfg.profile.beta,
            "a0": cfg.profile.a0,
            "shape": cfg.profile.shape.value,
            "ramp": cfg.profile.ramp,
        },
        "bc": cfg.bc.value,
        "n": cfg.n,
        "dt": cfg.dt,
        "T": cfg.T,
        "seed": cfg.seed,
        "lambda_grid": {
            "min": cfg.lambda_grid.min,
            "max": "auto" if cfg.lambda_grid.max is None else cfg.lambda_grid.max,
            "count": cfg.lambda_grid.count,
            "spacing": cfg.lambda_grid.spacing,
        },
        "outputs": cfg.outputs,
    }


def config_id(cfg: RunConfig) -> str:
    """Hash of the resolved physics fields; the output location is excluded
    so moving results elsewhere does not change identities."""
    payload = to_dict(cfg)
    payload.pop("outputs")
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return parse_config(raw)


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class SweepSpec:
    base: dict
    grid: dict          # dotted path -> list of values
    outputs: str
    max_points: int = 256


def load_sweep(path: str) -> SweepSpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read sweep {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"sweep {path} is not valid JSON: {err}") from err
    _require(isinstance(raw, dict) and set(raw) <= {"base", "grid", "outputs", "max_points"},
             "sweep holds base, grid, outputs and optionally max_points")
    for key in ("base", "grid", "outputs"):
        _require(key in raw, f"sweep key {key!r} is required")
    grid = raw["grid"]
    _require(isinstance(grid, dict) and grid, "grid must be a nonempty object")
    for path_, values in grid.items():
        _require(isinstance(values, list) and values,
                 f"grid entry {path_!r} must be a nonempty list")
    spec = SweepSpec(base=raw["base"], grid=grid, outputs=str(raw["outputs"]),
                     max_points=int(raw.get("max_points", 256)))
    total = 1
    for values in grid.values():
        total *= len(values)
    _require(total <= spec.max_points,
             f"sweep expands to {total} points, above the cap {spec.max_points}")
    return spec


def _set_dotted(tree: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep path {dotted!r} does not match the base config")
        node = node[key]
    # a brand-new leaf is fine: parse_config rejects misspelled keys anyway
    node[keys[-1]] = value


def expand_sweep(spec: SweepSpec) -> list[RunConfig]:
    """Cartesian product of the grid over the base config, one RunConfig per
    point, each writing into a subdirectory named by its hash."""
    names = sorted(spec.grid)
    combos = itertools.product(*(spec.grid[name] for name in names))
    configs = []
    for combo in combos:
        raw = copy.deepcopy(spec.base)
        raw.setdefault("outputs", "out")
        for name, value in zip(names, combo):
            _set_dotted(raw, name, value)
        cfg = parse_config(raw)
        cid = config_id(cfg)
        configs.append(replace(cfg, outputs=os.path.join(spec.outputs, cid[:12])))
    return configs
