"""Run configuration: TOML with dotted keys, validated in one pass.

Schema (every key optional unless marked)::

    observers = ["invariants", "norms", "checkpoints"]

    [grid]
    n = 512                 # even, >= 8
    half_width = 24.0       # box is [-L, L)^2

    [model]
    b = 0.5                 # required, 0 < b < 1
    origin_rule = "lattice" # "cell_average" | "lattice" | "epsilon"
    epsilon = 0.05          # only with origin_rule = "epsilon"
    nonlinear = true        # false runs the free flow

    [init]
    family = "gaussian"     # "gaussian" | "random_band" | "zero"
    amplitude = 0.2
    sigma = 1.0
    center = [0.0, 0.0]
    wavevector = [0.0, 0.0]
    seed = 0                # random_band only
    cutoff = 3.0            # random_band only

    [solver]
    dt = 2.5e-3             # required
    t_end = 2.0             # required
    snapshot_stride = 4     # steps between records
    checkpoint_stride = 40  # steps between checkpoint files, multiple of snapshot_stride
    order_check = false

    [validity]
    boundary_mass_threshold = 1e-6
    shell = 0.1

    [output]
    directory = "out"
    formats = ["csv", "json"]

``alpha`` is never configurable; it is derived from ``b``.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

import tomli_w

from ..nonlinearity import CellAverage, Epsilon, LatticeCorrected, ModelParams, critical_alpha

ORIGIN_RULES = ("cell_average", "lattice", "epsilon")
INIT_FAMILIES = ("gaussian", "random_band", "zero")
OBSERVERS = ("invariants", "norms", "checkpoints")
FORMATS = ("csv", "json")

DEFAULTS: dict = {
    "observers": ["invariants", "norms", "checkpoints"],
    "grid": {"n": 512, "half_width": 24.0},
    "model": {"origin_rule": "lattice", "epsilon": 0.0, "nonlinear": True},
    "init": {
        "family": "gaussian",
        "amplitude": 0.2,
        "sigma": 1.0,
        "center": [0.0, 0.0],
        "wavevector": [0.0, 0.0],
        "seed": 0,
        "cutoff": 3.0,
    },
    "solver": {"snapshot_stride": 1, "checkpoint_stride": 0, "order_check": False},
    "validity": {"boundary_mass_threshold": 1e-6, "shell": 0.1},
    "output": {"directory": "out", "formats": ["csv", "json"]},
}
REQUIRED = {"model": ("b",), "solver": ("dt", "t_end")}


class ConfigError(ValueError):
    """Carries every violation found, not only the first."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class RunConfig:
    data: dict

    def __getitem__(self, section: str):
        return self.data[section]

    @property
    def alpha(self) -> float:
        return critical_alpha(self.data["model"]["b"])

    @property
    def params(self) -> ModelParams:
        m = self.data["model"]
        if m["origin_rule"] == "epsilon":
            rule = Epsilon(m["epsilon"])
        elif m["origin_rule"] == "cell_average":
            rule = CellAverage()
        else:
            rule = LatticeCorrected()
        return ModelParams(m["b"], rule)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def to_toml(self) -> str:
        return tomli_w.dumps(self.data)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def with_output(self, directory: str) -> "RunConfig":
        d = self.to_dict()
        d["output"]["directory"] = str(directory)
        return RunConfig(d)


def _number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_types(data: dict, errors: list[str]) -> None:
    for section, defaults in DEFAULTS.items():
        if section not in data:
            continue
        if not isinstance(defaults, dict):
            continue
        if not isinstance(data[section], dict):
            errors.append(f"[{section}] must be a table")
            continue
        allowed = set(defaults) | set(REQUIRED.get(section, ()))
        for key in data[section]:
            if key not in allowed:
                errors.append(f"unknown key {section}.{key}")
    for key in data:
        if key not in DEFAULTS:
            errors.append(f"unknown key {key}")


def _merge(data: dict) -> dict:
    out = copy.deepcopy(DEFAULTS)
    for section, value in data.items():
        if isinstance(value, dict) and isinstance(out.get(section), dict):
            out[section].update(copy.deepcopy(value))
        else:
            out[section] = copy.deepcopy(value)
    return out


def validate(data: dict) -> list[str]:
    """All violations of the merged configuration ``data``."""
    e: list[str] = []
    for section, keys in REQUIRED.items():
        for k in keys:
            if k not in data.get(section, {}):
                e.append(f"missing required key {section}.{k}")
    g, m, i, s, v, o = (data[k] for k in ("grid", "model", "init", "solver", "validity", "output"))

    n = g["n"]
    if not (isinstance(n, int) and not isinstance(n, bool) and n >= 8 and n % 2 == 0):
        e.append(f"grid.n must be an even integer >= 8, got {n!r}")
    if not (_number(g["half_width"]) and g["half_width"] > 0):
        e.append(f"grid.half_width must be positive, got {g['half_width']!r}")

    if "b" in m:
        b = m["b"]
        if not (_number(b) and 0 < b < 1):
            e.append(f"model.b must be in (0, 1) (range of the global well-posedness and scattering theorem), got {b!r}")
    if m["origin_rule"] not in ORIGIN_RULES:
        e.append(f"model.origin_rule must be one of {ORIGIN_RULES}, got {m['origin_rule']!r}")
    elif m["origin_rule"] == "epsilon" and not (_number(m["epsilon"]) and m["epsilon"] > 0):
        e.append("model.epsilon must be positive with origin_rule = 'epsilon'")
    if not isinstance(m["nonlinear"], bool):
        e.append("model.nonlinear must be true or false")

    if i["family"] not in INIT_FAMILIES:
        e.append(f"init.family must be one of {INIT_FAMILIES}, got {i['family']!r}")
    if not (_number(i["amplitude"]) and i["amplitude"] >= 0):
        e.append(f"init.amplitude must be >= 0, got {i['amplitude']!r}")
    if not (_number(i["sigma"]) and i["sigma"] > 0):
        e.append(f"init.sigma must be positive, got {i['sigma']!r}")
    for key in ("center", "wavevector"):
        val = i[key]
        if not (isinstance(val, list) and len(val) == 2 and all(_number(c) for c in val)):
            e.append(f"init.{key} must be a list of two numbers, got {val!r}")
    if not (isinstance(i["seed"], int) and not isinstance(i["seed"], bool) and i["seed"] >= 0):
        e.append(f"init.seed must be a non-negative integer, got {i['seed']!r}")
    if not (_number(i["cutoff"]) and i["cutoff"] > 0):
        e.append(f"init.cutoff must be positive, got {i['cutoff']!r}")

    dt, t_end = s.get("dt"), s.get("t_end")
    if dt is not None and not (_number(dt) and dt > 0):
        e.append(f"solver.dt must be positive, got {dt!r}")
    if t_end is not None and not (_number(t_end) and t_end > 0):
        e.append(f"solver.t_end must be positive, got {t_end!r}")
    if _number(dt) and _number(t_end) and dt > 0 and t_end > 0:
        steps = t_end / dt
        if abs(steps - round(steps)) > 1e-9 * steps:
            e.append(f"solver.t_end / solver.dt must be an integer, got {steps!r}")
    stride = s["snapshot_stride"]
    if not (isinstance(stride, int) and not isinstance(stride, bool) and stride >= 1):
        e.append(f"solver.snapshot_stride must be a positive integer, got {stride!r}")
    cstride = s["checkpoint_stride"]
    if not (isinstance(cstride, int) and not isinstance(cstride, bool) and cstride >= 0):
        e.append(f"solver.checkpoint_stride must be a non-negative integer, got {cstride!r}")
    elif isinstance(stride, int) and stride >= 1 and cstride % stride:
        e.append("solver.checkpoint_stride must be a multiple of solver.snapshot_stride")
    if not isinstance(s["order_check"], bool):
        e.append("solver.order_check must be true or false")

    thr = v["boundary_mass_threshold"]
    if not (_number(thr) and 0 < thr < 1):
        e.append(f"validity.boundary_mass_threshold must be in (0, 1), got {thr!r}")
    if not (_number(v["shell"]) and 0 < v["shell"] < 0.5):
        e.append(f"validity.shell must be in (0, 0.5), got {v['shell']!r}")

    obs = data["observers"]
    if not (isinstance(obs, list) and all(x in OBSERVERS for x in obs)):
        e.append(f"observers must be a list drawn from {OBSERVERS}, got {obs!r}")
    elif "invariants" not in obs:
        e.append("observers must include 'invariants'")
    if not isinstance(o["directory"], str) or not o["directory"]:
        e.append("output.directory must be a non-empty string")
    fm = o["formats"]
    if not (isinstance(fm, list) and all(x in FORMATS for x in fm)):
        e.append(f"output.formats must be a list drawn from {FORMATS}, got {fm!r}")
    return e


def _canonical(data: dict) -> dict:
    """Floats where floats are meant, so ``half_width = 24`` and ``24.0`` hash alike."""
    for section, key in (("grid", "half_width"), ("model", "b"), ("model", "epsilon"), ("init", "amplitude"),
                         ("init", "sigma"), ("init", "cutoff"), ("solver", "dt"), ("solver", "t_end"),
                         ("validity", "boundary_mass_threshold"), ("validity", "shell")):
        if key in data[section]:
            data[section][key] = float(data[section][key])
    for key in ("center", "wavevector"):
        data["init"][key] = [float(c) for c in data["init"][key]]
    return data


def from_dict(data: dict) -> RunConfig:
    errors: list[str] = []
    _check_types(data, errors)
    if errors:
        raise ConfigError(errors)
    merged = _merge(data)
    errors = validate(merged)
    if errors:
        raise ConfigError(errors)
    return RunConfig(_canonical(merged))


def parse_config(text: str) -> RunConfig:
    """Parse and validate TOML text; raises :class:`ConfigError` listing every problem."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from None
    return from_dict(data)


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return parse_config(text)


def describe(cfg: RunConfig) -> dict:
    """Config plus the derived exponent, as echoed by the CLI and the manifest."""
    alpha = cfg.alpha
    return {"config": cfg.to_dict(), "derived": {"alpha": alpha, "alpha_over_pi": alpha / math.pi}}
