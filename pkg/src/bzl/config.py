"""Experiment configuration: one TOML (or JSON) file, validated strictly."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigParse
from .weights import FAMILIES

EXPERIMENTS = (
    "kernel-diagnostics",
    "decay-fit",
    "equilibrium",
    "conditions",
    "clt-run",
    "hypothesis-check",
)

WEIGHT_KEYS = {
    "gaussian": {"scale"},
    "power": {"p"},
    "gaussian_bump": {"amp_exponent", "bump_center", "bump_radius", "bump_height", "scale"},
    "gaussian_sine": {"scale"},
}


@dataclass
class ExperimentConfig:
    experiment: str = "clt-run"
    weight: dict = field(default_factory=lambda: {"family": "gaussian", "scale": 0.5})
    n: list = field(default_factory=lambda: [50])
    trials: int = 2000
    seed: int = 20261016
    test_function: dict = field(default_factory=lambda: {"center": [0.0, 0.0], "radius": 0.6})
    quadrature: dict = field(default_factory=lambda: {"R": "auto", "n_radial": "auto", "n_angular": "auto"})
    out: str = "bzl-out"
    dual_route: bool = True
    radii: list = field(default_factory=lambda: [0.1 + 0.7 * i / 39 for i in range(40)])
    base_point: list = field(default_factory=lambda: [0.0, 0.0])
    direction: list = field(default_factory=lambda: [1.0, 0.0])
    X: dict = field(default_factory=lambda: {"center": [0.0, 0.0], "radius": 0.6})
    grid_size: int = 20
    R: float = 3.0
    epsilon: float = 1.0
    U: dict = field(default_factory=lambda: {"center": [0.0, 0.0], "radius": 0.6})
    probe_points: list = field(default_factory=lambda: [[0.0, 0.0], [0.5, 0.0], [0.3, 0.3]])

    def to_dict(self):
        return asdict(self)


def _point(key, value):
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value)):
        raise ConfigParse(key, "expected a [re, im] pair")
    return [float(value[0]), float(value[1])]


def _disc(key, value):
    if not isinstance(value, dict) or set(value) - {"center", "radius"}:
        raise ConfigParse(key, "expected a table with keys center, radius")
    radius = value.get("radius", 0.6)
    if not isinstance(radius, (int, float)) or radius <= 0:
        raise ConfigParse(f"{key}.radius", "must be a positive number")
    return {"center": _point(f"{key}.center", value.get("center", [0.0, 0.0])), "radius": float(radius)}


def _positive_int(key, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigParse(key, f"must be an integer >= {minimum}")
    return value


def validate(raw: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    known = set(cfg.to_dict())
    for key in raw:
        if key not in known:
            raise ConfigParse(key, "unknown key")

    if "experiment" in raw:
        if raw["experiment"] not in EXPERIMENTS:
            raise ConfigParse("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
        cfg.experiment = raw["experiment"]

    if "weight" in raw:
        w = raw["weight"]
        if not isinstance(w, dict) or w.get("family") not in FAMILIES:
            raise ConfigParse("weight.family", f"must be one of {', '.join(FAMILIES)}")
        extra = set(w) - {"family"} - WEIGHT_KEYS[w["family"]]
        if extra:
            raise ConfigParse(f"weight.{sorted(extra)[0]}", "unknown key")
        cfg.weight = dict(w)

    if "n" in raw:
        n = raw["n"] if isinstance(raw["n"], list) else [raw["n"]]
        if not n:
            raise ConfigParse("n", "must not be empty")
        cfg.n = [_positive_int("n", v) for v in n]

    if "trials" in raw:
        cfg.trials = _positive_int("trials", raw["trials"], 100)
    if "seed" in raw:
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigParse("seed", "must be an unsigned 64-bit integer")
        cfg.seed = seed
    if "grid_size" in raw:
        cfg.grid_size = _positive_int("grid_size", raw["grid_size"], 2)

    if "test_function" in raw:
        cfg.test_function = _disc("test_function", raw["test_function"])
    for key in ("X", "U"):
        if key in raw:
            setattr(cfg, key, _disc(key, raw[key]))

    if "quadrature" in raw:
        q = raw["quadrature"]
        if not isinstance(q, dict) or set(q) - {"R", "n_radial", "n_angular"}:
            raise ConfigParse("quadrature", "expected keys R, n_radial, n_angular")
        merged = dict(cfg.quadrature, **q)
        for key, value in merged.items():
            if value == "auto":
                continue
            if key == "R":
                if not isinstance(value, (int, float)) or value <= 0:
                    raise ConfigParse("quadrature.R", "must be 'auto' or a positive number")
            else:
                _positive_int(f"quadrature.{key}", value, 2 if key == "n_radial" else 4)
        cfg.quadrature = merged

    for key in ("R", "epsilon"):
        if key in raw:
            value = raw[key]
            if not isinstance(value, (int, float)) or value <= 0:
                raise ConfigParse(key, "must be a positive number")
            setattr(cfg, key, float(value))
    if "R" in raw and cfg.R <= 1:
        raise ConfigParse("R", "must exceed 1")

    if "radii" in raw:
        radii = raw["radii"]
        if not isinstance(radii, list) or len(radii) < 4 or not all(isinstance(r, (int, float)) and r > 0 for r in radii):
            raise ConfigParse("radii", "need at least four positive radii")
        cfg.radii = [float(r) for r in radii]
    for key in ("base_point", "direction"):
        if key in raw:
            setattr(cfg, key, _point(key, raw[key]))
    if "probe_points" in raw:
        pts = raw["probe_points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigParse("probe_points", "expected a list of [re, im] pairs")
        cfg.probe_points = [_point("probe_points", p) for p in pts]
    if "dual_route" in raw:
        if not isinstance(raw["dual_route"], bool):
            raise ConfigParse("dual_route", "must be a boolean")
        cfg.dual_route = raw["dual_route"]
    if "out" in raw:
        if not isinstance(raw["out"], str):
            raise ConfigParse("out", "must be a path string")
        cfg.out = raw["out"]
    return cfg


def load(path) -> ExperimentConfig:
    """Read a TOML config, or a JSON config / run manifest."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
            if "resolved_config" in raw:
                raw = raw["resolved_config"]
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigParse(str(path), f"cannot parse: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigParse(str(path), "top level must be a table")
    return validate(raw)
