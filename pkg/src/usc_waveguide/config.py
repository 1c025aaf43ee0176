"""Run configuration: strict JSON schema, presets, resolution."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError, ParameterError
from .model import SystemParams, validate_params

PRESET_NAMES = ("fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig5")

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}
_RANGE = {
    "type": "array",
    "items": {"type": "number", "exclusiveMinimum": 0},
    "minItems": 2,
    "maxItems": 2,
}
_PARAM_PROPS = {
    "delta": _NUM, "lambda1": _NUM, "lambda2": _NUM, "theta": _NUM,
    "g": _NUM, "gamma_wg": _NUM, "tau_d": _NUM, "omega_q": _NUM,
}
_PEAKS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"min_height": _NUM, "min_prominence": _NUM},
}


def _block(properties: dict, required=()) -> dict:
    return {"type": "object", "additionalProperties": False,
            "properties": properties, "required": list(required)}


SCHEMA = _block({
    "params": _block(_PARAM_PROPS, ("delta", "lambda1", "lambda2", "g", "gamma_wg")),
    "levels": _block({
        "delta_range": _RANGE,
        "n_points": {"type": "integer", "minimum": 2},
        "n_levels": _POS_INT,
        "n_max": {"type": ["integer", "null"], "minimum": 0},
        "anticrossing": {
            "type": ["array", "null"],
            "items": {"type": "string"}, "minItems": 2, "maxItems": 2,
        },
    }, ("delta_range",)),
    "scatter": _block({
        "omega_range": _RANGE,
        "n_points": {"type": "integer", "minimum": 2},
        "refine_poles": {"type": "boolean"},
        "peaks": _PEAKS,
    }, ("omega_range",)),
    "map": _block({
        "omega_range": _RANGE,
        "delta_range": _RANGE,
        "n_omega": {"type": "integer", "minimum": 2},
        "n_delta": {"type": "integer", "minimum": 2},
    }, ("omega_range", "delta_range")),
    "populations": _block({
        "omega_range": _RANGE,
        "n_points": {"type": "integer", "minimum": 2},
        "refine_poles": {"type": "boolean"},
        "mode": {"enum": ["bare", "dressed"]},
    }, ("omega_range",)),
    "fit": _block({
        "window": _RANGE,
        "n_points": {"type": "integer", "minimum": 8},
        "zoom_widths": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "targets": {
            "type": "array", "minItems": 1, "uniqueItems": True,
            "items": {"enum": ["fano_R", "lorentzian_antisym"]},
        },
    }),
    "oracle": _block({
        "omegas": {"type": "array", "minItems": 1,
                   "items": {"type": "number", "exclusiveMinimum": 0}},
        "n_sites": {"type": "integer", "minimum": 10},
        "hopping": {"type": "number", "exclusiveMinimum": 0},
        "spectral_width": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "max_residual": {"type": "number", "exclusiveMinimum": 0},
    }, ("omegas",)),
    "variants": {
        "type": "array",
        "items": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
                           **_PARAM_PROPS},
            "required": ["name"],
        },
    },
    "output": _block({"dir": {"type": "string"}, "prefix": {"type": "string"}}),
    "counter_rotating": {"type": "boolean"},
    "seed": {"type": ["integer", "null"]},
}, ("params",))

DEFAULTS = {
    "levels": {"n_points": 401, "n_levels": 8, "n_max": None, "anticrossing": ["gg10", "ee00"]},
    "scatter": {"n_points": 2400, "refine_poles": True,
                "peaks": {"min_height": 0.1, "min_prominence": 0.05}},
    "map": {"n_omega": 241, "n_delta": 101},
    "populations": {"n_points": 2400, "refine_poles": True, "mode": "bare"},
    "fit": {"window": [0.9, 1.1], "n_points": 801, "zoom_widths": 20.0,
            "targets": ["fano_R", "lorentzian_antisym"]},
    "oracle": {"n_sites": 8000, "hopping": 0.05, "spectral_width": None, "dt": 4.0,
               "max_residual": 0.01},
}
# peak thresholds are a nested block; merged one level deeper
_NESTED = {("scatter", "peaks")}


@dataclass
class Variant:
    name: str
    params: SystemParams


@dataclass
class RunConfig:
    raw: dict                      # fully resolved config, defaults filled in
    params: SystemParams
    variants: list = field(default_factory=list)
    counter_rotating: bool = True

    def block(self, name: str) -> dict:
        if name not in self.raw:
            raise ConfigError(f"config has no '{name}' block")
        return self.raw[name]

    @property
    def out_dir(self) -> Path:
        return Path(self.raw.get("output", {}).get("dir", "."))

    @property
    def prefix(self) -> str:
        return self.raw.get("output", {}).get("prefix", "")

    @property
    def runs(self) -> list:
        """Variants to execute; a single unnamed run if none are listed."""
        return self.variants or [Variant("", self.params)]

    def dumps(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def _fill_defaults(raw: dict) -> dict:
    out = copy.deepcopy(raw)
    for name, defaults in DEFAULTS.items():
        if name not in out:
            continue
        for key, value in defaults.items():
            if (name, key) in _NESTED:
                out[name][key] = {**value, **out[name].get(key, {})}
            else:
                out[name].setdefault(key, copy.deepcopy(value))
    out.setdefault("counter_rotating", True)
    out.setdefault("seed", None)
    return out


def _check_ranges(cfg: dict):
    for block in ("levels", "scatter", "map", "populations", "fit"):
        for key in ("delta_range", "omega_range", "window"):
            rng = cfg.get(block, {}).get(key)
            if rng is not None and not rng[0] < rng[1]:
                raise ConfigError(f"{block}.{key} must be increasing, got {rng}")
    names = [v["name"] for v in cfg.get("variants", [])]
    if len(set(names)) != len(names):
        raise ConfigError("variant names must be unique")


def load_config(raw: dict) -> RunConfig:
    """Validate a config mapping completely before anything is computed."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    cfg = _fill_defaults(raw)
    _check_ranges(cfg)
    try:
        params = validate_params(cfg["params"])
        variants = []
        for v in cfg.get("variants", []):
            overrides = {k: val for k, val in v.items() if k != "name"}
            variants.append(Variant(v["name"], params.replace(**overrides)))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(cfg, params, variants, cfg["counter_rotating"])


def load_config_file(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return load_config(raw)


def preset_raw(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset '{name}'; choose from {', '.join(PRESET_NAMES)}")
    text = resources.files("usc_waveguide").joinpath("presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_preset(name: str) -> RunConfig:
    return load_config(preset_raw(name))
