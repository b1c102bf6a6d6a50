"""Experiment configuration: defaults table, TOML loading, validation, hashing.

Resolution order: built-in DEFAULTS, then the table named by the GS_DEFAULTS
environment variable (if set), then the --config file, then command-line
flags.  Tables merge key by key.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ValidationError
from .matrices import ComplexSymMatrix
from .poly import MultiPoly
from .potential import Potential, make_potential

DEFAULTS: Dict[str, Any] = {
    "dim": 2,
    "h": [0.05],
    "seed": 0,
    "out": "results",
    # one bump of height 0.3 and radius 1 at the origin
    "potential": {"bumps": [{"center": [0.0, 0.0], "radius": 1.0, "amplitude": 0.3}]},
    # x0 defaults to -3 e1 + 0.3 e2, xi0 to e1; gamma0 = re + i im; q0 = [[alpha, re, im], ...]
    "state": {"gamma0_re": None, "gamma0_im": None, "q0": [[None, 1.0, 0.0]]},
    "integrator": {"tol": 1e-10, "t_max_factor": 1e3},
    "propagate": {"t": 6.0},
    "scatmap": {"omega_angle": 0.0, "eta_max": 1.5, "n": 64},
    "farfield": {"n": 512},
    "resolve": {"X": 20.0, "n": 4096, "n_xi": 512, "harmonics": [0, 3]},
    # oracle runs: a 1-d bump crossing by default
    "oracle": {
        "dim": 1,
        "bumps": [{"center": [0.0], "radius": 2.0, "amplitude": 0.2}],
        "x0": [-3.5], "xi0": [1.0], "gamma": 0.8,
        "L": 40.0, "n": 4096, "dt_per_h": 0.05, "escape_margin": 1.5,
    },
    "eigenfun": {
        "bumps": [{"center": [0.0], "radius": 4.0, "amplitude": 0.2}],
        "x0": [-8.0], "xi0": [1.0], "gamma": 0.4,
        "L": 40.0, "n": 4096, "window": 12.0, "margin": 4.0, "h": [0.2, 0.1],
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc


def defaults_table() -> dict:
    table = copy.deepcopy(DEFAULTS)
    alt = os.environ.get("GS_DEFAULTS")
    if alt:
        table = _merge(table, load_toml(alt))
    return table


def _check_finite(obj, where="config"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise ValidationError(f"{where} is not finite")


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    @classmethod
    def resolve(cls, path: Optional[str] = None, overrides: Optional[dict] = None) -> "ExperimentConfig":
        table = defaults_table()
        if path:
            table = _merge(table, load_toml(path))
        if overrides:
            table = _merge(table, overrides)
        cfg = cls(table)
        cfg.validate()
        return cfg

    def validate(self):
        d = self.data
        _check_finite(d)
        if d["dim"] not in (2, 3):
            raise ValidationError("dim must be 2 or 3")
        hs = d["h"]
        if not isinstance(hs, list) or not hs or any(not (isinstance(x, (int, float)) and x > 0) for x in hs):
            raise ValidationError("h must be a non-empty list of positive numbers")
        if d["integrator"]["tol"] <= 0:
            raise ValidationError("integrator.tol must be positive")
        if d["integrator"]["t_max_factor"] <= 0:
            raise ValidationError("integrator.t_max_factor must be positive")

    def __getitem__(self, key):
        return self.data[key]

    @property
    def dim(self) -> int:
        return int(self.data["dim"])

    @property
    def hs(self) -> list:
        return [float(x) for x in self.data["h"]]

    @property
    def tol(self) -> float:
        return float(self.data["integrator"]["tol"])

    def t_max(self, potential: Potential) -> float:
        """Trapping guard: t_max_factor (T0 + 1)."""
        return float(self.data["integrator"]["t_max_factor"]) * (potential.support_radius + 1.0)

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(json.loads(text))

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    # builders --------------------------------------------------------------

    def potential(self) -> Potential:
        bumps = self.data["potential"]["bumps"]
        d = self.dim
        fitted = []
        for b in bumps:
            c = list(b["center"])
            if len(c) > d:
                raise ValidationError("bump centre has more coordinates than dim")
            fitted.append({**b, "center": c + [0.0] * (d - len(c))})
        return make_potential(fitted, dim=d)

    def state_arrays(self):
        s, d = self.data["state"], self.dim
        x0 = np.asarray(s["x0"], float) if s.get("x0") is not None else _default_x0(d)
        xi0 = np.asarray(s["xi0"], float) if s.get("xi0") is not None else np.eye(d)[0]
        re = np.asarray(s["gamma0_re"], float) if s.get("gamma0_re") is not None else np.eye(d)
        im = np.asarray(s["gamma0_im"], float) if s.get("gamma0_im") is not None else np.zeros((d, d))
        gamma = ComplexSymMatrix(re + 1j * im)
        coeffs = {}
        for alpha, cr, ci in s["q0"]:
            key = tuple(alpha) if alpha is not None else (0,) * d
            if len(key) != d:
                raise ValidationError("q0 multi-index has the wrong length")
            coeffs[key] = complex(cr, ci)
        return x0, xi0, gamma, MultiPoly(d, coeffs)


def _default_x0(d):
    x = np.zeros(d)
    x[0] = -3.0
    x[1] = 0.3
    return x
