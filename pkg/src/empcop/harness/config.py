"""Experiment configuration: defaults, flat key=value files, CLI overrides."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

OUT_ENV = "EMPCOP_OUT"
EXPERIMENTS = ("rate", "multiplier", "limit-compare", "check-conditions", "sample")
FUNCTIONALS = ("sup_abs", "cvm")


@dataclass(frozen=True)
class Thresholds:
    """Verdict thresholds for desk-scale Monte Carlo; calibration choices, echoed in reports."""

    slope_min: float = -0.40
    slope_max: float = -0.15
    ratio_max: float = 1.5
    ks_max: float = 0.10
    variance_se: float = 3.0


DEFAULTS = {
    "rate": {"n": (100, 400, 1600, 6400), "reps": 200, "grid": 41},
    "multiplier": {"n": (1000,), "reps": 1000, "boot": 1000, "grid": 21},
    "limit-compare": {"n": (2000,), "reps": 1000, "grid": 21},
    "check-conditions": {},
    "sample": {"n": (1000,)},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: str = "family=independence"
    n: tuple = (1000,)
    reps: int = 200
    boot: int = 1000
    grid: int = 41
    functional: tuple = ("sup_abs",)
    seed: int = 20240601
    out: str = ""
    force: bool = False
    outer: int = 10
    law: str = "standard_normal"
    fd_c: float = 1.0
    fd_K: float = 1.0
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        n = tuple(int(x) for x in self.n)
        object.__setattr__(self, "n", n)
        if not n or any(x < 1 for x in n):
            raise ValueError("sample sizes must be at least 1")
        if any(b <= a for a, b in zip(n, n[1:])):
            raise ValueError("the n schedule must be strictly increasing")
        for name in ("reps", "boot", "grid", "outer"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.grid < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        func = (self.functional,) if isinstance(self.functional, str) else tuple(self.functional)
        for f in func:
            if f not in FUNCTIONALS:
                raise ValueError(f"unknown functional {f!r}; choose from {FUNCTIONALS}")
        object.__setattr__(self, "functional", func)
        if not self.out:
            object.__setattr__(self, "out", default_out_dir(self.experiment))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n"] = list(self.n)
        out["functional"] = list(self.functional)
        return out


def default_out_dir(experiment: str) -> str:
    base = os.environ.get(OUT_ENV, "empcop_out")
    return str(Path(base) / experiment)


def _parse_int_list(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(float(x)) for x in str(text).replace(";", ",").split(",") if x.strip())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_THRESHOLD_KEYS = {f.name for f in fields(Thresholds)}
_CONVERTERS = {
    "model": str,
    "n": _parse_int_list,
    "reps": int,
    "boot": int,
    "grid": int,
    "functional": lambda s: tuple(x.strip() for x in str(s).split(",") if x.strip()),
    "seed": int,
    "out": str,
    "force": _parse_bool,
    "outer": int,
    "law": str,
    "fd_c": float,
    "fd_K": float,
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys may use dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_config(experiment: str, file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the config file, then explicit overrides (CLI flags)."""
    merged = dict(DEFAULTS.get(experiment, {}))
    thresholds = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            key = key.replace("-", "_")
            if key in _THRESHOLD_KEYS:
                thresholds[key] = float(value)
            elif key in _CONVERTERS:
                merged[key] = _CONVERTERS[key](value)
            elif key == "experiment":
                continue
            else:
                raise ValueError(f"unknown configuration key {key!r}")
    return ExperimentConfig(experiment=experiment, thresholds=Thresholds(**thresholds), **merged)


__all__ = [
    "DEFAULTS",
    "EXPERIMENTS",
    "ExperimentConfig",
    "FUNCTIONALS",
    "OUT_ENV",
    "Thresholds",
    "build_config",
    "default_out_dir",
    "read_config_file",
]
