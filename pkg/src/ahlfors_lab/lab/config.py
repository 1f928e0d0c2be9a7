"""Experiment configuration and report records."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..curves import CurveSpec, generate
from ..geometry import SampledCurve, curve_from_dict, load_json

EXPERIMENTS = ("E1", "E2", "E3", "E4", "E5", "E6")
REPORT_SCHEMA = "ahlfors-lab/report/1"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """What to run and with which knobs.

    ``corpus`` entries are either curve specs ({"kind", "samples", "params"})
    or {"file": path} pointing at a curve JSON. ``params`` and ``tolerances``
    override per-experiment defaults key by key.
    """

    experiment: str
    corpus: list | None = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        for entry in self.corpus or []:
            if not isinstance(entry, dict):
                raise ConfigError("corpus entries must be objects")
            if "file" in entry and not os.path.isfile(entry["file"]):
                raise ConfigError(f"corpus file not found: {entry['file']}")
            if "file" not in entry and "kind" not in entry:
                raise ConfigError("corpus entry needs 'kind' or 'file'")

    @classmethod
    def from_dict(cls, d: dict, experiment: str | None = None) -> "ExperimentConfig":
        allowed = {"experiment", "corpus", "params", "tolerances", "seed", "out_dir"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if experiment is not None:
            d["experiment"] = experiment
        if "experiment" not in d:
            raise ConfigError("config names no experiment")
        return cls(**d)

    @classmethod
    def load(cls, path, experiment: str | None = None) -> "ExperimentConfig":
        try:
            data = load_json(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, experiment)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "corpus": self.corpus,
            "params": self.params,
            "tolerances": self.tolerances,
            "seed": self.seed,
        }


def corpus_entry_name(entry: dict) -> str:
    if "name" in entry:
        return str(entry["name"])
    if "file" in entry:
        return os.path.splitext(os.path.basename(entry["file"]))[0]
    params = ",".join(f"{k}={entry.get('params', {})[k]}" for k in sorted(entry.get("params", {})))
    return f"{entry['kind']}({params})" if params else entry["kind"]


def load_corpus_entry(entry: dict) -> SampledCurve:
    if "file" in entry:
        return curve_from_dict(load_json(entry["file"]))
    return generate(CurveSpec(entry["kind"], int(entry.get("samples", 1024)), dict(entry.get("params", {}))))


def clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    return obj


@dataclass
class Check:
    name: str
    passed: bool
    measured: object
    bound: object = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "measured": self.measured,
                "bound": self.bound, "detail": self.detail}


@dataclass
class Report:
    experiment: str
    anchor: str
    config: dict
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    profiles: list = field(default_factory=list)
    error: dict | None = None

    def check(self, name: str, passed, measured, bound=None, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), measured, bound, detail))
        return bool(passed)

    def profile(self, name: str, scale, value, x_label: str = "r", y_label: str = "ratio") -> None:
        self.profiles.append({
            "name": name, "x_label": x_label, "y_label": y_label,
            "scale": np.asarray(scale, dtype=float), "value": np.asarray(value, dtype=float),
        })

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return clean({
            "schema": REPORT_SCHEMA,
            "experiment": self.experiment,
            "anchor": self.anchor,
            "passed": self.passed,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "data": self.data,
            "profiles": self.profiles,
            "error": self.error,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

