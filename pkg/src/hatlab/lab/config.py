"""Experiment configuration, parameter schemas and replica seeding."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXPERIMENTS = (
    "simulate",
    "collapse-scaling",
    "stationary-tail",
    "diffusivity",
    "spiral-sweep",
    "audit-bounds",
    "kernel-table",
    "hm",
    "escape",
)


class ConfigError(ValueError):
    pass


def _int_list(v):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    return [int(s) for s in v]


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


# name -> (converter, default, check, description)
SCHEMAS: dict[str, dict] = {
    "simulate": {
        "init": (str, "line", None, "line, pair:d, or a path to an 'x y' site file"),
        "steps": (int, 1000, _positive, "number of chain steps"),
        "thin": (int, 1, _positive, "keep every k-th record"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "collapse-scaling": {
        "d_list": (_int_list, [32, 64, 128, 256, 512, 1024], lambda v: len(v) > 0 and min(v) > 0, "initial separations"),
        "replicas": (int, 64, _positive, "replicas per separation"),
        "r_stop": (float, None, _positive, "collapse target diameter (default max(5, 2n))"),
        "max_steps": (int, 100000, _positive, "per-replica step cap"),
        "method": (str, "chain", lambda v: v in ("chain", "algorithm1"), "run the plain chain or the clustering loop"),
        "delta": (float, None, _nonneg, "clustering-loop exponent (default (3n)^-2)"),
        "radius": (int, None, lambda v: 4 <= v <= 4096, "exact potential-kernel radius (default sized to the largest d)"),
    },
    "stationary-tail": {
        "steps": (int, 100000, _positive, "chain steps"),
        "burn_in": (float, 0.1, lambda v: 0 <= v < 1, "fraction of steps discarded"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "diffusivity": {
        "steps": (int, 1000000, _positive, "chain steps per replica"),
        "replicas": (int, 1, _positive, "independent replicas"),
        "bootstrap": (int, 200, _positive, "bootstrap resamples for intervals"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "spiral-sweep": {
        "n_list": (_int_list, list(range(8, 41, 4)), lambda v: len(v) > 0 and min(v) >= 4, "spiral sizes"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "audit-bounds": {
        "samples": (int, 10000, _positive, "kernel audit samples"),
        "random_sets": (int, 50, _positive, "random sets for the escape audits"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "kernel-table": {
        "radius": (int, 256, lambda v: 4 <= v <= 4096, "exact potential-kernel radius"),
    },
    "hm": {
        "set": (str, None, None, "path to an 'x y' site file"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
    "escape": {
        "set": (str, None, None, "path to an 'x y' site file"),
        "start": (_int_list, None, lambda v: len(v) == 2, "start site x,y (must belong to the set)"),
        "distance": (float, None, lambda v: v >= 1, "fattening distance d"),
        "radius": (int, 256, _positive, "exact potential-kernel radius"),
    },
}

REQUIRED = {"hm": ("set",), "escape": ("set", "start", "distance")}


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 3
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output: str = "out/run"
    format: str = "csv"
    threads: int = 1

    def validate(self) -> "ExperimentConfig":
        """Check and normalize every field; raises ConfigError before any compute."""
        if self.experiment not in SCHEMAS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError("n must be an integer >= 2")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must fit in 64 bits")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if int(self.threads) < 1:
            raise ConfigError("threads must be positive")
        schema = SCHEMAS[self.experiment]
        unknown = set(self.parameters) - set(schema)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        clean = {}
        for name, (conv, default, check, _) in schema.items():
            raw = self.parameters.get(name, default)
            if raw is None:
                if name in REQUIRED.get(self.experiment, ()):
                    raise ConfigError(f"{self.experiment} needs --{name.replace('_', '-')}")
                clean[name] = None
                continue
            try:
                val = conv(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"parameter {name}: {exc}") from exc
            if check is not None and not check(val):
                raise ConfigError(f"parameter {name} out of range: {raw!r}")
            clean[name] = val
        self.parameters = clean
        self.seed = int(self.seed)
        self.threads = int(self.threads)
        return self

    def digest(self) -> str:
        blob = json.dumps(
            {"experiment": self.experiment, "n": self.n, "parameters": self.parameters, "seed": self.seed},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "n": self.n,
            "parameters": self.parameters,
            "seed": self.seed,
            "output": self.output,
            "format": self.format,
        }


def load_config_file(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def replica_seed(seed: int, replica: int) -> int:
    """Counter-based stream key: a hash of (seed, replica index) through SeedSequence."""
    return int(np.random.SeedSequence([int(seed), int(replica)]).generate_state(1, dtype=np.uint64)[0])


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.default_rng(replica_seed(seed, replica))
