"""Experiment configuration: flat key = value text with [section] headers.

No nesting, no quoting rules: every meaningful line is either "[section]"
or "key = value".  Lists are whitespace-separated; times also accept the
log-spaced form "logspace <lo> <hi> <n>".  Parsing failures carry the
1-based line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .analysis import INITIAL_PRESETS
from .errors import ConfigError

KNOWN_METRICS = (
    "mass", "m2", "m4",
    "d2_selfsim", "d3_selfsim", "d2_gap", "d2_selfsim_heat",
    "l1_reg_gap", "l1_heat_gap", "entropy_reg",
)
KNOWN_CHECKS = ("heat_decay", "d2_bound", "d3_bound")


@dataclass
class ExperimentConfig:
    kernel: str = "rosenau"
    sigma: float = 1.0
    epsilons: List[float] = field(default_factory=lambda: [0.1])
    times: List[float] = field(default_factory=lambda: [1.0, 10.0])
    initial: str = "gaussian-unit"
    metrics: List[str] = field(default_factory=list)
    checks: List[str] = field(default_factory=list)
    outputs: str = "results"
    grid_length: Optional[float] = None
    grid_points: Optional[int] = None

    def validate(self) -> None:
        if not self.epsilons:
            raise ConfigError("epsilons list is empty")
        if not self.times:
            raise ConfigError("times list is empty")
        if any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive")
        if any(t <= 0 for t in self.times):
            raise ConfigError("times must be positive")
        if not self.metrics and not self.checks:
            raise ConfigError("nothing to do: no metrics and no checks requested")
        for m in self.metrics:
            if m not in KNOWN_METRICS:
                raise ConfigError(f"unknown metric {m!r}; known: {', '.join(KNOWN_METRICS)}")
        for c in self.checks:
            if c not in KNOWN_CHECKS:
                raise ConfigError(f"unknown check {c!r}; known: {', '.join(KNOWN_CHECKS)}")
        if not (self.kernel in ("rosenau", "central-diff") or self.kernel.startswith("custom:")):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if not (self.initial in INITIAL_PRESETS or self.initial.startswith("file:")):
            raise ConfigError(f"unknown initial datum {self.initial!r}")


def _parse_times(value: str, line_no: int) -> List[float]:
    parts = value.split()
    if parts and parts[0] == "logspace":
        if len(parts) != 4:
            raise ConfigError("logspace needs exactly: logspace <lo> <hi> <n>", line_no)
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        if lo <= 0 or hi <= lo or n < 2:
            raise ConfigError("logspace needs 0 < lo < hi and n >= 2", line_no)
        return [float(x) for x in np.geomspace(lo, hi, n)]
    try:
        return [float(x) for x in parts]
    except ValueError as exc:
        raise ConfigError(f"bad time value: {exc}", line_no)


def parse_config(text: str, path: str = "<config>") -> ExperimentConfig:
    cfg = ExperimentConfig()
    section = ""
    seen_any = False
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("experiment", "grid"):
                raise ConfigError(f"unknown section [{section}]", i)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", i)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        seen_any = True
        try:
            if section in ("", "experiment"):
                if key == "kernel":
                    cfg.kernel = value
                elif key == "sigma":
                    cfg.sigma = float(value)
                elif key == "epsilons":
                    cfg.epsilons = [float(x) for x in value.split()]
                elif key == "times":
                    cfg.times = _parse_times(value, i)
                elif key == "initial":
                    cfg.initial = value
                elif key == "metrics":
                    cfg.metrics = value.split()
                    for m in cfg.metrics:
                        if m not in KNOWN_METRICS:
                            raise ConfigError(
                                f"unknown metric {m!r}; known: {', '.join(KNOWN_METRICS)}", i)
                elif key == "checks":
                    cfg.checks = value.split()
                    for c in cfg.checks:
                        if c not in KNOWN_CHECKS:
                            raise ConfigError(
                                f"unknown check {c!r}; known: {', '.join(KNOWN_CHECKS)}", i)
                elif key in ("out", "outputs"):
                    cfg.outputs = value
                else:
                    raise ConfigError(f"unknown key {key!r} in [experiment]", i)
            elif section == "grid":
                if key in ("l", "length"):
                    cfg.grid_length = None if value == "auto" else float(value)
                elif key in ("n", "points"):
                    cfg.grid_points = None if value == "auto" else int(value)
                else:
                    raise ConfigError(f"unknown key {key!r} in [grid]", i)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", i)
    if not seen_any:
        raise ConfigError(f"{path}: empty configuration")
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), path=path)
