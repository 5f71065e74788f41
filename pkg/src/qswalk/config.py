"""Run configuration: an INI file with ``[network]``, ``[dynamics]``,
``[ensemble]``, ``[fit]`` and ``[output]`` sections.

Grids may be written ``start:stop:num`` (inclusive linspace) or as a comma
separated list. Command-line ``--set section.key=value`` pairs override file
values. Every validation error names the offending ``section.key``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_grid"]

KINDS = ("disordered", "dimer", "monomer", "graph")


class ConfigError(ValidationError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def parse_grid(text: str, path: str) -> np.ndarray:
    text = text.strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            grid = np.linspace(float(start), float(stop), int(num))
        else:
            grid = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigError(path, f"cannot parse grid {text!r} ({exc})") from None
    if grid.size == 0:
        raise ConfigError(path, "grid is empty")
    if np.any(np.diff(grid) < 0):
        raise ConfigError(path, "grid must be ascending")
    return grid


def _pair(path: str, text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(path, f"expected 'lo,hi', got {text!r}") from None
    if lo >= hi:
        raise ConfigError(path, "window must satisfy lo < hi")
    return lo, hi


@dataclass
class RunConfig:
    kind: str = "disordered"
    n_nodes: int = 7
    radius: float = 1.0
    min_separation: float = 0.0
    seed: int = 0
    V: float = 1.0
    delta: float = 0.0
    hop_rate: float = 1.0
    adjacency_file: str | None = None
    stiffness_threshold: float = 1e6

    alpha: float = 0.0
    alpha_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 11))
    Gamma: float = 0.5
    gamma: float = 1.0
    time_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 80.0, 161))

    realisations: int = 1
    master_seed: int = 0
    jobs: int = 1

    target: str | None = None
    fit_delta: float = 1.8
    guess: tuple = (0.2, 1.2, 0.6)
    n_starts: int = 8
    power_window: tuple = (5.0, 40.0)
    exp_window: tuple = (10.0, 60.0)

    directory: str = "."
    timestamp: bool = True
    full_state: bool = False

    raw: dict = field(default_factory=dict)

    def provenance(self) -> dict:
        """Effective configuration as flat ``section.key`` entries."""
        return {f"{s}.{k}": v for s, items in sorted(self.raw.items()) for k, v in sorted(items.items())}


def _grid(path, text):
    return parse_grid(text, path)


def _float(path, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(path, f"expected a number, got {text!r}") from None


def _int(path, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(path, f"expected an integer, got {text!r}") from None


def _bool(path, text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(path, f"expected a boolean, got {text!r}")


def _str(path, text):
    return text.strip()


def _triple(path, text):
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 3:
        raise ConfigError(path, f"expected 'Gamma_d,gamma_d,V', got {text!r}")
    return vals


# section -> key -> (RunConfig attribute, parser(path, text))
_SCHEMA = {
    "network": {
        "kind": ("kind", _str),
        "n_nodes": ("n_nodes", _int),
        "radius": ("radius", _float),
        "min_separation": ("min_separation", _float),
        "seed": ("seed", _int),
        "v": ("V", _float),
        "delta": ("delta", _float),
        "hop_rate": ("hop_rate", _float),
        "adjacency_file": ("adjacency_file", _str),
        "stiffness_threshold": ("stiffness_threshold", _float),
    },
    "dynamics": {
        "alpha": ("alpha", _float),
        "alpha_grid": ("alpha_grid", _grid),
        "gamma_source": ("Gamma", _float),
        "gamma_drain": ("gamma", _float),
        "time_grid": ("time_grid", _grid),
    },
    "ensemble": {
        "realisations": ("realisations", _int),
        "master_seed": ("master_seed", _int),
        "jobs": ("jobs", _int),
    },
    "fit": {
        "target": ("target", _str),
        "delta": ("fit_delta", _float),
        "guess": ("guess", _triple),
        "n_starts": ("n_starts", _int),
        "power_window": ("power_window", _pair),
        "exp_window": ("exp_window", _pair),
    },
    "output": {
        "directory": ("directory", _str),
        "timestamp": ("timestamp", _bool),
        "full_state": ("full_state", _bool),
    },
}

# Gamma vs gamma cannot be told apart by configparser (keys are case folded)
_ALIASES = {("dynamics", "source_rate"): "gamma_source", ("dynamics", "drain_rate"): "gamma_drain"}


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (optional) and apply ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError("config", str(exc).splitlines()[0]) from None
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(item, "override must look like section.key=value")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.strip(), value.strip())

    cfg = RunConfig()
    raw: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
        for key, value in parser.items(section):
            key = _ALIASES.get((section, key), key)
            path_ = f"{section}.{key}"
            if key not in _SCHEMA[section]:
                raise ConfigError(path_, "unknown key")
            attr, fn = _SCHEMA[section][key]
            setattr(cfg, attr, fn(path_, value))
            raw.setdefault(section, {})[key] = value
    cfg.raw = raw
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.kind not in KINDS:
        raise ConfigError("network.kind", f"must be one of {', '.join(KINDS)}; got {cfg.kind!r}")
    if cfg.kind == "disordered" and cfg.n_nodes < 2:
        raise ConfigError("network.n_nodes", "must be >= 2")
    if cfg.radius <= 0:
        raise ConfigError("network.radius", "must be positive")
    if cfg.min_separation < 0:
        raise ConfigError("network.min_separation", "must be >= 0")
    if cfg.kind == "graph" and not cfg.adjacency_file:
        raise ConfigError("network.adjacency_file", "required for kind = graph")
    if cfg.hop_rate <= 0:
        raise ConfigError("network.hop_rate", "must be positive")
    if cfg.kind == "dimer" and cfg.V == 0:
        raise ConfigError("network.v", "dimer hopping must be nonzero")
    if not 0 <= cfg.alpha <= 1:
        raise ConfigError("dynamics.alpha", "must lie in [0, 1]")
    if np.any((cfg.alpha_grid < 0) | (cfg.alpha_grid > 1)):
        raise ConfigError("dynamics.alpha_grid", "values must lie in [0, 1]")
    if cfg.Gamma <= 0:
        raise ConfigError("dynamics.gamma_source", "must be positive")
    if cfg.gamma <= 0:
        raise ConfigError("dynamics.gamma_drain", "must be positive")
    if cfg.time_grid[0] < 0:
        raise ConfigError("dynamics.time_grid", "must start at t >= 0")
    if cfg.realisations < 1:
        raise ConfigError("ensemble.realisations", "must be >= 1")
    if cfg.jobs < 1:
        raise ConfigError("ensemble.jobs", "must be >= 1")
    if any(g <= 0 for g in cfg.guess):
        raise ConfigError("fit.guess", "entries must be positive")
    if cfg.n_starts < 1:
        raise ConfigError("fit.n_starts", "must be >= 1")
