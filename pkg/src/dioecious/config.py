"""Flat key-value run configurations for the command-line tool.

A config file is INI text with ``key = value`` lines, either bare or under a
single section header.  Each subcommand has a schema of typed keys; unknown
keys and missing required keys are errors.  Command-line flags override
file values and the environment variable ``STIRRED_SEED`` overrides the seed.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

SEED_ENV = "STIRRED_SEED"


class ConfigError(ValueError):
    """Invalid, unknown or missing configuration keys (exit code 2)."""


@dataclass(frozen=True)
class Key:
    kind: type | tuple  # float, int, str, or a tuple of allowed strings
    default: object = None
    required: bool = False
    help: str = ""


def _opt(*choices):
    return tuple(choices)


GLOBAL_KEYS = {
    "seed": Key(int, 0, help="master seed of the random streams"),
    "output_dir": Key(str, "out", help="directory for CSV, SVG and report files"),
    "threads": Key(int, 1, help="cap on numba worker threads"),
}

SYSTEMS = _opt("sys9", "sys10", "sys11", "sys12", "contact", "individual", "heat")

SCHEMAS: dict[str, dict[str, Key]] = {
    "simulate-ips": {
        "lambda": Key(float, required=True, help="birth rate"),
        "model": Key(_opt("G1", "G2", "decoupled"), "G2"),
        "stirring": Key(_opt("none", "lily-pad", "individual"), "none"),
        "eps": Key(float, None, help="stirring scale; rate eps^-2"),
        "dim": Key(int, 1),
        "torus_side": Key(int, 64),
        "t_end": Key(float, 10.0),
        "replicas": Key(int, 10),
        "n_samples": Key(int, 64),
        "init": Key(_opt("full", "random"), "full"),
        "density": Key(float, 0.5, help="occupation probability per nest for init = random"),
    },
    "solve-pde": {
        "system": Key(SYSTEMS, required=True),
        "lambda": Key(float, required=True),
        "d": Key(int, 2, help="lattice dimension in the coefficients"),
        "coeff": Key(str, None, help="g-i, g-tilde-i, or a number multiplying lambda"),
        "variant": Key(_opt("verbatim", "with_deaths"), "verbatim"),
        "dx": Key(float, 0.1),
        "dt": Key(float, None),
        "t_end": Key(float, 10.0),
        "bc": Key(_opt("neumann", "periodic", "radial"), "neumann"),
        "init": Key(str, "bump(5,1)", help="constant(a[,b]) or bump(L,l[,a,b])"),
        "length": Key(float, 40.0, help="domain length"),
        "output_times": Key(str, None, help="comma-separated times; default t_end"),
    },
    "find-lambda-c": {
        "system": Key(SYSTEMS, required=True),
        "d": Key(int, 2),
        "coeff": Key(str, None),
        "variant": Key(_opt("verbatim", "with_deaths"), "with_deaths"),
        "lo": Key(float, None),
        "hi": Key(float, None),
        "width": Key(float, 1e-3),
        "dx": Key(float, 0.1),
        "horizon": Key(float, 200.0),
        "half_width": Key(float, 40.0),
        "geometry": Key(_opt("planar", "radial"), "planar"),
    },
    "verify-condition-star": {
        "c": Key(float, required=True),
        "grid": Key(int, 2000),
        "samples": Key(int, 10, help="samples per axis of the curve-flow certificate"),
        "flow": Key(_opt("xi", "eta"), "xi"),
    },
    "simulate-op": {
        "gamma": Key(float, required=True),
        "p": Key(float, 0.5),
        "n_levels": Key(int, 200),
        "M": Key(int, 0),
        "replicas": Key(int, 1000),
    },
    "good-event": {
        "lambda": Key(float, required=True),
        "T": Key(float, required=True),
        "replicas": Key(int, 100_000),
    },
    "accept": {
        "suite": Key(_opt("primary"), "primary"),
    },
}


@dataclass
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output_dir"])

    @property
    def threads(self) -> int:
        return int(self.values["threads"])

    def __getitem__(self, key):
        return self.values[key]

    def digest(self) -> str:
        """SHA-256 of the resolved values (output_dir excluded)."""
        payload = {k: v for k, v in self.values.items() if k != "output_dir"}
        text = json.dumps([self.subcommand, payload], sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()


def read_config_file(path) -> dict[str, str]:
    """Raw ``key -> value`` strings from a flat INI file."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (T, M)
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if len(parser.sections()) != 1:
        raise ConfigError(f"{path}: expected at most one section, found {parser.sections()}")
    return dict(parser[parser.sections()[0]])


def _coerce(name: str, key: Key, raw):
    if raw is None:
        return None
    if isinstance(key.kind, tuple):
        text = str(raw).strip()
        match = [c for c in key.kind if c.lower() == text.lower()]
        if not match:
            raise ConfigError(f"{name} must be one of {', '.join(key.kind)} (got {raw!r})")
        return match[0]
    try:
        if key.kind is int:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            return int(str(raw).strip()) if not isinstance(raw, (int, float)) else int(raw)
        if key.kind is float:
            return float(raw)
        return str(raw).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot read {raw!r} as {key.kind.__name__}") from None


def schema_for(subcommand: str) -> dict[str, Key]:
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    return {**SCHEMAS[subcommand], **GLOBAL_KEYS}


def resolve(subcommand: str, file_values: dict | None = None, overrides: dict | None = None,
            environ=None) -> RunConfig:
    """Merge defaults, file values, flag overrides and ``STIRRED_SEED``; validate all keys."""
    schema = schema_for(subcommand)
    environ = os.environ if environ is None else environ
    merged: dict = {}
    for source in (file_values or {}, {k: v for k, v in (overrides or {}).items() if v is not None}):
        unknown = sorted(set(source) - set(schema))
        if unknown:
            raise ConfigError(f"unknown key(s) for {subcommand}: {', '.join(unknown)}")
        merged.update(source)
    if environ.get(SEED_ENV):
        merged["seed"] = environ[SEED_ENV]
    values = {}
    for name, key in schema.items():
        if name in merged:
            values[name] = _coerce(name, key, merged[name])
        elif key.required:
            raise ConfigError(f"missing required key {name!r} for {subcommand}")
        else:
            values[name] = key.default
    if values["threads"] < 1:
        raise ConfigError("threads must be at least 1")
    return RunConfig(subcommand, values)
