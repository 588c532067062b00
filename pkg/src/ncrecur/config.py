"""Experiment configuration: an INI-style file with one level of sections.

Example::

    [experiment]
    scenario = cyclic-rotation
    epsilon = 0.05
    seed = 7
    output = runs/cyclic

    [group]
    family = cone
    d = 1

    [net]
    schedule = 12, 24, 48, 10008
    side = right
    h = 0..11

    [dynamics]
    points = 12
    subset = 0..3

    [tolerances]
    rank_tol = 1e-10
    validation_tol = 1e-9

Values are layered: built-in defaults, then the scenario's defaults, then
the file, then command-line overrides. Integer lists accept ``a..b``
ranges (inclusive). Elements of multi-coordinate groups are written as
``;``-separated tuples, e.g. ``h = 0,1; 1,0``.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from pathlib import Path

SECTIONS = ("experiment", "group", "net", "dynamics", "tolerances")

BASE_DEFAULTS: dict[str, dict[str, str]] = {
    "experiment": {"epsilon": "0.05", "seed": "0", "samples": "32", "output": ""},
    "group": {"family": "cone", "d": "1", "m": ""},
    "net": {"schedule": "auto", "side": "auto", "h": ""},
    "dynamics": {},
    "tolerances": {"rank_tol": "1e-10", "validation_tol": "1e-9"},
}


class ConfigError(ValueError):
    pass


def parse_int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"cannot read integer list item {part!r}") from exc
    return out


def parse_elements(text: str, d: int) -> list[tuple[int, ...]]:
    """Group elements as coordinate tuples."""
    if not text.strip():
        return []
    if d == 1:
        return [(v,) for v in parse_int_list(text)]
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        coords = parse_int_list(chunk)
        if len(coords) != d:
            raise ConfigError(f"element {chunk.strip()!r} needs {d} coordinates")
        out.append(tuple(coords))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    family: str
    d: int
    m: int | None
    schedule: tuple[int, ...] | None
    side: str | None
    h: tuple[tuple[int, ...], ...]
    epsilon: float
    seed: int
    samples: int
    output: str | None
    rank_tol: float
    validation_tol: float
    dynamics: dict[str, str] = field(default_factory=dict)

    def dyn(self, key: str, default: str | None = None) -> str:
        if key in self.dynamics:
            return self.dynamics[key]
        if default is None:
            raise ConfigError(f"scenario {self.scenario!r} needs dynamics.{key}")
        return default

    def dyn_int(self, key: str, default: int | None = None) -> int:
        raw = self.dyn(key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"dynamics.{key} must be an integer, got {raw!r}") from exc

    def dyn_float(self, key: str, default: float | None = None) -> float:
        raw = self.dyn(key, None if default is None else repr(default))
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"dynamics.{key} must be a number, got {raw!r}") from exc

    def as_dict(self) -> dict:
        out = asdict(self)
        out["schedule"] = list(self.schedule) if self.schedule else None
        out["h"] = [list(e) for e in self.h]
        return out


def _merge(layers: list[dict[str, dict[str, str]]]) -> dict[str, dict[str, str]]:
    merged: dict[str, dict[str, str]] = {s: {} for s in SECTIONS}
    for layer in layers:
        for section, values in layer.items():
            if section not in merged:
                raise ConfigError(f"unknown section [{section}]")
            merged[section].update({k: str(v) for k, v in values.items()})
    return merged


def read_file(path: str | Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return {s: dict(parser[s]) for s in parser.sections()}


def build_config(
    sections: dict[str, dict[str, str]],
    scenario_defaults: dict[str, dict[str, str]] | None = None,
    overrides: dict[str, dict[str, str]] | None = None,
) -> ExperimentConfig:
    merged = _merge([BASE_DEFAULTS, scenario_defaults or {}, sections, overrides or {}])
    exp, grp, net, tol = merged["experiment"], merged["group"], merged["net"], merged["tolerances"]
    if not exp.get("scenario"):
        raise ConfigError("no scenario given")
    try:
        d = int(grp["d"])
        m = int(grp["m"]) if grp.get("m") else None
        epsilon = float(exp["epsilon"])
        seed = int(exp["seed"])
        samples = int(exp["samples"])
        rank_tol = float(tol["rank_tol"])
        validation_tol = float(tol["validation_tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    if samples < 1:
        raise ConfigError("samples must be at least 1")
    schedule = None
    if net["schedule"].strip().lower() != "auto":
        schedule = tuple(parse_int_list(net["schedule"]))
        if not schedule:
            raise ConfigError("net.schedule is empty")
        if any(n < 1 for n in schedule) or any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ConfigError("net.schedule must be positive and strictly increasing")
    side = net["side"].strip().lower()
    if side not in ("auto", "left", "right"):
        raise ConfigError(f"net.side must be left, right or auto, got {side!r}")
    d_elems = 3 if grp["family"] == "heisenberg" else d
    return ExperimentConfig(
        scenario=exp["scenario"],
        family=grp["family"],
        d=d,
        m=m,
        schedule=schedule,
        side=None if side == "auto" else side,
        h=tuple(parse_elements(net["h"], d_elems)),
        epsilon=epsilon,
        seed=seed,
        samples=samples,
        output=exp["output"] or None,
        rank_tol=rank_tol,
        validation_tol=validation_tol,
        dynamics=dict(merged["dynamics"]),
    )
