"""Named experiment scenarios runnable from the command line."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    State,
    indicator_element,
    matrix_unit,
)
from .config import ConfigError, ExperimentConfig, parse_int_list
from .dynamics import DynMap, StarDynamicalSystem, conjugation_from_unitary, koopman_from_map
from .semigroup import Family, FolnerNet, SemigroupModel, Side, box_folner_net, word_ball

MIN_SUMMANDS = 10_000


@dataclass
class ScenarioSetup:
    system: StarDynamicalSystem
    a: AlgebraElement
    b: AlgebraElement
    net: FolnerNet
    h_set: list
    side: Side
    exponents: tuple[int, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict[str, dict[str, str]]
    build: Callable[[ExperimentConfig], ScenarioSetup] = field(repr=False)
    broken: bool = False


def _model(cfg: ExperimentConfig) -> SemigroupModel:
    try:
        family = Family(cfg.family)
    except ValueError as exc:
        raise ConfigError(f"unknown group family {cfg.family!r}") from exc
    return SemigroupModel(family, cfg.d, cfg.m)


def _auto_schedule(model: SemigroupModel, period: int) -> tuple[int, ...]:
    """Half a period, a full period, then doublings until a box holds MIN_SUMMANDS elements."""
    exponent = 4 if model.family is Family.HEISENBERG else model.d
    sizes = {max(1, period // 2), period}
    n = period
    while n**exponent < MIN_SUMMANDS:
        n *= 2
        sizes.add(n)
    return tuple(sorted(sizes))


def _finish(cfg, model, system, a, b, period, default_side=Side.RIGHT, exponents=()) -> ScenarioSetup:
    schedule = cfg.schedule or _auto_schedule(model, period)
    net = box_folner_net(model, schedule)
    side = Side(cfg.side) if cfg.side else default_side
    extra = [model.element(*c) for c in cfg.h]
    h_set = sorted(set(word_ball(model, 3)) | set(extra), key=lambda e: e.coords)
    return ScenarioSetup(system, a, b, net, h_set, side, tuple(exponents))


def _subset(cfg, key, default, m) -> list[int]:
    values = parse_int_list(cfg.dyn(key, default))
    if any(not 0 <= v < m for v in values):
        raise ConfigError(f"dynamics.{key} has indices outside 0..{m - 1}")
    return values


def _require_family(cfg, model, *families):
    if model.family not in families:
        names = ", ".join(f.value for f in families)
        raise ConfigError(f"scenario {cfg.scenario!r} needs group family {names}")


def _rotation(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    _require_family(cfg, model, Family.CONE, Family.CYCLIC)
    if model.d != 1:
        raise ConfigError("rotation scenarios use a one-generator group (d = 1)")
    m = cfg.dyn_int("points")
    step = cfg.dyn_int("step", 1)
    shift = koopman_from_map(lambda x: (x + step) % m, m)
    system = StarDynamicalSystem(shift.descriptor, State.uniform(m), model, (shift,))
    a = indicator_element(m, _subset(cfg, "subset", "0", m))
    exps = tuple(parse_int_list(cfg.dyn("exponents", "")))
    return _finish(cfg, model, system, a, a, m, exponents=exps)


def _identity(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    desc = AlgebraDescriptor((2, 1))
    rho = State(desc, (np.array([[0.4, 0.1j], [-0.1j, 0.2]]), np.array([[0.4]])))
    maps = tuple(DynMap.identity(desc) for _ in model.generators)
    system = StarDynamicalSystem(desc, rho, model, maps)
    a = matrix_unit(desc, 0, 0, 0) + matrix_unit(desc, 0, 0, 1) + 0.5 * matrix_unit(desc, 1, 0, 0)
    side = Side.RIGHT if model.abelian else Side.LEFT
    return _finish(cfg, model, system, a, a, 1, default_side=side)


def _qubit(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    _require_family(cfg, model, Family.CONE)
    if model.d != 1:
        raise ConfigError("qubit-conjugation uses one generator (d = 1)")
    theta = cfg.dyn_float("theta", 1.0)
    desc = AlgebraDescriptor.matrices(2)
    v = np.diag([1.0, np.exp(1j * theta)])
    tau = conjugation_from_unitary(v, desc)
    system = StarDynamicalSystem(desc, State.tracial(desc), model, (tau,))
    a = matrix_unit(desc, 0, 0, 0) + matrix_unit(desc, 0, 0, 1)
    return _finish(cfg, model, system, a, a, 1)


def torus_shift_maps(m: int) -> tuple[DynMap, DynMap]:
    """Koopman maps of the unit shifts on the m x m torus, point (x, y) at index x*m + y."""
    right = koopman_from_map(lambda p: ((p // m + 1) % m) * m + p % m, m * m)
    up = koopman_from_map(lambda p: (p // m) * m + (p % m + 1) % m, m * m)
    return right, up


def _lattice(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    _require_family(cfg, model, Family.LATTICE, Family.CONE)
    if model.d != 2:
        raise ConfigError("lattice-Z2-shift needs d = 2")
    m = cfg.dyn_int("points", 5)
    maps = torus_shift_maps(m)
    system = StarDynamicalSystem(maps[0].descriptor, State.uniform(m * m), model, maps)
    a = indicator_element(m * m, _subset(cfg, "subset", f"0..{2 * m - 1}", m * m))
    return _finish(cfg, model, system, a, a, m)


def heisenberg_index(a: int, b: int, c: int, m: int) -> int:
    return ((a % m) * m + (b % m)) * m + (c % m)


def heisenberg_koopman_maps(m: int) -> tuple[DynMap, DynMap, DynMap]:
    """Koopman maps of right multiplication by x, y, z on the Heisenberg group mod m.

    Right multiplication makes g ↦ τ_g a homomorphism: τ_g τ_h f(p) = f(p g h).
    """
    def right_mult(gen):
        ga, gb, gc = gen

        def T(p):
            a, rest = divmod(p, m * m)
            b, c = divmod(rest, m)
            return heisenberg_index(a + ga, b + gb, c + gc + a * gb, m)

        return koopman_from_map(T, m**3)

    return tuple(right_mult(g) for g in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def _heisenberg(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    _require_family(cfg, model, Family.HEISENBERG)
    m = cfg.dyn_int("points", 5)
    maps = heisenberg_koopman_maps(m)
    system = StarDynamicalSystem(maps[0].descriptor, State.uniform(m**3), model, maps)
    a = indicator_element(m**3, _subset(cfg, "subset", f"0..{m * m - 1}", m**3))
    return _finish(cfg, model, system, a, a, m, default_side=Side.LEFT)


def _bad_unital(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    m = cfg.dyn_int("points", 3)
    shift = koopman_from_map(lambda x: (x + 1) % m, m).scaled(2.0)
    system = StarDynamicalSystem(shift.descriptor, State.uniform(m), model, (shift,) * model.d)
    a = AlgebraElement.unit(shift.descriptor)
    return _finish(cfg, model, system, a, a, m)


def _bad_homomorphism(cfg: ExperimentConfig) -> ScenarioSetup:
    model = _model(cfg)
    if model.d != 2 or not model.abelian:
        raise ConfigError("bad-homomorphism needs an abelian group with d = 2")
    swap = koopman_from_map([1, 0, 2])
    cycle = koopman_from_map([1, 2, 0])
    system = StarDynamicalSystem(swap.descriptor, State.uniform(3), model, (swap, cycle))
    a = AlgebraElement.unit(swap.descriptor)
    return _finish(cfg, model, system, a, a, 3)


REGISTRY: dict[str, Scenario] = {}


def register(s: Scenario) -> Scenario:
    REGISTRY[s.name] = s
    return s


register(Scenario(
    "identity",
    "τ = identity on M2 + C with a faithful state; every vector is fixed",
    {"group": {"family": "cone", "d": "1"}, "net": {"schedule": "1, 10, 100, 1000, 10000"}},
    _identity,
))
register(Scenario(
    "cyclic-rotation",
    "Koopman shift x -> x+1 on C_m (uniform measure), A = B = indicator of S",
    {
        "group": {"family": "cone", "d": "1"},
        "dynamics": {"points": "12", "subset": "0..3"},
    },
    _rotation,
))
register(Scenario(
    "cyclic-multirec",
    "shift on C_64 with S = {0..15}; multiple recurrence along g, g^2",
    {
        "experiment": {"epsilon": "0.01"},
        "group": {"family": "cone", "d": "1"},
        "dynamics": {"points": "64", "subset": "0..15", "exponents": "1, 2"},
    },
    _rotation,
))
register(Scenario(
    "qubit-conjugation",
    "M2 with ρ = I/2, τ = conjugation by diag(1, e^{iθ}), A = E11 + E12",
    {
        "experiment": {"epsilon": "0.01"},
        "group": {"family": "cone", "d": "1"},
        "net": {"schedule": "10, 100, 1000, 10000"},
        "dynamics": {"theta": "1.0"},
    },
    _qubit,
))
register(Scenario(
    "lattice-Z2-shift",
    "Z^2 acting on the m x m torus by unit shifts, uniform measure",
    {"group": {"family": "lattice", "d": "2"}, "dynamics": {"points": "5"}},
    _lattice,
))
register(Scenario(
    "heisenberg-koopman",
    "Heisenberg group acting on itself mod m by right translation; left windows",
    {
        "group": {"family": "heisenberg", "d": "3"},
        "net": {"side": "left"},
        "dynamics": {"points": "5"},
    },
    _heisenberg,
))
register(Scenario(
    "bad-unital",
    "deliberately broken: shift scaled by 2, so τ(1) = 2",
    {"group": {"family": "cone", "d": "1"}},
    _bad_unital,
    broken=True,
))
register(Scenario(
    "bad-homomorphism",
    "deliberately broken: non-commuting generator maps for an abelian K",
    {"group": {"family": "cone", "d": "2"}},
    _bad_homomorphism,
    broken=True,
))


def get_scenario(name: str) -> Scenario:
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigError(f"unknown scenario {name!r}; known: {known}") from None


def list_scenarios() -> list[tuple[str, str]]:
    return [(s.name, s.description + (" [broken]" if s.broken else "")) for s in REGISTRY.values()]
