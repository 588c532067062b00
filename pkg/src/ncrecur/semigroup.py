"""Discrete groups, their subsemigroups and box-shaped Følner nets.

Every group here is countable and discrete, so Haar measure is counting
measure, every subset is Borel and every group is unimodular. Integrals
over a finite set are plain sums.

Four families are supported:

``lattice``    Z^d, with K = Z^d.
``cone``       Z^d, with K = N_0^d (all coordinates non-negative).
``cyclic``     (Z/m)^d, with K the whole finite group.
``heisenberg`` integer upper unitriangular 3x3 matrices, written (a, b, c)
               with (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab'), and
               K = {a, b, c >= 0}.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable


class Family(str, Enum):
    LATTICE = "lattice"
    CONE = "cone"
    CYCLIC = "cyclic"
    HEISENBERG = "heisenberg"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, order=True)
class GroupElement:
    family: Family
    coords: tuple[int, ...]

    def __repr__(self) -> str:
        return f"{self.family.value}{self.coords}"


@dataclass(frozen=True)
class SemigroupModel:
    """A discrete group G together with the subsemigroup K the dynamics runs on."""

    family: Family
    d: int = 1
    m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.HEISENBERG:
            object.__setattr__(self, "d", 3)
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")
        if self.family is Family.CYCLIC:
            if self.m is None or self.m < 1:
                raise ValueError("cyclic family needs a modulus m >= 1")
        elif self.m is not None:
            object.__setattr__(self, "m", None)

    @classmethod
    def lattice(cls, d: int = 1) -> SemigroupModel:
        return cls(Family.LATTICE, d)

    @classmethod
    def cone(cls, d: int = 1) -> SemigroupModel:
        return cls(Family.CONE, d)

    @classmethod
    def cyclic(cls, m: int, d: int = 1) -> SemigroupModel:
        return cls(Family.CYCLIC, d, m)

    @classmethod
    def heisenberg(cls) -> SemigroupModel:
        return cls(Family.HEISENBERG, 3)

    @property
    def abelian(self) -> bool:
        return self.family is not Family.HEISENBERG

    @property
    def unimodular(self) -> bool:
        return True

    def element(self, *coords: int) -> GroupElement:
        if len(coords) == 1 and not isinstance(coords[0], int):
            coords = tuple(coords[0])
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.d:
            raise ValueError(
                f"{self.family.value} elements have {self.d} coordinates, got {len(coords)}"
            )
        if self.family is Family.CYCLIC:
            coords = tuple(c % self.m for c in coords)
        return GroupElement(self.family, coords)

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self.family, (0,) * self.d)

    @property
    def generators(self) -> tuple[GroupElement, ...]:
        """Canonical generators of K: the unit vectors (x, y, z for Heisenberg)."""
        return tuple(
            self.element(*(1 if i == j else 0 for j in range(self.d))) for i in range(self.d)
        )

    def contains(self, g: GroupElement) -> bool:
        """Membership in K."""
        if g.family is not self.family or len(g.coords) != self.d:
            return False
        if self.family in (Family.CONE, Family.HEISENBERG):
            return all(c >= 0 for c in g.coords)
        if self.family is Family.CYCLIC:
            return all(0 <= c < self.m for c in g.coords)
        return True

    def check(self, g: GroupElement) -> None:
        if not isinstance(g, GroupElement) or g.family is not self.family or len(g.coords) != self.d:
            raise ValueError(f"{g!r} is not an element of {self.describe()}")

    def word(self, g: GroupElement) -> tuple[int, ...]:
        """Exponents of ``g`` in the fixed normal form, ordered as :attr:`word_order`.

        Abelian families use g = e_1^{c_1} ... e_d^{c_d}. For Heisenberg the
        normal form is g = y^b x^a z^c, the one order in which every element
        of K has non-negative exponents (x^a y^b = (a, b, ab)).
        """
        self.check(g)
        if self.family is Family.HEISENBERG:
            a, b, c = g.coords
            return (b, a, c)
        return g.coords

    @property
    def word_order(self) -> tuple[int, ...]:
        """Generator index used at each position of :meth:`word`, outermost first."""
        if self.family is Family.HEISENBERG:
            return (1, 0, 2)
        return tuple(range(self.d))

    @property
    def invertible_generators_required(self) -> bool:
        return self.family is Family.LATTICE

    def describe(self) -> str:
        if self.family is Family.CYCLIC:
            return f"cyclic(m={self.m}, d={self.d})"
        if self.family is Family.HEISENBERG:
            return "heisenberg"
        return f"{self.family.value}(d={self.d})"

    def as_dict(self) -> dict:
        return {"family": self.family.value, "d": self.d, "m": self.m}


@dataclass(frozen=True)
class FolnerNet:
    """A totally ordered net of finite subsets of K, indexed by a size parameter."""

    schedule: tuple[int, ...]
    sets: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.schedule) != len(self.sets):
            raise ValueError("schedule and sets differ in length")
        if not self.schedule:
            raise ValueError("a net needs at least one index")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ValueError("schedule must be strictly increasing")
        if any(len(s) == 0 for s in self.sets):
            raise ValueError("every set of the net must be non-empty")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    def __len__(self) -> int:
        return len(self.schedule)

    def __getitem__(self, i: int) -> frozenset:
        return self.sets[i]

    def __iter__(self):
        return iter(zip(self.schedule, self.sets))


def _check_pair(model: SemigroupModel, g: GroupElement, h: GroupElement) -> None:
    model.check(g)
    model.check(h)


def compose(model: SemigroupModel, g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product gh."""
    _check_pair(model, g, h)
    if model.family is Family.HEISENBERG:
        a, b, c = g.coords
        a2, b2, c2 = h.coords
        return GroupElement(model.family, (a + a2, b + b2, c + c2 + a * b2))
    coords = tuple(x + y for x, y in zip(g.coords, h.coords))
    if model.family is Family.CYCLIC:
        coords = tuple(x % model.m for x in coords)
    return GroupElement(model.family, coords)


def inverse(model: SemigroupModel, g: GroupElement) -> GroupElement:
    model.check(g)
    if model.family is Family.HEISENBERG:
        a, b, c = g.coords
        return GroupElement(model.family, (-a, -b, a * b - c))
    return model.element(*(-x for x in g.coords))


def power(model: SemigroupModel, g: GroupElement, n: int) -> GroupElement:
    """g^n for n >= 1, by repeated squaring."""
    model.check(g)
    if int(n) != n or n < 1:
        raise ValueError(f"power needs an integer n >= 1, got {n}")
    result = None
    base = g
    n = int(n)
    while n:
        if n & 1:
            result = base if result is None else compose(model, result, base)
        n >>= 1
        if n:
            base = compose(model, base, base)
    return result


def translate(
    model: SemigroupModel, elements: Iterable[GroupElement], h: GroupElement, side: Side | str
) -> frozenset:
    """Right translate {gh} or left translate {hg} of a finite set."""
    side = Side(side)
    model.check(h)
    if side is Side.RIGHT:
        return frozenset(compose(model, g, h) for g in elements)
    return frozenset(compose(model, h, g) for g in elements)


def folner_defect(model: SemigroupModel, elements: Iterable[GroupElement], g: GroupElement) -> float:
    """|Λ Δ Λg| / |Λ| by exact enumeration."""
    lam = frozenset(elements)
    if not lam:
        raise ValueError("defect is undefined for an empty set")
    shifted = translate(model, lam, g, Side.RIGHT)
    return len(lam ^ shifted) / len(lam)


def box(model: SemigroupModel, n: int) -> frozenset:
    """The coordinate box of side ``n`` inside K.

    Heisenberg boxes are [0,n) x [0,n) x [0,n^2): right multiplication by
    y shifts the central coordinate by a < n, so the central side must grow
    faster than n for the defect to vanish.
    """
    if n < 1:
        raise ValueError(f"box side must be positive, got {n}")
    if model.family is Family.HEISENBERG:
        ranges = [range(n), range(n), range(n * n)]
    elif model.family is Family.CYCLIC:
        ranges = [range(min(n, model.m))] * model.d
    else:
        ranges = [range(n)] * model.d
    fam = model.family
    return frozenset(GroupElement(fam, c) for c in itertools.product(*ranges))


def box_folner_net(model: SemigroupModel, size_schedule: Iterable[int]) -> FolnerNet:
    schedule = tuple(int(n) for n in size_schedule)
    if not schedule:
        raise ValueError("size schedule is empty")
    return FolnerNet(schedule, tuple(box(model, n) for n in schedule))


def word_ball(model: SemigroupModel, radius: int = 3) -> list[GroupElement]:
    """Elements of K that are products of at most ``radius`` generators.

    For the lattice family K is a group, so inverse generators count too.
    """
    steps = list(model.generators)
    if model.family is Family.LATTICE:
        steps += [inverse(model, s) for s in steps]
    ball = {model.identity}
    frontier = {model.identity}
    for _ in range(radius):
        frontier = {compose(model, g, s) for g in frontier for s in steps} - ball
        ball |= frontier
    return sorted(ball, key=lambda e: e.coords)


def sorted_elements(elements: Iterable[GroupElement]) -> list[GroupElement]:
    return sorted(elements, key=lambda e: e.coords)


def set_sum(elements: Iterable[GroupElement], f: Callable[[GroupElement], float]) -> float:
    """Sum of f over a finite set; the counting-measure integral."""
    return sum(f(g) for g in elements)
