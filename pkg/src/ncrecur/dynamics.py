"""*-dynamical systems (A, ω, τ, K) with τ given on the generators of K.

A map τ_g is stored as its matrix on algebra coordinates (see
:mod:`ncrecur.algebra`). The action of an arbitrary g in K is rebuilt
from the generator matrices through the normal form of
:meth:`SemigroupModel.word`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._words import PowerTable
from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    State,
    alg_mul,
    alg_star,
    state_eval,
)
from .semigroup import GroupElement, SemigroupModel, compose, word_ball

UNITAL_TOL = 1e-10
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DynMap:
    """A linear map on the algebra, acting on coordinate vectors."""

    descriptor: AlgebraDescriptor
    matrix: np.ndarray
    schwarz_checked: bool = False
    omega_isometric: bool | None = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        d = self.descriptor.dim
        if mat.shape != (d, d):
            raise ValueError(f"map matrix must be {d}x{d}, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, descriptor: AlgebraDescriptor) -> DynMap:
        return cls(descriptor, np.eye(descriptor.dim))

    @property
    def unital(self) -> bool:
        u = self.descriptor.unit_vec()
        return bool(np.max(np.abs(self.matrix @ u - u)) <= UNITAL_TOL)

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        if a.descriptor != self.descriptor:
            raise ValueError("element does not belong to this map's algebra")
        return AlgebraElement.from_vec(self.descriptor, self.matrix @ a.vec())

    def then(self, other: DynMap) -> DynMap:
        """self ∘ other, i.e. apply ``other`` first."""
        return DynMap(self.descriptor, self.matrix @ other.matrix)

    def scaled(self, c: complex) -> DynMap:
        return DynMap(self.descriptor, c * self.matrix)


def koopman_from_map(T: Sequence[int] | Callable[[int], int], m: int | None = None) -> DynMap:
    """Koopman map f ↦ f∘T on the algebra of functions on {0, ..., m-1}.

    ``T`` is either the list of images or a callable together with ``m``.
    """
    if callable(T):
        if m is None:
            raise ValueError("a callable point map needs the number of points m")
        images = [int(T(x)) for x in range(m)]
    else:
        images = [int(t) for t in T]
        m = len(images)
    mat = np.zeros((m, m))
    for x, tx in enumerate(images):
        if not 0 <= tx < m:
            raise ValueError(f"T({x}) = {tx} lies outside 0..{m - 1}")
        mat[x, tx] = 1.0
    return DynMap(AlgebraDescriptor.points(m), mat)


def conjugation_from_unitary(
    v: np.ndarray | Sequence[np.ndarray], descriptor: AlgebraDescriptor | None = None
) -> DynMap:
    """τ(A) = V* A V, blockwise.

    ``v`` is a list of unitary blocks, or a single matrix for a one-block
    algebra.
    """
    if isinstance(v, np.ndarray) and v.ndim == 2:
        blocks = [v]
    else:
        blocks = [np.asarray(b, dtype=complex) for b in v]
    if descriptor is None:
        descriptor = AlgebraDescriptor(tuple(b.shape[0] for b in blocks))
    if tuple(b.shape for b in blocks) != tuple((n, n) for n in descriptor.block_dims):
        raise ValueError("unitary blocks do not match the descriptor")
    d = descriptor.dim
    mat = np.zeros((d, d), dtype=complex)
    for off, n, b in zip(descriptor.offsets, descriptor.block_dims, blocks):
        if np.max(np.abs(b.conj().T @ b - np.eye(n))) > UNITARY_TOL:
            raise ValueError("conjugating matrix is not unitary")
        # row-major vec(X A Y) = (X ⊗ Y^T) vec(A)
        mat[off : off + n * n, off : off + n * n] = np.kron(b.conj().T, b.T)
    return DynMap(descriptor, mat)


def gram_matrix(descriptor: AlgebraDescriptor, state: State) -> np.ndarray:
    """G_ij = ω(B_i* B_j) over the matrix-unit basis.

    For a block M_n with density ρ this is I_n ⊗ ρ^T in row-major coordinates.
    """
    d = descriptor.dim
    g = np.zeros((d, d), dtype=complex)
    for off, n, rho in zip(descriptor.offsets, descriptor.block_dims, state.blocks):
        g[off : off + n * n, off : off + n * n] = np.kron(np.eye(n), rho.T)
    return g


@dataclass(frozen=True)
class AxiomCheck:
    passed: bool
    residual: float

    def as_dict(self) -> dict:
        return {"passed": self.passed, "residual": self.residual}


@dataclass(frozen=True)
class ValidationReport:
    """Sampled check of the *-dynamical system axioms.

    ``omega_isometric`` is informational: it never makes :attr:`passed`
    false.
    """

    checks: dict[str, AxiomCheck]
    omega_isometric: bool
    isometry_residual: float
    samples: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def worst_residual(self) -> float:
        return max(c.residual for c in self.checks.values())

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {k: v.as_dict() for k, v in self.checks.items()},
            "omega_isometric": self.omega_isometric,
            "isometry_residual": self.isometry_residual,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
        }


@dataclass(frozen=True, eq=False)
class StarDynamicalSystem:
    descriptor: AlgebraDescriptor
    state: State
    model: SemigroupModel
    generator_maps: tuple[DynMap, ...]
    validation: ValidationReport | None = None
    _table: PowerTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        maps = tuple(self.generator_maps)
        if len(maps) != len(self.model.generators):
            raise ValueError(
                f"{self.model.describe()} has {len(self.model.generators)} generators, "
                f"got {len(maps)} maps"
            )
        if self.state.descriptor != self.descriptor or any(
            t.descriptor != self.descriptor for t in maps
        ):
            raise ValueError("state and generator maps must live on the system's algebra")
        object.__setattr__(self, "generator_maps", maps)
        object.__setattr__(self, "_table", PowerTable([t.matrix for t in maps]))

    def tau(self, g: GroupElement) -> DynMap:
        return tau_at(self, g)

    def with_validation(self, report: ValidationReport) -> StarDynamicalSystem:
        maps = tuple(
            replace(
                t,
                schwarz_checked=report.checks["contractive"].passed,
                omega_isometric=report.omega_isometric,
            )
            for t in self.generator_maps
        )
        return replace(self, generator_maps=maps, validation=report)


def tau_at(system: StarDynamicalSystem, g: GroupElement) -> DynMap:
    """τ_g as the normal-form product of generator powers."""
    model = system.model
    model.check(g)
    if not model.contains(g):
        raise ValueError(f"{g!r} is not in the subsemigroup K")
    mat = system._table.word(model.word_order, model.word(g))
    return DynMap(system.descriptor, mat)


def validate_system(
    system: StarDynamicalSystem,
    tol: float = 1e-10,
    samples: int = 32,
    seed: int = 0,
    radius: int = 3,
) -> ValidationReport:
    """Check the *-dynamical system axioms on sampled data.

    Each sample is a pair (g, h) from the radius-``radius`` word ball with
    random Gaussian elements A, B. Checked:

    * ``semigroup_law``: τ_g τ_h = τ_gh (full matrices, so every A at once)
    * ``unital``: τ_g(1) = 1
    * ``contractive``: ω(τ_g(A)* τ_g(A)) <= ω(A*A) + tol, on samples and also
      as the matrix inequality T* G T <= G for the Gram matrix G
    * ``generators_commute`` (abelian K only)

    ω-isometry, ω(τ_g(A)* τ_g(B)) = ω(A*B), is recorded but not required.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    model = system.model
    desc = system.descriptor
    omega = system.state
    ball = word_ball(model, radius)

    cache: dict[GroupElement, np.ndarray] = {}

    def mat(g):
        if g not in cache:
            cache[g] = tau_at(system, g).matrix
        return cache[g]

    idx_g = rng.integers(len(ball), size=samples)
    idx_h = rng.integers(len(ball), size=samples)
    pairs = [(ball[i], ball[j]) for i, j in zip(idx_g, idx_h)]
    elems = [(AlgebraElement.random(desc, rng), AlgebraElement.random(desc, rng)) for _ in pairs]

    law = 0.0
    for g, h in pairs:
        law = max(law, float(np.max(np.abs(mat(g) @ mat(h) - mat(compose(model, g, h))))))

    unit = desc.unit_vec()
    touched = sorted(
        {g for pair in pairs for g in pair} | set(model.generators), key=lambda e: e.coords
    )
    unital = max(float(np.max(np.abs(mat(g) @ unit - unit))) for g in touched)

    # exact matrix form over every A: T* G T <= G (contraction), T* G T = G (isometry)
    gram = gram_matrix(desc, omega)
    contraction = 0.0
    isometry = 0.0
    for g in touched:
        t = mat(g)
        diff = t.conj().T @ gram @ t - gram
        diff = (diff + diff.conj().T) / 2
        contraction = max(contraction, float(np.linalg.eigvalsh(diff).max()))
        isometry = max(isometry, float(np.max(np.abs(diff))))

    # the same inequalities through algebra arithmetic on the sampled elements
    for (g, _), (a, b) in zip(pairs, elems):
        t = mat(g)
        ta = AlgebraElement.from_vec(desc, t @ a.vec())
        tb = AlgebraElement.from_vec(desc, t @ b.vec())
        lhs = state_eval(omega, alg_mul(alg_star(ta), ta)).real
        rhs = state_eval(omega, alg_mul(alg_star(a), a)).real
        contraction = max(contraction, lhs - rhs)
        cross = state_eval(omega, alg_mul(alg_star(ta), tb)) - state_eval(
            omega, alg_mul(alg_star(a), b)
        )
        isometry = max(isometry, abs(cross))
    contraction = max(contraction, 0.0)

    checks = {
        "semigroup_law": AxiomCheck(law <= tol, law),
        "unital": AxiomCheck(unital <= tol, unital),
        "contractive": AxiomCheck(contraction <= tol, contraction),
    }
    if model.abelian:
        gens = [t.matrix for t in system.generator_maps]
        comm = 0.0
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                comm = max(comm, float(np.max(np.abs(gens[i] @ gens[j] - gens[j] @ gens[i]))))
        checks["generators_commute"] = AxiomCheck(comm <= tol, comm)
    return ValidationReport(
        checks=checks,
        omega_isometric=isometry <= tol,
        isometry_residual=float(isometry),
        samples=samples,
        seed=seed,
        tol=tol,
    )


def validated(system: StarDynamicalSystem, **kwargs) -> StarDynamicalSystem:
    """Run :func:`validate_system` and attach the report."""
    return system.with_validation(validate_system(system, **kwargs))
