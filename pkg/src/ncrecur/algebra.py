"""Finite-dimensional *-algebras realized as direct sums of matrix blocks.

An algebra with block sizes [n_1, ..., n_k] is M_{n_1} + ... + M_{n_k}. The
commutative algebra of functions on m points is the case of m blocks of
size 1. Elements are flattened into coordinate vectors by concatenating
the row-major vectorizations of their blocks; superoperators act on those
vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-12
TRACE_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AlgebraDescriptor:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n < 1 for n in dims):
            raise ValueError(f"block dimensions must be positive, got {self.block_dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def points(cls, m: int) -> AlgebraDescriptor:
        """Commutative algebra of functions on m points."""
        return cls((1,) * m)

    @classmethod
    def matrices(cls, n: int) -> AlgebraDescriptor:
        return cls((n,))

    @property
    def dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for n in self.block_dims:
            out.append(acc)
            acc += n * n
        return tuple(out)

    def unit_vec(self) -> np.ndarray:
        return AlgebraElement.unit(self).vec()


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    descriptor: AlgebraDescriptor
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(_frozen(b) for b in self.blocks)
        dims = self.descriptor.block_dims
        if len(blocks) != len(dims) or any(b.shape != (n, n) for b, n in zip(blocks, dims)):
            shapes = [b.shape for b in blocks]
            raise ValueError(f"block shapes {shapes} do not match descriptor {dims}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def unit(cls, descriptor: AlgebraDescriptor) -> AlgebraElement:
        return cls(descriptor, tuple(np.eye(n) for n in descriptor.block_dims))

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor) -> AlgebraElement:
        return cls(descriptor, tuple(np.zeros((n, n)) for n in descriptor.block_dims))

    @classmethod
    def from_vec(cls, descriptor: AlgebraDescriptor, v) -> AlgebraElement:
        v = np.asarray(v, dtype=complex)
        if v.shape != (descriptor.dim,):
            raise ValueError(f"expected a vector of length {descriptor.dim}, got shape {v.shape}")
        blocks = [
            v[off : off + n * n].reshape(n, n)
            for off, n in zip(descriptor.offsets, descriptor.block_dims)
        ]
        return cls(descriptor, tuple(blocks))

    @classmethod
    def random(cls, descriptor: AlgebraDescriptor, rng: np.random.Generator) -> AlgebraElement:
        """Element with independent standard complex Gaussian entries."""
        blocks = [
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            for n in descriptor.block_dims
        ]
        return cls(descriptor, tuple(blocks))

    def vec(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def star(self) -> AlgebraElement:
        return alg_star(self)

    def __matmul__(self, other: AlgebraElement) -> AlgebraElement:
        return alg_mul(self, other)

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        _same_descriptor(self, other)
        return AlgebraElement(self.descriptor, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        _same_descriptor(self, other)
        return AlgebraElement(self.descriptor, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(self.descriptor, tuple(-a for a in self.blocks))

    def __mul__(self, scalar) -> AlgebraElement:
        if not isinstance(scalar, Number):
            return NotImplemented
        return AlgebraElement(self.descriptor, tuple(scalar * a for a in self.blocks))

    __rmul__ = __mul__

    def allclose(self, other: AlgebraElement, atol: float = 1e-10) -> bool:
        return self.descriptor == other.descriptor and all(
            np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.blocks, other.blocks)
        )

    def __repr__(self) -> str:
        return f"AlgebraElement({self.descriptor.block_dims}, {[b.tolist() for b in self.blocks]})"


def _same_descriptor(a, b) -> None:
    if a.descriptor != b.descriptor:
        raise ValueError(
            f"descriptor mismatch: {a.descriptor.block_dims} vs {b.descriptor.block_dims}"
        )


def alg_star(a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(a.descriptor, tuple(b.conj().T for b in a.blocks))


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _same_descriptor(a, b)
    return AlgebraElement(a.descriptor, tuple(x @ y for x, y in zip(a.blocks, b.blocks)))


def matrix_unit(descriptor: AlgebraDescriptor, block: int, i: int, j: int) -> AlgebraElement:
    """E_ij inside one block (0-based indices)."""
    blocks = [np.zeros((n, n)) for n in descriptor.block_dims]
    blocks[block][i, j] = 1.0
    return AlgebraElement(descriptor, tuple(blocks))


def basis(descriptor: AlgebraDescriptor) -> list[AlgebraElement]:
    """Matrix units in coordinate order."""
    out = []
    for k, n in enumerate(descriptor.block_dims):
        for i in range(n):
            for j in range(n):
                out.append(matrix_unit(descriptor, k, i, j))
    return out


def function_element(values: Sequence[complex]) -> AlgebraElement:
    """Element of the commutative m-point algebra with the given values."""
    values = list(values)
    d = AlgebraDescriptor.points(len(values))
    return AlgebraElement(d, tuple(np.array([[v]]) for v in values))


def indicator_element(m: int, subset: Iterable[int]) -> AlgebraElement:
    """χ_S on the m-point commutative algebra."""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    values = [0.0] * m
    for s in subset:
        if not 0 <= s < m:
            raise ValueError(f"index {s} outside 0..{m - 1}")
        values[s] = 1.0
    return function_element(values)


@dataclass(frozen=True, eq=False)
class State:
    """A state given by density blocks: ω(A) = Σ_i tr(ρ_i A_i).

    The blocks must be Hermitian, positive semidefinite and of total trace
    one. Faithfulness is not required.
    """

    descriptor: AlgebraDescriptor
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(_frozen(b) for b in self.blocks)
        dims = self.descriptor.block_dims
        if len(blocks) != len(dims) or any(b.shape != (n, n) for b, n in zip(blocks, dims)):
            raise ValueError(f"density block shapes do not match descriptor {dims}")
        total = 0.0
        for rho in blocks:
            if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise ValueError("density block is not Hermitian")
            if np.linalg.eigvalsh(rho).min() < -POSITIVITY_TOL:
                raise ValueError("density block is not positive semidefinite")
            total += np.trace(rho).real
        if abs(total - 1.0) > TRACE_TOL:
            raise ValueError(f"density blocks have total trace {total!r}, expected 1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_probabilities(cls, p: Sequence[float]) -> State:
        """State on the commutative algebra given by a probability vector."""
        p = np.asarray(p, dtype=float)
        return cls(AlgebraDescriptor.points(len(p)), tuple(np.array([[x]]) for x in p))

    @classmethod
    def uniform(cls, m: int) -> State:
        return cls.from_probabilities(np.full(m, 1.0 / m))

    @classmethod
    def tracial(cls, descriptor: AlgebraDescriptor) -> State:
        """Normalized trace over all blocks."""
        total = sum(descriptor.block_dims)
        return cls(descriptor, tuple(np.eye(n) / total for n in descriptor.block_dims))

    @classmethod
    def random_faithful(cls, descriptor: AlgebraDescriptor, rng: np.random.Generator) -> State:
        blocks = []
        for n in descriptor.block_dims:
            x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            blocks.append(x @ x.conj().T + 0.1 * np.eye(n))
        total = sum(np.trace(b).real for b in blocks)
        blocks = [b / total for b in blocks]
        # renormalize once more so the trace error stays at rounding level
        blocks[0] = blocks[0] + (1.0 - sum(np.trace(b).real for b in blocks)) * np.eye(
            descriptor.block_dims[0]
        ) / descriptor.block_dims[0]
        return cls(descriptor, tuple(blocks))

    @property
    def faithful(self) -> bool:
        return all(np.linalg.eigvalsh(rho).min() > POSITIVITY_TOL for rho in self.blocks)

    def __call__(self, a: AlgebraElement) -> complex:
        return state_eval(self, a)


def state_eval(omega: State, a: AlgebraElement) -> complex:
    _same_descriptor(omega, a)
    return complex(sum(np.trace(r @ x) for r, x in zip(omega.blocks, a.blocks)))
