"""GNS construction for a state on a block algebra, and the lift of τ to U_g.

The GNS space is realized as C^hdim. With G the Gram matrix of the
matrix-unit basis, G = W diag(λ) W*, keeping the eigenpairs above
rank_tol * λ_max, the map ι is A ↦ diag(√λ) W* vec(A). Then
<ι(A), ι(B)> = vec(A)* G vec(B) = ω(A*B), elements of the null space of G
are sent to zero, and ι is onto.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._words import PowerTable
from .algebra import AlgebraDescriptor, AlgebraElement, State
from .dynamics import StarDynamicalSystem, gram_matrix
from .exceptions import InconsistentDynamicsError
from .semigroup import GroupElement, SemigroupModel

LIFT_TOL = 1e-8
NORM_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class GnsRep:
    """GNS data. ``u_generators`` is None until :func:`gns_lift` is applied.

    Hilbert-level toys with no underlying algebra (see :func:`hilbert_rep`)
    leave ``descriptor``, ``gram`` and ``iota_matrix`` unset.
    """

    hdim: int
    omega_vec: np.ndarray | None
    descriptor: AlgebraDescriptor | None = None
    gram: np.ndarray | None = None
    iota_matrix: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    rank_tol: float = 1e-10
    u_generators: tuple[np.ndarray, ...] | None = None
    lift_residual: float | None = None

    @property
    def lifted(self) -> bool:
        return self.u_generators is not None

    def table(self) -> PowerTable:
        if self.u_generators is None:
            raise ValueError("representation has no U generators; call gns_lift first")
        cached = self.__dict__.get("_table")
        if cached is None:
            cached = PowerTable(self.u_generators)
            object.__setattr__(self, "_table", cached)
        return cached

    def diagnostics(self) -> dict:
        out = {"hdim": self.hdim, "rank_tol": self.rank_tol}
        if self.eigenvalues is not None:
            out["gram_eigenvalues_kept"] = [float(x) for x in self.eigenvalues]
        if self.omega_vec is not None:
            out["omega_norm"] = float(np.linalg.norm(self.omega_vec))
        if self.u_generators is not None:
            out["lift_residual"] = self.lift_residual
            out["u_norms"] = [float(np.linalg.norm(u, 2)) for u in self.u_generators]
        return out


def gns_build(descriptor: AlgebraDescriptor, omega: State, rank_tol: float = 1e-10) -> GnsRep:
    if not isinstance(omega, State) or omega.descriptor != descriptor:
        raise ValueError("omega must be a state on the given algebra")
    if not 0 < rank_tol < 1:
        raise ValueError(f"rank_tol must lie in (0, 1), got {rank_tol}")
    gram = gram_matrix(descriptor, omega)
    lam, w = np.linalg.eigh(gram)
    keep = lam > rank_tol * lam.max()
    lam, w = lam[keep], w[:, keep]
    iota_matrix = np.sqrt(lam)[:, None] * w.conj().T
    omega_vec = iota_matrix @ descriptor.unit_vec()
    for a in (gram, iota_matrix, omega_vec, lam):
        a.setflags(write=False)
    return GnsRep(
        hdim=int(keep.sum()),
        omega_vec=omega_vec,
        descriptor=descriptor,
        gram=gram,
        iota_matrix=iota_matrix,
        eigenvalues=lam,
        rank_tol=rank_tol,
    )


def gns_lift(rep: GnsRep, system: StarDynamicalSystem) -> GnsRep:
    """Push each generator map through ι: U ι = ι τ.

    U is the least-squares solution J T J⁺ with J the ι matrix. The
    residual |U J - J T| certifies that τ maps the null space of the Gram
    matrix into itself, which is what makes U well defined.
    """
    if rep.iota_matrix is None or rep.descriptor != system.descriptor:
        raise ValueError("representation was not built from this system's algebra")
    if not np.allclose(rep.gram, gram_matrix(system.descriptor, system.state), atol=1e-14):
        raise ValueError("representation was built from a different state")
    j = rep.iota_matrix
    j_pinv = np.linalg.pinv(j)
    scale = max(1.0, float(np.linalg.norm(j, 2)))
    us, residual = [], 0.0
    for t in system.generator_maps:
        jt = j @ t.matrix
        u = jt @ j_pinv
        residual = max(residual, float(np.max(np.abs(u @ j - jt), initial=0.0)) / scale)
        us.append(u)
    if residual > LIFT_TOL:
        raise InconsistentDynamicsError(
            f"U ι - ι τ residual {residual:.3e} exceeds {LIFT_TOL:.0e}; "
            "τ does not preserve the GNS null space"
        )
    for u in us:
        u.setflags(write=False)
    return replace(rep, u_generators=tuple(us), lift_residual=residual)


def hilbert_rep(u_generators, omega_vec=None) -> GnsRep:
    """A bare Hilbert-space representation given by its generator matrices."""
    us = tuple(np.atleast_2d(np.asarray(u, dtype=complex)) for u in u_generators)
    if not us:
        raise ValueError("need at least one generator")
    n = us[0].shape[0]
    if any(u.shape != (n, n) for u in us):
        raise ValueError("generator matrices must be square and of equal size")
    if omega_vec is not None:
        omega_vec = np.asarray(omega_vec, dtype=complex)
    return GnsRep(hdim=n, omega_vec=omega_vec, u_generators=us, lift_residual=0.0)


def iota(rep: GnsRep, a: AlgebraElement) -> np.ndarray:
    if rep.iota_matrix is None or a.descriptor != rep.descriptor:
        raise ValueError("element does not belong to the represented algebra")
    return rep.iota_matrix @ a.vec()


def gns_inner(rep: GnsRep, x, y) -> complex:
    """<x, y>, conjugate-linear in x."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != (rep.hdim,) or y.shape != (rep.hdim,):
        raise ValueError(f"vectors must have length {rep.hdim}")
    return complex(np.vdot(x, y))


def u_at(rep: GnsRep, model: SemigroupModel, g: GroupElement) -> np.ndarray:
    """U_g from the normal-form word of g."""
    model.check(g)
    if not model.contains(g):
        raise ValueError(f"{g!r} is not in the subsemigroup K")
    if len(rep.u_generators or ()) != len(model.generators):
        raise ValueError("number of U generators does not match the model")
    return rep.table().word(model.word_order, model.word(g))
