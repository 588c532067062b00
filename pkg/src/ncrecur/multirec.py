"""Tensor products of systems, endomorphism pullbacks and multiple recurrence.

The search for g with ∏_j |ω(A* τ_{φ_j(g)}(A))| > |ω(A)|^{2q} - ε runs in
the q-fold tensor product of the GNS space of (A, ω), but never forms
that space explicitly. For an ω-isometric system the generators U_i act
unitarily and commute, so one unitary W diagonalizes all of them; the
tensor-product generators are then diagonal in ⊗W with eigenvalues
∏_j λ_i(a_j)^{n_j}. Window values are evaluated factor by factor.
:func:`tensor_systems` builds the explicit product for small cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg

from ._words import apply_words
from .algebra import AlgebraDescriptor, AlgebraElement, State, alg_star, state_eval
from .dynamics import DynMap, StarDynamicalSystem, tau_at, validated
from .ergodic import correlation, pick_witness
from .exceptions import InconsistentDynamicsError, NetExhaustedError, PreconditionError
from .gns import GnsRep, gns_build, gns_lift, iota
from .semigroup import (
    FolnerNet,
    GroupElement,
    SemigroupModel,
    Side,
    compose,
    power,
    sorted_elements,
    translate,
    word_ball,
)

DIAG_TOL = 1e-8
FIXED_TOL = 1e-9
READBACK_TOL = 1e-9


@dataclass(frozen=True)
class Endomorphism:
    """φ: K → K with φ(gh) = φ(g)φ(h).

    The built-in family is φ(g) = g^n. Any other homomorphism can be
    passed as ``func``; it is trusted, though :meth:`check` samples the
    multiplicative law.
    """

    n: int | None = None
    func: Callable[[GroupElement], GroupElement] | None = None
    name: str | None = None

    def __post_init__(self):
        if (self.n is None) == (self.func is None):
            raise ValueError("give exactly one of an exponent n or a function")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ValueError(f"exponent must be an integer >= 1, got {self.n}")

    def __call__(self, model: SemigroupModel, g: GroupElement) -> GroupElement:
        if self.func is not None:
            return self.func(g)
        return power(model, g, self.n)

    def label(self) -> str | int:
        return self.n if self.n is not None else (self.name or "custom")

    def check(self, model: SemigroupModel, samples: int = 100, seed: int = 0) -> bool:
        ball = word_ball(model, 3)
        rng = np.random.default_rng(seed)
        for i, j in rng.integers(len(ball), size=(samples, 2)):
            g, h = ball[i], ball[j]
            if self(model, compose(model, g, h)) != compose(model, self(model, g), self(model, h)):
                return False
        return True


def _as_endo(e) -> Endomorphism:
    if isinstance(e, Endomorphism):
        return e
    if callable(e):
        return Endomorphism(func=e)
    return Endomorphism(n=int(e))


def _require_isometric(system: StarDynamicalSystem) -> StarDynamicalSystem:
    if system.validation is None:
        system = validated(system)
    if not system.validation.passed:
        raise PreconditionError("system fails the *-dynamical system axioms")
    if not system.validation.omega_isometric:
        raise PreconditionError(
            "system is not ω-isometric "
            f"(residual {system.validation.isometry_residual:.3e})"
        )
    return system


def _pair_descriptors(d1: AlgebraDescriptor, d2: AlgebraDescriptor):
    """Descriptor of d1 ⊗ d2 and the permutation from kron coordinates to it.

    Blocks are paired left-to-right in row-major order, block (k, l) being
    M_{n_k} ⊗ M_{m_l} = M_{n_k m_l}; within it the row-major layout of
    np.kron is used.
    """
    dims = [n * m for n in d1.block_dims for m in d2.block_dims]
    desc = AlgebraDescriptor(tuple(dims))
    d2_dim = d2.dim
    perm = np.empty(desc.dim, dtype=int)
    target_off = iter(desc.offsets)
    for off1, n in zip(d1.offsets, d1.block_dims):
        for off2, m in zip(d2.offsets, d2.block_dims):
            base = next(target_off)
            nm = n * m
            for i in range(n):
                for j in range(n):
                    for p in range(m):
                        for r in range(m):
                            src = (off1 + i * n + j) * d2_dim + off2 + p * m + r
                            perm[base + (i * m + p) * nm + j * m + r] = src
    return desc, perm


def tensor_elements(elements: Sequence[AlgebraElement]) -> AlgebraElement:
    """Simple tensor A_1 ⊗ ... ⊗ A_q in the paired-block layout."""
    out = elements[0]
    for a in elements[1:]:
        desc, _ = _pair_descriptors(out.descriptor, a.descriptor)
        blocks = [np.kron(x, y) for x in out.blocks for y in a.blocks]
        out = AlgebraElement(desc, tuple(blocks))
    return out


def _tensor_pair(s1: StarDynamicalSystem, s2: StarDynamicalSystem) -> StarDynamicalSystem:
    desc, perm = _pair_descriptors(s1.descriptor, s2.descriptor)
    state = State(desc, tuple(np.kron(r1, r2) for r1 in s1.state.blocks for r2 in s2.state.blocks))
    maps = []
    for t1, t2 in zip(s1.generator_maps, s2.generator_maps):
        big = np.kron(t1.matrix, t2.matrix)
        maps.append(DynMap(desc, big[np.ix_(perm, perm)]))
    return StarDynamicalSystem(desc, state, s1.model, tuple(maps))


def tensor_systems(
    systems: Sequence[StarDynamicalSystem], *, tol: float = 1e-10, samples: int = 16, seed: int = 0
) -> StarDynamicalSystem:
    """The product system (⊗A_j, ⊗ω_j, ⊗τ_j, K), validated."""
    if not systems:
        raise ValueError("need at least one system")
    model = systems[0].model
    if any(s.model != model for s in systems):
        raise ValueError("all factors must share the same semigroup model")
    systems = [_require_isometric(s) for s in systems]
    out = systems[0]
    for s in systems[1:]:
        out = _tensor_pair(out, s)
    return validated(out, tol=tol, samples=samples, seed=seed)


def pullback(system: StarDynamicalSystem, phi: Endomorphism) -> StarDynamicalSystem:
    """σ_g = τ_{φ(g)}, given by the generator images τ_{φ(gen)}."""
    model = system.model
    maps = tuple(tau_at(system, phi(model, gen)) for gen in model.generators)
    return StarDynamicalSystem(system.descriptor, system.state, model, maps)


def endo_pullback(system: StarDynamicalSystem, n: int) -> StarDynamicalSystem:
    if int(n) != n or n < 1:
        raise ValueError(f"exponent must be an integer >= 1, got {n}")
    out = pullback(system, Endomorphism(n=int(n)))
    if system.validation is not None:
        v = system.validation
        out = validated(out, tol=v.tol, samples=v.samples, seed=v.seed)
    return out


@dataclass(frozen=True)
class MultiRecord:
    h: GroupElement
    window_average: complex
    witness: GroupElement
    factor_values: tuple[complex, ...]
    algebra_factor_values: tuple[complex, ...]
    passed: bool

    @property
    def product(self) -> complex:
        return complex(np.prod(self.factor_values))

    def as_dict(self) -> dict:
        return {
            "h": list(self.h.coords),
            "window_average": [self.window_average.real, self.window_average.imag],
            "window_average_abs": abs(self.window_average),
            "witness": list(self.witness.coords),
            "factor_values": [[z.real, z.imag] for z in self.factor_values],
            "factor_abs": [abs(z) for z in self.factor_values],
            "algebra_factor_values": [[z.real, z.imag] for z in self.algebra_factor_values],
            "product_abs": abs(self.product),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class MultiRecurrenceReport:
    q: int
    exponents: tuple
    epsilon: float
    alpha0: int
    alpha0_size: int
    alpha0_schedule_value: int
    criterion_residual: float
    criterion_threshold: float
    omega_a: complex
    limit_value: float
    lower_bound: float
    nonvanishing_applies: bool
    records: tuple[MultiRecord, ...]
    readback_residual: float
    all_pass: bool

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "exponents": list(self.exponents),
            "epsilon": self.epsilon,
            "alpha0": {
                "index": self.alpha0,
                "N": self.alpha0_schedule_value,
                "lambda_size": self.alpha0_size,
                "criterion_residual": self.criterion_residual,
                "criterion_threshold": self.criterion_threshold,
            },
            "omega_a": [self.omega_a.real, self.omega_a.imag],
            "limit_value": self.limit_value,
            "lower_bound": self.lower_bound,
            "nonvanishing_applies": self.nonvanishing_applies,
            "readback_residual": self.readback_residual,
            "all_pass": self.all_pass,
            "records": [r.as_dict() for r in self.records],
        }


def joint_eigenbasis(us: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Unitary W and eigenvalues E[i, a] with W* U_i W = diag(E[i]).

    The U_i must be commuting normal matrices. A generic combination is
    Schur-decomposed; its triangular factor is diagonal for normal input.
    """
    n = us[0].shape[0]
    weights = [1.0 / np.sqrt(k + 2) + 0.37 * k for k in range(len(us))]
    combo = sum(w * u for w, u in zip(weights, us))
    _, w = scipy.linalg.schur(combo, output="complex")
    eig = np.empty((len(us), n), dtype=complex)
    for i, u in enumerate(us):
        d = w.conj().T @ u @ w
        off = np.max(np.abs(d - np.diag(np.diag(d))), initial=0.0)
        if off > DIAG_TOL:
            raise InconsistentDynamicsError(
                f"U generators are not simultaneously diagonalizable (off-diagonal {off:.2e})"
            )
        eig[i] = np.diag(d)
    return w, eig


def _phase_average(mu: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Mean over rows g of ∏_i mu[i]^{g_i}, for every column of mu."""
    total = np.zeros(mu.shape[1], dtype=complex)
    chunk = max(1, (1 << 20) // max(1, mu.shape[1]))
    for start in range(0, len(coords), chunk):
        c = coords[start : start + chunk]
        term = np.ones((len(c), mu.shape[1]), dtype=complex)
        for i in range(mu.shape[0]):
            term *= mu[i][None, :] ** c[:, i][:, None]
        total += term.sum(axis=0)
    return total / len(coords)


def multiple_recurrence_search(
    system: StarDynamicalSystem,
    a: AlgebraElement,
    exponents: Sequence[int | Endomorphism | Callable],
    epsilon: float,
    net: FolnerNet,
    h_set: Iterable[GroupElement] | None = None,
    rank_tol: float = 1e-10,
    rep: GnsRep | None = None,
) -> MultiRecurrenceReport:
    """Search windows Λ_{α0} h for g with large ∏_j |ω(A* τ_{φ_j(g)}(A))|."""
    model = system.model
    if not model.abelian:
        raise ValueError("multiple recurrence is implemented for abelian K only")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    endos = [_as_endo(e) for e in exponents]
    q = len(endos)
    if q < 1:
        raise ValueError("need at least one endomorphism")
    system = _require_isometric(system)
    if rep is None or not rep.lifted:
        rep = gns_lift(gns_build(system.descriptor, system.state, rank_tol), system)
    x = iota(rep, a)
    w, eig = joint_eigenbasis(rep.u_generators)
    coeff = w.conj().T @ x

    # eigenvalue of the pulled-back generator i in factor j at eigenvector a:
    # U_{φ_j(gen_i)} = ∏_k U_k^{c_k} with c = coords of φ_j(gen_i)
    factor_eigs = []
    for phi in endos:
        rows = []
        for gen in model.generators:
            img = phi(model, gen)
            rows.append(np.prod(eig ** np.array(model.word(img))[:, None], axis=0))
        factor_eigs.append(np.array(rows))  # (d, hdim)

    # tensor-product eigenvalues and coefficients, flattened over multi-indices
    mu = factor_eigs[0]
    c = coeff
    for fe in factor_eigs[1:]:
        mu = (mu[:, :, None] * fe[:, None, :]).reshape(mu.shape[0], -1)
        c = np.outer(c, coeff).reshape(-1)
    weight = np.abs(c) ** 2
    live = weight > 0
    mu, weight = mu[:, live], weight[live]
    fixed = np.all(np.abs(mu - 1.0) <= FIXED_TOL, axis=0)
    limit = float(weight[fixed].sum())

    threshold = epsilon / (float(np.sqrt(weight.sum())) + 1.0)
    alpha0 = None
    best = np.inf
    for idx, (_, lam) in enumerate(net):
        coords = np.array([model.word(g) for g in lam], dtype=float)
        avg = _phase_average(mu, coords)
        r = float(np.sqrt(np.sum(weight * np.abs(avg - fixed) ** 2)))
        best = min(best, r)
        if r < threshold:
            alpha0, crit = idx, r
            break
    if alpha0 is None:
        raise NetExhaustedError(
            f"no schedule entry reached residual below {threshold:.3e} "
            f"(best {best:.3e} at N = {net.schedule[-1]}); extend the schedule"
        )

    h_list = sorted_elements(set(word_ball(model, 3) if h_set is None else h_set))
    windows = [sorted_elements(translate(model, net.sets[alpha0], h, Side.RIGHT)) for h in h_list]
    union = sorted_elements(set().union(*windows))
    index = {g: i for i, g in enumerate(union)}
    factors = np.empty((q, len(union)), dtype=complex)
    for j, phi in enumerate(endos):
        words = [model.word(phi(model, g)) for g in union]
        vecs = apply_words(rep.table(), model.word_order, words, x)
        factors[j] = vecs @ np.conj(x)
    products = np.prod(factors, axis=0)

    omega_a = state_eval(system.state, a)
    bound = abs(omega_a) ** (2 * q) - epsilon
    nonvanishing = abs(omega_a) > 0 and epsilon < abs(omega_a) ** (2 * q)
    a_star = alg_star(a)
    records, worst = [], 0.0
    for h, win in zip(h_list, windows):
        idx = [index[g] for g in win]
        vals = products[idx]
        avg = complex(vals.sum() / len(win))
        k = pick_witness(np.abs(vals))
        g = win[k]
        fvals = tuple(complex(v) for v in factors[:, idx[k]])
        avals = tuple(correlation(system, a_star, a, phi(model, g)) for phi in endos)
        worst = max(worst, max(abs(u - v) for u, v in zip(fvals, avals)))
        ok = abs(vals[k]) > bound and abs(avg) > limit - epsilon
        if nonvanishing:
            ok = ok and all(abs(v) > 0 for v in fvals)
        records.append(MultiRecord(h, avg, g, fvals, avals, bool(ok)))

    return MultiRecurrenceReport(
        q=q,
        exponents=tuple(e.label() for e in endos),
        epsilon=float(epsilon),
        alpha0=alpha0,
        alpha0_size=len(net.sets[alpha0]),
        alpha0_schedule_value=net.schedule[alpha0],
        criterion_residual=crit,
        criterion_threshold=threshold,
        omega_a=omega_a,
        limit_value=limit,
        lower_bound=bound,
        nonvanishing_applies=bool(nonvanishing),
        records=tuple(records),
        readback_residual=worst,
        all_pass=all(r.passed for r in records) and worst <= READBACK_TOL,
    )


def multiple_recurrence_tensor_oracle(
    system: StarDynamicalSystem,
    a: AlgebraElement,
    exponents: Sequence[int],
    epsilon: float,
    net: FolnerNet,
    h_set: Iterable[GroupElement] | None = None,
    rank_tol: float = 1e-10,
):
    """Same search through the explicit tensor-product system (small sizes only)."""
    from .ergodic import khintchine_recurrence

    system = _require_isometric(system)
    factors = [endo_pullback(system, n) for n in exponents]
    big = tensor_systems(factors)
    rep = gns_lift(gns_build(big.descriptor, big.state, rank_tol), big)
    a_big = tensor_elements([a] * len(exponents))
    return khintchine_recurrence(big, rep, a_big, a_big, epsilon, net, h_set, Side.RIGHT)
