"""Mean ergodic averages, the fixed-point projection and recurrence searches.

Averages are taken over finite subsets Λ of K with counting measure:
I_Λ(x) = (1/|Λ|) Σ_{g∈Λ} U_g x.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from ._words import apply_words, sum_words
from .algebra import AlgebraElement, alg_mul, alg_star, state_eval
from .dynamics import StarDynamicalSystem, tau_at
from .exceptions import NetExhaustedError, PreconditionError
from .gns import GnsRep, iota
from .semigroup import (
    FolnerNet,
    GroupElement,
    SemigroupModel,
    Side,
    sorted_elements,
    translate,
    word_ball,
)

FIXED_TOL = 1e-9
TIE_TOL = 1e-12
READBACK_TOL = 1e-9


def _words_of(rep: GnsRep, model: SemigroupModel, elements: Iterable[GroupElement]):
    if rep.u_generators is None:
        raise ValueError("representation has no U generators; call gns_lift first")
    if len(rep.u_generators) != len(model.generators):
        raise ValueError("number of U generators does not match the model")
    words = []
    for g in elements:
        if not model.contains(g):
            raise ValueError(f"{g!r} is not in the subsemigroup K")
        words.append(model.word(g))
    return words


def ergodic_avg(rep: GnsRep, model: SemigroupModel, x, elements: Iterable[GroupElement]) -> np.ndarray:
    """(1/|Λ|) Σ_{g∈Λ} U_g x."""
    lam = frozenset(elements)
    if not lam:
        raise ValueError("cannot average over an empty set")
    x = np.asarray(x, dtype=complex)
    words = _words_of(rep, model, lam)
    return sum_words(rep.table(), model.word_order, words, x) / len(lam)


def averaging_operator(rep: GnsRep, model: SemigroupModel, elements: Iterable[GroupElement]) -> np.ndarray:
    """The operator (1/|Λ|) Σ_{g∈Λ} U_g, as a matrix."""
    return ergodic_avg(rep, model, np.eye(rep.hdim, dtype=complex), elements)


@dataclass(frozen=True, eq=False)
class FixedProjection:
    """Orthogonal projection onto V = {x : U_g x = x for all generators g}."""

    matrix: np.ndarray
    basis: np.ndarray
    rank: int

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=complex)


def fixed_projection(rep: GnsRep, tol: float = FIXED_TOL) -> FixedProjection:
    """Null space of the stacked (U_gen - I) by singular-value thresholding."""
    if rep.u_generators is None:
        raise ValueError("representation has no U generators; call gns_lift first")
    n = rep.hdim
    stacked = np.vstack([u - np.eye(n) for u in rep.u_generators])
    _, s, vh = np.linalg.svd(stacked)
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    kernel = vh[s_full <= tol].conj().T
    p = kernel @ kernel.conj().T
    return FixedProjection(matrix=p, basis=kernel, rank=kernel.shape[1])


@dataclass(frozen=True)
class ConvergenceSeries:
    rows: tuple[tuple[int, int, float], ...]

    @property
    def residuals(self) -> list[float]:
        return [r for _, _, r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "lambda_size", "residual"])
        for n, size, r in self.rows:
            w.writerow([n, size, f"{r:.17g}"])
        return buf.getvalue()


def convergence_profile(
    rep: GnsRep,
    model: SemigroupModel,
    x,
    net: FolnerNet,
    projection: FixedProjection | None = None,
) -> ConvergenceSeries:
    """Residual |I_N(x) - Px| along the net."""
    p = projection or fixed_projection(rep)
    x = np.asarray(x, dtype=complex)
    px = p(x)
    rows = []
    for n, lam in net:
        r = float(np.linalg.norm(ergodic_avg(rep, model, x, lam) - px))
        rows.append((n, len(lam), r))
    return ConvergenceSeries(tuple(rows))


def _coords(g: GroupElement) -> list[int]:
    return list(g.coords)


def _cjson(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True)
class RecurrenceRecord:
    h: GroupElement
    window_average: complex
    witness: GroupElement
    witness_value: complex
    passed: bool
    algebra_value: complex | None = None

    def as_dict(self) -> dict:
        out = {
            "h": _coords(self.h),
            "window_average": _cjson(self.window_average),
            "window_average_abs": abs(self.window_average),
            "witness": _coords(self.witness),
            "witness_value": _cjson(self.witness_value),
            "witness_abs": abs(self.witness_value),
            "passed": self.passed,
        }
        if self.algebra_value is not None:
            out["algebra_value"] = _cjson(self.algebra_value)
        return out


@dataclass(frozen=True)
class RecurrenceReport:
    """Outcome of a Khintchine-type search.

    ``lower_bound`` is the limit modulus |<x, Py>|; a record passes when
    both its window average and its witness exceed ``lower_bound - epsilon``
    in modulus.
    """

    epsilon: float
    side: Side
    alpha0: int
    alpha0_size: int
    alpha0_schedule_value: int
    criterion_residual: float
    criterion_threshold: float
    lower_bound: float
    limit_value: complex
    records: tuple[RecurrenceRecord, ...]
    all_pass: bool
    readback_residual: float | None = None
    corollary: dict | None = field(default=None)

    def as_dict(self) -> dict:
        out = {
            "epsilon": self.epsilon,
            "side": self.side.value,
            "alpha0": {
                "index": self.alpha0,
                "N": self.alpha0_schedule_value,
                "lambda_size": self.alpha0_size,
                "criterion_residual": self.criterion_residual,
                "criterion_threshold": self.criterion_threshold,
            },
            "lower_bound": self.lower_bound,
            "limit_value": _cjson(self.limit_value),
            "all_pass": self.all_pass,
            "records": [r.as_dict() for r in self.records],
        }
        if self.readback_residual is not None:
            out["readback_residual"] = self.readback_residual
        if self.corollary is not None:
            out["corollary"] = self.corollary
        return out


def find_alpha0(
    rep: GnsRep, model: SemigroupModel, x, y, epsilon: float, net: FolnerNet, py
) -> tuple[int, float, float]:
    """Smallest net index with |I(y) - Py| < ε / (|x| + 1)."""
    threshold = epsilon / (float(np.linalg.norm(x)) + 1.0)
    best = np.inf
    for idx, (_, lam) in enumerate(net):
        r = float(np.linalg.norm(ergodic_avg(rep, model, y, lam) - py))
        best = min(best, r)
        if r < threshold:
            return idx, r, threshold
    raise NetExhaustedError(
        f"no schedule entry reached residual below {threshold:.3e} "
        f"(best {best:.3e} at N = {net.schedule[-1]}); extend the schedule"
    )


def _windows(model, base, h_set, side):
    return [sorted_elements(translate(model, base, h, side)) for h in h_set]


def pick_witness(moduli: np.ndarray) -> int:
    """Index of the max-modulus element; near-ties go to the lexicographically first."""
    best = moduli.max()
    return int(np.flatnonzero(moduli >= best - TIE_TOL)[0])


def window_values(rep: GnsRep, model: SemigroupModel, x, y, windows) -> tuple[list, np.ndarray, dict]:
    """<x, U_g y> for every g in the union of the windows."""
    union = sorted_elements(set().union(*windows))
    words = _words_of(rep, model, union)
    vecs = apply_words(rep.table(), model.word_order, words, y)
    values = vecs @ np.conj(x)
    index = {g: i for i, g in enumerate(union)}
    return union, values, index


def khintchine_window(
    rep: GnsRep,
    model: SemigroupModel,
    x,
    y,
    epsilon: float,
    net: FolnerNet,
    h_set: Iterable[GroupElement] | None = None,
    side: Side | str = Side.RIGHT,
    projection: FixedProjection | None = None,
) -> RecurrenceReport:
    """Hilbert-space Khintchine search over translated windows of the net.

    ``side="right"`` averages over Λ h and needs an abelian K; ``side="left"``
    averages over h Λ, which is valid for unimodular G.
    """
    side = Side(side)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if side is Side.RIGHT and not model.abelian:
        raise ValueError("right windows need an abelian subsemigroup; use side='left'")
    if side is Side.LEFT and not model.unimodular:
        raise ValueError("left windows need a unimodular group")
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    h_list = sorted_elements(set(word_ball(model, 3) if h_set is None else h_set))
    for h in h_list:
        if not model.contains(h):
            raise ValueError(f"{h!r} is not in the subsemigroup K")
    p = projection or fixed_projection(rep)
    py = p(y)
    alpha0, crit, threshold = find_alpha0(rep, model, x, y, epsilon, net, py)
    limit = complex(np.vdot(x, py))
    target = abs(limit)

    windows = _windows(model, net.sets[alpha0], h_list, side)
    _, values, index = window_values(rep, model, x, y, windows)
    records = []
    for h, win in zip(h_list, windows):
        vals = values[[index[g] for g in win]]
        avg = complex(vals.sum() / len(win))
        mods = np.abs(vals)
        k = pick_witness(mods)
        passed = abs(avg) > target - epsilon and mods[k] > target - epsilon
        records.append(RecurrenceRecord(h, avg, win[k], complex(vals[k]), bool(passed)))
    return RecurrenceReport(
        epsilon=float(epsilon),
        side=side,
        alpha0=alpha0,
        alpha0_size=len(net.sets[alpha0]),
        alpha0_schedule_value=net.schedule[alpha0],
        criterion_residual=crit,
        criterion_threshold=threshold,
        lower_bound=target,
        limit_value=limit,
        records=tuple(records),
        all_pass=all(r.passed for r in records),
    )


def correlation(system: StarDynamicalSystem, left: AlgebraElement, b: AlgebraElement, g: GroupElement) -> complex:
    """ω(L τ_g(B)) computed in the algebra."""
    return state_eval(system.state, alg_mul(left, tau_at(system, g)(b)))


def correlation_series(
    system: StarDynamicalSystem, a: AlgebraElement, b: AlgebraElement, elements: Iterable[GroupElement]
) -> list[complex]:
    """ω(A* τ_g(B)) for each g, evaluated at the algebra level."""
    a_star = alg_star(a)
    return [correlation(system, a_star, b, g) for g in elements]


def _read_back(system, rep, left, b, report: RecurrenceReport) -> RecurrenceReport:
    records, worst = [], 0.0
    for r in report.records:
        val = correlation(system, left, b, r.witness)
        worst = max(worst, abs(val - r.witness_value))
        records.append(
            RecurrenceRecord(r.h, r.window_average, r.witness, r.witness_value, r.passed, val)
        )
    ok = worst <= READBACK_TOL
    return replace(report, records=tuple(records), readback_residual=worst,
                 all_pass=report.all_pass and ok)


def khintchine_recurrence(
    system: StarDynamicalSystem,
    rep: GnsRep,
    a: AlgebraElement,
    b: AlgebraElement,
    epsilon: float,
    net: FolnerNet,
    h_set: Iterable[GroupElement] | None = None,
    side: Side | str = Side.RIGHT,
    projection: FixedProjection | None = None,
) -> RecurrenceReport:
    """Khintchine recurrence for ω(A* τ_g(B)) through x = ι(A), y = ι(B).

    Witness values are read back in the algebra and must agree with the
    Hilbert-space values. For A = B the report also carries the bound
    |ω(A)|^2 <= <x, Px> and checks every witness against |ω(A)|^2 - ε.
    """
    p = projection or fixed_projection(rep)
    x, y = iota(rep, a), iota(rep, b)
    report = khintchine_window(rep, system.model, x, y, epsilon, net, h_set, side, p)
    report = _read_back(system, rep, alg_star(a), b, report)
    if a is b or a.allclose(b, atol=0.0):
        omega_a = state_eval(system.state, a)
        sq = abs(omega_a) ** 2
        px = float(np.vdot(x, p(x)).real)
        bound_ok = sq <= px + 1e-12
        witnesses_ok = all(abs(r.witness_value) > sq - epsilon for r in report.records)
        corollary = {
            "omega_a": _cjson(omega_a),
            "omega_a_abs_sq": sq,
            "x_px": px,
            "bound_holds": bool(bound_ok),
            "witness_bound": sq - epsilon,
            "witnesses_exceed_bound": bool(witnesses_ok),
        }
        report = replace(report, corollary=corollary,
                       all_pass=report.all_pass and bound_ok and witnesses_ok)
    return report


@dataclass(frozen=True)
class ErgodicityCheck:
    ergodic: bool
    rank: int
    deviation: float

    def __bool__(self) -> bool:
        return self.ergodic

    def as_dict(self) -> dict:
        return {"ergodic": self.ergodic, "rank": self.rank, "deviation": self.deviation}


def is_ergodic(
    rep: GnsRep, tol: float = 1e-9, projection: FixedProjection | None = None
) -> ErgodicityCheck:
    """rank(P) = 1 and |P - Ω⊗Ω| <= tol, where (Ω⊗Ω)z = Ω<Ω, z>."""
    p = projection or fixed_projection(rep)
    if rep.omega_vec is None:
        raise ValueError("ergodicity needs the cyclic vector Ω")
    omega = rep.omega_vec
    dev = float(np.linalg.norm(p.matrix - np.outer(omega, omega.conj()), 2))
    return ErgodicityCheck(p.rank == 1 and dev <= tol, p.rank, dev)


def ergodic_bound_report(
    system: StarDynamicalSystem,
    rep: GnsRep,
    a: AlgebraElement,
    b: AlgebraElement,
    epsilon: float,
    net: FolnerNet,
    h_set: Iterable[GroupElement] | None = None,
    side: Side | str = Side.RIGHT,
    projection: FixedProjection | None = None,
) -> RecurrenceReport:
    """Recurrence for ω(A τ_g(B)) in an ergodic system, target |ω(A) ω(B)|.

    Uses x = ι(A*), for which <x, Py> = <ι(A*), Ω><Ω, ι(B)> = ω(A) ω(B).
    """
    p = projection or fixed_projection(rep)
    check = is_ergodic(rep, projection=p)
    if not check:
        raise PreconditionError(
            f"system is not ergodic (rank {check.rank}, deviation {check.deviation:.3e})"
        )
    x, y = iota(rep, alg_star(a)), iota(rep, b)
    report = khintchine_window(rep, system.model, x, y, epsilon, net, h_set, side, p)
    report = _read_back(system, rep, a, b, report)
    product = state_eval(system.state, a) * state_eval(system.state, b)
    agree = abs(product - report.limit_value)
    corollary = {
        "omega_a_omega_b": _cjson(product),
        "limit_agreement": agree,
        "target": abs(product) - epsilon,
    }
    return replace(report, corollary=corollary, all_pass=report.all_pass and agree <= READBACK_TOL)
