from __future__ import annotations

import numpy as np
import pytest

from ncrecur.algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    State,
    indicator_element,
    matrix_unit,
    state_eval,
)
from ncrecur.dynamics import (
    DynMap,
    StarDynamicalSystem,
    conjugation_from_unitary,
    koopman_from_map,
    validated,
)
from ncrecur.ergodic import (
    averaging_operator,
    convergence_profile,
    correlation_series,
    ergodic_avg,
    ergodic_bound_report,
    fixed_projection,
    is_ergodic,
    khintchine_recurrence,
    khintchine_window,
    pick_witness,
)
from ncrecur.exceptions import NetExhaustedError, PreconditionError
from ncrecur.gns import gns_build, gns_lift, hilbert_rep, iota, u_at
from ncrecur.multirec import tensor_systems
from ncrecur.scenarios import heisenberg_koopman_maps
from ncrecur.semigroup import SemigroupModel, Side, box, box_folner_net, word_ball

from oracles import fixed_rank_by_eigs, overlap, scalar_rotation_residual

CONE1 = SemigroupModel.cone(1)
M2 = AlgebraDescriptor.matrices(2)


def shift(m, step=1, model=CONE1):
    t = koopman_from_map(lambda x: (x + step) % m, m)
    system = StarDynamicalSystem(t.descriptor, State.uniform(m), model, (t,) * model.d)
    return system, gns_lift(gns_build(t.descriptor, system.state), system)


def qubit(theta):
    t = conjugation_from_unitary(np.diag([1.0, np.exp(1j * theta)]))
    system = StarDynamicalSystem(M2, State.tracial(M2), CONE1, (t,))
    return system, gns_lift(gns_build(M2, system.state), system)


def test_avg_examples():
    rep = hilbert_rep([np.eye(3)])
    x = np.array([1.0, 2j, -3])
    assert np.allclose(ergodic_avg(rep, CONE1, x, box(CONE1, 7)), x)

    m = 9
    system, rep = shift(m)
    got = ergodic_avg(rep, CONE1, iota(rep, indicator_element(m, [0])), box(CONE1, m))
    want = iota(rep, AlgebraElement.unit(system.descriptor)) / m
    assert np.allclose(got, want)

    flip = hilbert_rep([-np.eye(2)])
    lam = [CONE1.element(1), CONE1.element(2)]
    assert np.allclose(ergodic_avg(flip, CONE1, np.ones(2), lam), 0)
    with pytest.raises(ValueError):
        ergodic_avg(flip, CONE1, np.ones(2), [])


def test_avg_is_contractive_and_matches_direct_sum():
    maps = heisenberg_koopman_maps(3)
    h = SemigroupModel.heisenberg()
    system = StarDynamicalSystem(maps[0].descriptor, State.uniform(27), h, maps)
    rep = gns_lift(gns_build(system.descriptor, system.state), system)
    x = np.random.default_rng(0).standard_normal(27) + 0j
    lam = box(h, 3)
    direct = sum(u_at(rep, h, g) @ x for g in lam) / len(lam)
    got = ergodic_avg(rep, h, x, lam)
    assert np.allclose(got, direct)
    assert np.linalg.norm(got) <= np.linalg.norm(x) + 1e-12


def test_fixed_projection_examples():
    desc = AlgebraDescriptor((2, 1))
    omega = State.random_faithful(desc, np.random.default_rng(1))
    system = StarDynamicalSystem(desc, omega, CONE1, (DynMap.identity(desc),))
    rep = gns_lift(gns_build(desc, omega), system)
    p = fixed_projection(rep)
    assert p.rank == rep.hdim and np.allclose(p.matrix, np.eye(rep.hdim))

    _, rep = shift(8)
    p = fixed_projection(rep)
    assert p.rank == 1
    assert np.allclose(p.matrix, np.outer(rep.omega_vec, rep.omega_vec.conj()))

    _, rep = qubit(np.pi)
    assert fixed_projection(rep).rank == 2


def test_fixed_projection_properties():
    for system, rep in (shift(6), qubit(1.0), shift(5, model=SemigroupModel.cone(2))):
        p = fixed_projection(rep).matrix
        assert np.allclose(p @ p, p, atol=1e-9)
        assert np.allclose(p, p.conj().T, atol=1e-9)
        assert np.allclose(p @ rep.omega_vec, rep.omega_vec, atol=1e-9)
        for u in rep.u_generators:
            assert np.allclose(u @ p, p, atol=1e-9) and np.allclose(p @ u, p, atol=1e-9)
        assert fixed_projection(rep).rank == fixed_rank_by_eigs(rep.u_generators[0])


def test_convergence_fixed_vector_is_flat():
    _, rep = shift(10)
    net = box_folner_net(CONE1, [1, 3, 10, 50])
    series = convergence_profile(rep, CONE1, 2.5 * rep.omega_vec, net)
    assert max(series.residuals) <= 1e-10
    assert series.to_csv().splitlines()[0] == "N,lambda_size,residual"


def test_convergence_scalar_rotation_closed_form():
    rep = hilbert_rep([np.exp(1j)])
    sizes = [10, 100, 1000]
    series = convergence_profile(rep, CONE1, np.ones(1), box_folner_net(CONE1, sizes))
    for (n, size, r) in series.rows:
        assert size == n
        assert r == pytest.approx(scalar_rotation_residual(1.0, n), abs=1e-12)
        assert r <= 2 / (n * abs(1 - np.exp(1j)))


def test_convergence_exact_at_full_period():
    m = 11
    _, rep = shift(m)
    x = iota(rep, indicator_element(m, [0, 4]))
    series = convergence_profile(rep, CONE1, x, box_folner_net(CONE1, [m, 2 * m]))
    assert max(series.residuals) <= 1e-10


def test_projection_matches_averaging_oracle_on_cyclic():
    for m in (3, 7, 12):
        _, rep = shift(m)
        p = fixed_projection(rep).matrix
        assert np.linalg.norm(p - averaging_operator(rep, CONE1, box(CONE1, 2 * m)), 2) <= 1e-10


def test_window_with_cyclic_vector():
    _, rep = shift(5)
    net = box_folner_net(CONE1, [1, 5])
    report = khintchine_window(rep, CONE1, rep.omega_vec, rep.omega_vec, 0.1, net)
    assert report.alpha0 == 0
    assert report.lower_bound == pytest.approx(1)
    for r in report.records:
        assert r.window_average == pytest.approx(1)


def brute_window_max(m, subset, window):
    values = [overlap(m, subset, subset, g) for g in window]
    best = max(values)
    first = next(g for g, v in zip(window, values) if v >= best - 1e-12)
    return best, first, sum(values) / len(values)


def test_window_cyclic_twelve_against_brute_force():
    m, s, eps = 12, [0, 1, 2, 3], 0.05
    _, rep = shift(m)
    x = iota(rep, indicator_element(m, s))
    net = box_folner_net(CONE1, [6, 12, 24])
    hs = [CONE1.element(h) for h in range(30)]
    report = khintchine_window(rep, CONE1, x, x, eps, net, hs)
    assert report.lower_bound == pytest.approx(1 / 9)
    assert report.alpha0_schedule_value == 12
    assert report.all_pass
    for r in report.records:
        h = r.h.coords[0]
        best, first, avg = brute_window_max(m, s, range(h, h + 12))
        assert abs(r.witness_value) == pytest.approx(best, abs=1e-12)
        assert r.witness.coords[0] == first
        assert r.window_average == pytest.approx(avg, abs=1e-12)
        assert abs(r.witness_value) > 1 / 9 - eps


def test_window_orthogonal_vector_is_vacuous():
    m = 6
    _, rep = shift(m)
    x = iota(rep, indicator_element(m, [0]) - indicator_element(m, [3]))
    net = box_folner_net(CONE1, [6])
    report = khintchine_window(rep, CONE1, x, x, 0.01, net)
    assert report.lower_bound == pytest.approx(0, abs=1e-12)
    assert report.all_pass


def test_window_errors():
    _, rep = shift(7)
    x = iota(rep, indicator_element(7, [0]))
    with pytest.raises(NetExhaustedError):
        khintchine_window(rep, CONE1, x, x, 0.01, box_folner_net(CONE1, [2, 3]))
    with pytest.raises(ValueError):
        khintchine_window(rep, CONE1, x, x, 0.0, box_folner_net(CONE1, [7]))
    maps = heisenberg_koopman_maps(2)
    h = SemigroupModel.heisenberg()
    system = StarDynamicalSystem(maps[0].descriptor, State.uniform(8), h, maps)
    hrep = gns_lift(gns_build(system.descriptor, system.state), system)
    with pytest.raises(ValueError):
        khintchine_window(hrep, h, hrep.omega_vec, hrep.omega_vec, 0.1, box_folner_net(h, [2]),
                          side="right")


def test_left_and_right_agree_on_abelian():
    model = SemigroupModel.cone(2)
    m = 4
    t1 = koopman_from_map(lambda p: (p + 1) % m, m)
    t2 = koopman_from_map(lambda p: (p + 3) % m, m)
    system = StarDynamicalSystem(t1.descriptor, State.uniform(m), model, (t1, t2))
    rep = gns_lift(gns_build(system.descriptor, system.state), system)
    a = indicator_element(m, [0, 1])
    net = box_folner_net(model, [2, 4, 8])
    left = khintchine_recurrence(system, rep, a, a, 0.05, net, side="left")
    right = khintchine_recurrence(system, rep, a, a, 0.05, net, side="right")
    dl, dr = left.as_dict(), right.as_dict()
    dl.pop("side"), dr.pop("side")
    assert dl == dr


def test_pick_witness_ties_go_first():
    assert pick_witness(np.array([0.5, 0.7, 0.7 - 1e-14, 0.7])) == 1
    assert pick_witness(np.array([0.1])) == 0


def test_recurrence_unit_element():
    system, rep = shift(5)
    one = AlgebraElement.unit(system.descriptor)
    report = khintchine_recurrence(system, rep, one, one, 0.1, box_folner_net(CONE1, [5]))
    assert report.all_pass
    for r in report.records:
        assert r.algebra_value == pytest.approx(1)


def test_recurrence_cyclic_twelve():
    m = 12
    system, rep = shift(m)
    a = indicator_element(m, range(4))
    hs = [CONE1.element(h) for h in range(13)]
    report = khintchine_recurrence(system, rep, a, a, 0.05, box_folner_net(CONE1, [12, 24]), hs)
    assert report.all_pass and report.readback_residual <= 1e-9
    assert report.corollary["omega_a_abs_sq"] == pytest.approx(1 / 9)
    assert report.corollary["bound_holds"]
    # h = 12 has the window {12, ..., 23}; its witness is g = 12 with ν(S) = 1/3
    rec = next(r for r in report.records if r.h.coords == (12,))
    assert rec.witness.coords == (12,)
    assert abs(rec.witness_value) == pytest.approx(1 / 3)


def test_recurrence_qubit_closed_form():
    theta = 1.0
    system, rep = qubit(theta)
    a = matrix_unit(M2, 0, 0, 0) + matrix_unit(M2, 0, 0, 1)
    assert state_eval(system.state, a) == pytest.approx(0.5)
    ns = range(0, 200)
    vals = correlation_series(system, a, a, [CONE1.element(n) for n in ns])
    want = (1 + np.exp(1j * theta * np.arange(200))) / 2
    assert np.allclose(vals, want, atol=1e-10)
    report = khintchine_recurrence(system, rep, a, a, 0.01,
                                   box_folner_net(CONE1, [10, 100, 1000, 10000]))
    assert report.all_pass
    assert all(abs(r.witness_value) > 0.25 - 0.01 for r in report.records)


def test_algebra_and_hilbert_values_agree():
    rng = np.random.default_rng(4)
    desc = AlgebraDescriptor((2, 1))
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    t = conjugation_from_unitary([q, np.array([[1.0]])], desc)
    omega = State(desc, (np.diag([0.3, 0.3]), np.array([[0.4]])))
    system = StarDynamicalSystem(desc, omega, CONE1, (t,))
    rep = gns_lift(gns_build(desc, omega), system)
    for _ in range(100):
        a = AlgebraElement.random(desc, rng)
        b = AlgebraElement.random(desc, rng)
        g = CONE1.element(int(rng.integers(0, 20)))
        alg = correlation_series(system, a, b, [g])[0]
        hil = np.vdot(iota(rep, a), u_at(rep, CONE1, g) @ iota(rep, b))
        assert abs(alg - hil) <= 1e-9


def test_ergodicity_examples():
    for m in range(2, 13):
        _, rep = shift(m)
        check = is_ergodic(rep)
        assert check and check.rank == 1 and check.deviation <= 1e-9

    desc = AlgebraDescriptor((2, 1))
    omega = State.random_faithful(desc, np.random.default_rng(0))
    system = StarDynamicalSystem(desc, omega, CONE1, (DynMap.identity(desc),))
    rep = gns_lift(gns_build(desc, omega), system)
    check = is_ergodic(rep)
    assert not check and check.rank == rep.hdim == 5


def test_tensor_square_of_shift_is_not_ergodic():
    m = 5
    system, _ = shift(m)
    square = tensor_systems([validated(system), validated(system)])
    rep = gns_lift(gns_build(square.descriptor, square.state), square)
    check = is_ergodic(rep)
    assert not check
    assert check.rank == m == fixed_rank_by_eigs(rep.u_generators[0])


def test_ergodic_bound_report():
    m = 10
    system, rep = shift(m)
    s, s2 = [0, 1, 2], [2, 5, 6, 7]
    a, b = indicator_element(m, s), indicator_element(m, s2)
    hs = [CONE1.element(h) for h in range(10)]
    report = ergodic_bound_report(system, rep, a, b, 0.05, box_folner_net(CONE1, [10, 20]), hs)
    assert report.lower_bound == pytest.approx(0.3 * 0.4)
    assert report.all_pass
    for r in report.records:
        h = r.h.coords[0]
        vals = [overlap(m, s, s2, g) for g in range(h, h + 10)]
        assert r.window_average == pytest.approx(np.mean(vals), abs=1e-12)
        assert abs(r.window_average) > 0.12 - 0.05

    one = AlgebraElement.unit(system.descriptor)
    unit_report = ergodic_bound_report(system, rep, one, one, 0.05, box_folner_net(CONE1, [10]))
    assert unit_report.lower_bound == pytest.approx(1) and unit_report.all_pass


def test_ergodic_bound_needs_ergodicity():
    system, rep = qubit(1.0)
    a = matrix_unit(M2, 0, 0, 0) + matrix_unit(M2, 0, 0, 1)
    with pytest.raises(PreconditionError):
        ergodic_bound_report(system, rep, a, a, 0.01, box_folner_net(CONE1, [10]))


def test_left_windows_on_heisenberg():
    m = 3
    maps = heisenberg_koopman_maps(m)
    h = SemigroupModel.heisenberg()
    system = StarDynamicalSystem(maps[0].descriptor, State.uniform(m**3), h, maps)
    rep = gns_lift(gns_build(system.descriptor, system.state), system)
    a = indicator_element(m**3, range(m * m))
    report = khintchine_recurrence(system, rep, a, a, 0.05, box_folner_net(h, [3, 6]),
                                   word_ball(h, 2), side=Side.LEFT)
    assert report.all_pass
    assert report.lower_bound == pytest.approx((1 / 3) ** 2)


def test_long_average_accuracy():
    n = 200_000
    for theta in (1.0, 1e-3):
        rep = hilbert_rep([np.exp(1j * theta)])
        got = ergodic_avg(rep, CONE1, np.ones(1), box(CONE1, n))[0]
        exact = np.expm1(1j * theta * n) / np.expm1(1j * theta) / n
        assert abs(got - exact) <= 1e-12
